#include "coopcache/dataset.hpp"

#include <json.hpp>
#include <sstream>

#include "coopcache/instance_io.hpp"
#include "coopcache/interface.hpp"
#include "coopcache/policies.hpp"

namespace coopcache {

using nlohmann::json;

namespace {

json meta_json(const RecordMeta& m) {
  return json{{"instance_hash", m.instance_hash}, {"seed", m.seed}, {"slot", m.slot}};
}

std::string hash_window(LookaheadWindow peek) {
  std::string bytes;
  for (const auto& slot : peek) {
    for (FileId f : slot.per_user()) {
      bytes += std::to_string(f);
      bytes += ',';
    }
    bytes += ';';
  }
  return fnv1a_hex(bytes);
}

// Runs the expert trajectory and calls emit(t, obs, expert, peek) at every
// full-cache slot until it returns false. Returns true when the trace ran out
// first.
template <typename Emit>
bool walk_expert(const Instance& instance, const ExportOptions& options,
                 Emit emit) {
  if (options.horizon < 1) throw ConfigError("export horizon must be >= 1");
  int warmup = options.warmup_slots < 0 ? instance.config.warmup_slots
                                        : options.warmup_slots;
  WarmStart ws = warm_start(instance, warmup);
  if (options.target_records <= 0) return false;
  CacheState cache = ws.cache;
  for (int t = ws.next_slot; t + options.horizon <= instance.trace_length(); ++t) {
    const RequestSlot& requests = instance.slot(t);
    ws.tracker.advance(requests);
    SlotObservation obs = SlotObservation::build(t, cache, requests, ws.tracker);
    LookaheadWindow peek = instance.lookahead(t, options.horizon);
    JointAction expert = lookahead_oracle_action(
        obs, peek, instance.graph, options.horizon, options.discount);
    if (cache.all_full() && !emit(t, obs, expert, peek)) return false;
    cache = apply(cache, expert, requests);
  }
  return true;
}

}  // namespace

ExportResult<SftRecord> generate_sft(const Instance& instance,
                                     const ExportOptions& options) {
  ExportResult<SftRecord> result;
  result.requested = options.target_records;
  const std::string hash = instance_hash(instance);
  result.truncated = walk_expert(
      instance, options,
      [&](int t, const SlotObservation& obs, const JointAction& expert,
          LookaheadWindow) {
        result.records.push_back(
            {encode(obs), serialize(expert), {instance.seed, t, hash}});
        return static_cast<int>(result.records.size()) < options.target_records;
      });
  return result;
}

ExportResult<GrpoStateRecord> generate_grpo_states(
    const Instance& instance, const ExportOptions& options) {
  ExportResult<GrpoStateRecord> result;
  result.requested = options.target_records;
  const std::string hash = instance_hash(instance);
  result.truncated = walk_expert(
      instance, options,
      [&](int t, const SlotObservation& obs, const JointAction& expert,
          LookaheadWindow peek) {
        result.records.push_back({encode(obs), serialize(expert),
                                  hash_window(peek), t + 1,
                                  t + static_cast<int>(peek.size()),
                                  {instance.seed, t, hash}});
        return static_cast<int>(result.records.size()) < options.target_records;
      });
  return result;
}

namespace {

template <typename Record, typename ToJson>
std::string jsonl(const ExportResult<Record>& result, ToJson to_json) {
  std::string out;
  for (const auto& r : result.records) {
    out += to_json(r).dump();
    out += '\n';
  }
  if (result.truncated) {
    out += json{{"truncated", true},
                {"requested", result.requested},
                {"written", static_cast<int>(result.records.size())}}
               .dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::string to_jsonl(const ExportResult<SftRecord>& result) {
  return jsonl(result, [](const SftRecord& r) {
    return json{{"prompt", r.prompt},
                {"completion", r.completion},
                {"meta", meta_json(r.meta)}};
  });
}

std::string to_jsonl(const ExportResult<GrpoStateRecord>& result) {
  return jsonl(result, [](const GrpoStateRecord& r) {
    return json{{"prompt", r.prompt},
                {"expert", r.expert},
                {"peek_hash", r.peek_hash},
                {"peek_slots", {r.peek_first, r.peek_last}},
                {"meta", meta_json(r.meta)}};
  });
}

AuditReport audit_dataset_text(const std::string& text) {
  AuditReport report;
  std::istringstream in(text);
  std::string line;
  int index = 0;
  long long decisions = 0;
  long long noops = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) {
      return StructuralError("record " + std::to_string(index) + ": " + msg);
    };
    if (report.truncated) throw fail("record after the truncation marker");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw fail("not a JSON object");
    }
    if (!j.is_object()) throw fail("not a JSON object");
    if (j.contains("truncated")) {
      report.truncated = true;
      continue;
    }
    if (!j.contains("prompt") || !j.at("prompt").is_string()) {
      throw fail("missing string field 'prompt'");
    }
    const char* action_key = j.contains("completion") ? "completion" : "expert";
    if (!j.contains(action_key) || !j.at(action_key).is_string()) {
      throw fail("missing string field 'completion'");
    }
    SlotObservation obs;
    try {
      obs = decode_prompt(j.at("prompt").get<std::string>());
    } catch (const StructuralError& e) {
      throw fail(e.what());
    }
    if (report.noop_per_bs.size() < static_cast<std::size_t>(obs.num_bs())) {
      report.noop_per_bs.resize(static_cast<std::size_t>(obs.num_bs()), 0);
      report.swap_per_bs.resize(static_cast<std::size_t>(obs.num_bs()), 0);
    }
    if (!obs.cache.all_full()) {
      ++report.full_cache_violations;
      report.full_cache_indices.push_back(index);
    }
    JointAction action = parse(j.at(action_key).get<std::string>(), obs);
    if (!action.is_valid()) {
      ++report.invalid;
      report.invalid_indices.push_back(index);
      ++report.invalid_reasons[to_string(action.invalid_info().reason)];
    } else {
      const auto& per_bs = action.actions();
      for (std::size_t b = 0; b < per_bs.size(); ++b) {
        ++decisions;
        if (is_noop(per_bs[b])) {
          ++noops;
          ++report.noop_per_bs[b];
        } else {
          ++report.swap_per_bs[b];
        }
      }
      if (action.is_all_noop()) ++report.all_noop_records;
    }
    ++report.records;
    ++index;
  }
  report.noop_fraction =
      decisions == 0 ? 0.0 : static_cast<double>(noops) / decisions;
  return report;
}

AuditReport audit_dataset(const std::filesystem::path& path) {
  return audit_dataset_text(read_file(path));
}

}  // namespace coopcache
