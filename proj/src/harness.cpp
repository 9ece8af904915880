#include "coopcache/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "coopcache/instance_io.hpp"

namespace coopcache {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration

void RunConfig::validate() const {
  if (policies.empty()) throw ConfigError("no policies configured");
  for (const auto& spec : policies) {
    bool ok = spec == "lru" || spec == "lfu" || spec == "fifo" ||
              spec == "noop" || spec.rfind("oracle:", 0) == 0 ||
              (spec.rfind("extern:", 0) == 0 && spec.size() > 7);
    if (!ok) throw ConfigError("malformed policy spec '" + spec + "'");
    if (spec.rfind("oracle:", 0) == 0) {
      // Parses the horizon; throws on garbage.
      auto p = make_policy(spec, reward.discount);
      if (p->lookahead_horizon() > instance.horizon_reserve) {
        throw ConfigError("policy '" + spec +
                          "' looks further ahead than horizon_reserve");
      }
    }
  }
  if (!instance_file && seeds.empty()) throw ConfigError("no seeds configured");
  if (extern_timeout_ms < 1) throw ConfigError("extern timeout must be >= 1 ms");
}

json run_config_to_json(const RunConfig& cfg) {
  json j{{"schema", kRunSchema},
         {"instance", config_to_json(cfg.instance)},
         {"policies", cfg.policies},
         {"reward", reward_to_json(cfg.reward)},
         {"seeds", cfg.seeds},
         {"output_dir", cfg.output_dir.string()},
         {"extern_timeout_ms", cfg.extern_timeout_ms}};
  if (cfg.instance_file) j["instance_file"] = cfg.instance_file->string();
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object() || j.value("schema", std::string{}) != kRunSchema) {
    throw ConfigError(std::string("run config must carry schema '") +
                      kRunSchema + "'");
  }
  static const std::vector<std::string> known{
      "schema", "instance", "instance_file", "policies", "reward",
      "seeds",  "output_dir", "extern_timeout_ms"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in run config");
    }
  }
  RunConfig cfg;
  try {
    if (j.contains("instance")) cfg.instance = config_from_json(j.at("instance"));
    if (j.contains("instance_file")) {
      cfg.instance_file = j.at("instance_file").get<std::string>();
    }
    if (j.contains("policies")) j.at("policies").get_to(cfg.policies);
    if (j.contains("reward")) cfg.reward = reward_from_json(j.at("reward"));
    if (j.contains("seeds")) j.at("seeds").get_to(cfg.seeds);
    if (j.contains("output_dir")) {
      cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("extern_timeout_ms")) {
      j.at("extern_timeout_ms").get_to(cfg.extern_timeout_ms);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("run config " + path.string() + " is not JSON: " + e.what());
  }
  return run_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Metrics

std::vector<int> checkpoint_slots(int rollout_slots) {
  std::vector<int> out;
  for (int t = 50; t <= rollout_slots; t += 50) out.push_back(t);
  if (rollout_slots > 0 && (out.empty() || out.back() != rollout_slots)) {
    out.push_back(rollout_slots);
  }
  return out;
}

double prefix_average(const std::vector<double>& series, int t) {
  if (t < 1 || t > static_cast<int>(series.size())) {
    throw StructuralError("prefix length out of range");
  }
  double sum = 0.0;
  for (int i = 0; i < t; ++i) sum += series[i];
  return sum / t;
}

bool report_consistent(const EvalReport& r) {
  if (r.checkpoints.size() != r.prefix_at_checkpoints.size()) return false;
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    if (std::abs(prefix_average(r.hit_series, r.checkpoints[i]) -
                 r.prefix_at_checkpoints[i]) > 1e-12) {
      return false;
    }
  }
  return true;
}

namespace {

void finalize(EvalReport& r) {
  r.checkpoints = checkpoint_slots(static_cast<int>(r.hit_series.size()));
  r.prefix_at_checkpoints.clear();
  double sum = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < r.hit_series.size(); ++i) {
    sum += r.hit_series[i];
    if (next < r.checkpoints.size() &&
        static_cast<int>(i + 1) == r.checkpoints[next]) {
      r.prefix_at_checkpoints.push_back(sum / static_cast<double>(i + 1));
      ++next;
    }
  }
  double cp = 0.0;
  for (double v : r.prefix_at_checkpoints) cp += v;
  r.checkpoint_mean = r.prefix_at_checkpoints.empty()
                          ? 0.0
                          : cp / static_cast<double>(r.prefix_at_checkpoints.size());
  r.overall_mean = r.hit_series.empty()
                       ? 0.0
                       : sum / static_cast<double>(r.hit_series.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// Rollout

EvalReport rollout(const Instance& instance, const WarmStart& start,
                   Policy& policy, const RunConfig& cfg) {
  const int horizon = policy.lookahead_horizon();
  const int slots = instance.config.rollout_slots;
  if (start.next_slot - 1 + slots + horizon > instance.trace_length()) {
    throw ConfigError("trace too short for " + std::to_string(slots) +
                      " slots with look-ahead " + std::to_string(horizon));
  }
  (void)cfg;
  EvalReport report;
  report.policy = policy.name();
  report.seed = instance.seed;
  report.instance_hash = instance_hash(instance);
  report.first_slot = start.next_slot;

  policy.reset(instance);
  auto* adapter = dynamic_cast<ExternalPolicy*>(&policy);
  auto adapter_errors = [&] {
    return adapter ? adapter->timeouts() + adapter->failures() : 0;
  };
  CacheState cache = start.cache;
  FrequencyTracker tracker = start.tracker;
  PolicyBooks books = start.books;
  for (int i = 0; i < slots; ++i) {
    const int t = start.next_slot + i;
    const RequestSlot& requests = instance.slot(t);
    report.hit_series.push_back(hit_rate(cache, requests, instance.graph));
    tracker.advance(requests);
    books.observe(t, requests);
    SlotObservation obs = SlotObservation::build(t, cache, requests, tracker);
    DecisionContext ctx{&books, &instance.graph, {}};
    if (horizon > 0) ctx.peek = instance.lookahead(t, horizon);

    const int errors_before = adapter_errors();
    auto t0 = std::chrono::steady_clock::now();
    std::string completion = policy.decide(obs, ctx);
    auto t1 = std::chrono::steady_clock::now();
    report.latency_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());

    JointAction action =
        adapter_errors() > errors_before
            ? JointAction::invalid(InvalidReason::kUnavailable, "no reply")
            : parse(completion, obs);
    if (!action.is_valid()) {
      ++report.invalid_count;
      ++report.invalid_reasons[to_string(action.invalid_info().reason)];
      continue;
    }
    CacheState next = apply(cache, action, requests);
    if (!check_transition(cache, next)) {
      throw Error("constraint audit failed at slot " + std::to_string(t) +
                  " for policy " + policy.name());
    }
    books.record_transition(t, cache, next);
    cache = std::move(next);
  }
  finalize(report);
  return report;
}

EvalReport rollout(const Instance& instance, Policy& policy,
                   const RunConfig& cfg) {
  return rollout(instance, warm_start(instance), policy, cfg);
}

std::vector<Instance> build_instances(const RunConfig& cfg) {
  std::vector<Instance> out;
  if (cfg.instance_file) {
    out.push_back(load_instance(*cfg.instance_file));
    return out;
  }
  for (auto seed : cfg.seeds) out.push_back(build_instance(cfg.instance, seed));
  return out;
}

std::vector<EvalReport> run_all(const RunConfig& cfg,
                                const std::vector<Instance>& instances) {
  cfg.validate();
  std::vector<EvalReport> reports;
  for (const auto& inst : instances) {
    WarmStart start = warm_start(inst);
    const std::string hash = instance_hash(inst);
    for (const auto& spec : cfg.policies) {
      auto policy = make_policy(spec, cfg.reward.discount,
                                std::chrono::milliseconds(cfg.extern_timeout_ms));
      EvalReport r = rollout(inst, start, *policy, cfg);
      // Paired comparison: every policy saw the same instance bytes.
      if (r.instance_hash != hash) throw Error("instance changed during a run");
      r.policy = spec;
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "cache_capacity") return SweepAxis::kCacheCapacity;
  if (name == "library_size") return SweepAxis::kLibrarySize;
  if (name == "zipf_alpha") return SweepAxis::kZipfAlpha;
  if (name == "users") return SweepAxis::kUsers;
  throw ConfigError("unknown sweep axis '" + name +
                    "' (cache_capacity | library_size | zipf_alpha | users)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kCacheCapacity: return "cache_capacity";
    case SweepAxis::kLibrarySize: return "library_size";
    case SweepAxis::kZipfAlpha: return "zipf_alpha";
    case SweepAxis::kUsers: return "users";
  }
  return "unknown";
}

InstanceConfig with_axis_value(InstanceConfig config, SweepAxis axis,
                               double value) {
  auto as_int = [&] {
    double r = std::round(value);
    if (std::abs(r - value) > 1e-9 || r < 1) {
      throw ConfigError(std::string(to_string(axis)) + " needs positive integers");
    }
    return static_cast<int>(r);
  };
  switch (axis) {
    case SweepAxis::kCacheCapacity:
      config.cache_capacity = as_int();
      config.capacities.clear();
      break;
    case SweepAxis::kLibrarySize: config.num_files = as_int(); break;
    case SweepAxis::kZipfAlpha: config.zipf_alpha = value; break;
    case SweepAxis::kUsers: config.num_users = as_int(); break;
  }
  return config;
}

std::vector<SweepRow> sweep(const RunConfig& base, SweepAxis axis,
                            const std::vector<double>& values) {
  base.validate();
  struct Cell {
    double value;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double v : values) {
    with_axis_value(base.instance, axis, v);  // validates the value early
    for (auto seed : base.seeds) cells.push_back({v, seed});
  }
  std::vector<std::vector<SweepRow>> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      try {
        RunConfig cfg = base;
        cfg.instance = with_axis_value(base.instance, axis, cells[i].value);
        Instance inst = build_instance(cfg.instance, cells[i].seed);
        WarmStart start = warm_start(inst);
        for (const auto& spec : cfg.policies) {
          auto policy = make_policy(
              spec, cfg.reward.discount,
              std::chrono::milliseconds(cfg.extern_timeout_ms));
          EvalReport r = rollout(inst, start, *policy, cfg);
          results[i].push_back({cells[i].value, spec, cells[i].seed,
                                r.checkpoint_mean, r.overall_mean,
                                r.invalid_count});
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  // Extern adapters keep one child per policy object; keep them sequential.
  for (const auto& spec : base.policies) {
    if (spec.rfind("extern:", 0) == 0) threads = 1;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SweepRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

std::map<std::pair<double, std::string>, double> sweep_means(
    const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, std::string>, std::pair<double, int>> acc;
  for (const auto& r : rows) {
    auto& slot = acc[{r.value, r.policy}];
    slot.first += r.mean;
    slot.second += 1;
  }
  std::map<std::pair<double, std::string>, double> out;
  for (const auto& [key, v] : acc) out[key] = v.first / v.second;
  return out;
}

// ---------------------------------------------------------------------------
// Report documents and tables

json report_to_json(const EvalReport& r) {
  return json{{"schema", kReportSchema},
              {"policy", r.policy},
              {"seed", r.seed},
              {"instance_hash", r.instance_hash},
              {"first_slot", r.first_slot},
              {"hit_series", r.hit_series},
              {"checkpoints", r.checkpoints},
              {"prefix_at_checkpoints", r.prefix_at_checkpoints},
              {"checkpoint_mean", r.checkpoint_mean},
              {"overall_mean", r.overall_mean},
              {"invalid_count", r.invalid_count},
              {"invalid_reasons", r.invalid_reasons}};
}

EvalReport report_from_json(const json& j) {
  if (!j.is_object() || j.value("schema", std::string{}) != kReportSchema) {
    throw StructuralError(std::string("report must carry schema '") +
                          kReportSchema + "'");
  }
  try {
    EvalReport r;
    j.at("policy").get_to(r.policy);
    j.at("seed").get_to(r.seed);
    j.at("instance_hash").get_to(r.instance_hash);
    j.at("first_slot").get_to(r.first_slot);
    j.at("hit_series").get_to(r.hit_series);
    j.at("invalid_count").get_to(r.invalid_count);
    j.at("invalid_reasons").get_to(r.invalid_reasons);
    finalize(r);
    return r;
  } catch (const json::exception& e) {
    throw StructuralError(std::string("malformed report: ") + e.what());
  }
}

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string summary_csv(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw StructuralError("no reports to tabulate");
  const auto& checkpoints = reports.front().checkpoints;
  std::string out = "policy,seed";
  for (int c : checkpoints) out += ",slot_" + std::to_string(c);
  out += ",mean\n";
  std::vector<std::string> order;
  for (const auto& r : reports) {
    if (r.checkpoints != checkpoints) {
      throw StructuralError("reports have different rollout lengths");
    }
    if (std::find(order.begin(), order.end(), r.policy) == order.end()) {
      order.push_back(r.policy);
    }
    out += r.policy + "," + std::to_string(r.seed);
    for (double v : r.prefix_at_checkpoints) out += "," + fixed(v, 6);
    out += "," + fixed(r.checkpoint_mean, 6) + "\n";
  }
  for (const auto& policy : order) {
    std::vector<double> sums(checkpoints.size(), 0.0);
    double mean = 0.0;
    int n = 0;
    for (const auto& r : reports) {
      if (r.policy != policy) continue;
      for (std::size_t i = 0; i < sums.size(); ++i) {
        sums[i] += r.prefix_at_checkpoints[i];
      }
      mean += r.checkpoint_mean;
      ++n;
    }
    out += policy + ",mean";
    for (double s : sums) out += "," + fixed(s / n, 6);
    out += "," + fixed(mean / n, 6) + "\n";
  }
  return out;
}

std::string series_csv(const std::vector<EvalReport>& reports) {
  std::string out = "policy,seed,slot,hit_rate,prefix_avg\n";
  for (const auto& r : reports) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r.hit_series.size(); ++i) {
      sum += r.hit_series[i];
      out += r.policy + "," + std::to_string(r.seed) + "," +
             std::to_string(i + 1) + "," + fixed(r.hit_series[i], 6) + "," +
             fixed(sum / static_cast<double>(i + 1), 6) + "\n";
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<EvalReport>& reports) {
  std::string out = "policy,seed,overall_mean,checkpoint_mean,invalid_count\n";
  for (const auto& r : reports) {
    out += r.policy + "," + std::to_string(r.seed) + "," +
           fixed(r.overall_mean, 6) + "," + fixed(r.checkpoint_mean, 6) + "," +
           std::to_string(r.invalid_count) + "\n";
  }
  return out;
}

namespace {

std::string latency_csv(const std::vector<EvalReport>& reports) {
  std::string out = "policy,seed,slot,latency_ms\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.latency_ms.size(); ++i) {
      out += r.policy + "," + std::to_string(r.seed) + "," +
             std::to_string(r.first_slot + static_cast<int>(i)) + "," +
             fixed(r.latency_ms[i], 4) + "\n";
    }
  }
  return out;
}

std::string file_stem(const EvalReport& r) {
  std::string name = r.policy.rfind("extern:", 0) == 0 ? "extern" : r.policy;
  for (char& c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) c = '-';
  }
  return name + "_seed" + std::to_string(r.seed);
}

}  // namespace

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string out = std::string(to_string(axis)) +
                    ",policy,seed,mean,overall_mean,invalid_count\n";
  auto value_text = [&](double v) {
    return axis == SweepAxis::kZipfAlpha ? fixed(v, 3)
                                         : std::to_string(std::lround(v));
  };
  for (const auto& r : rows) {
    out += value_text(r.value) + "," + r.policy + "," + std::to_string(r.seed) +
           "," + fixed(r.mean, 6) + "," + fixed(r.overall_mean, 6) + "," +
           std::to_string(r.invalid_count) + "\n";
  }
  for (const auto& [key, mean] : sweep_means(rows)) {
    out += value_text(key.first) + "," + key.second + ",mean," + fixed(mean, 6) +
           ",,\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_reports(
    const std::vector<EvalReport>& reports, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  // The zero-padded ordinal keeps lexicographic order equal to emission order.
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    char ordinal[16];
    std::snprintf(ordinal, sizeof ordinal, "%04zu_", i);
    auto path = dir / "reports" / (ordinal + file_stem(r) + ".json");
    write_file(path, report_to_json(r).dump(1) + "\n");
    written.push_back(path);
  }
  auto put = [&](const char* name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(dir / name);
  };
  put("summary.csv", summary_csv(reports));
  put("series.csv", series_csv(reports));
  put("metrics.csv", metrics_csv(reports));
  bool any_latency = std::any_of(reports.begin(), reports.end(),
                                 [](const auto& r) { return !r.latency_ms.empty(); });
  if (any_latency) put("latency.csv", latency_csv(reports));
  return written;
}

std::vector<EvalReport> load_reports(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  auto root = std::filesystem::is_directory(dir / "reports") ? dir / "reports" : dir;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EvalReport> reports;
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_file(f));
    } catch (const json::exception& e) {
      throw StructuralError(f.string() + ": " + e.what());
    }
    reports.push_back(report_from_json(j));
  }
  if (reports.empty()) throw StructuralError("no report files in " + dir.string());
  return reports;
}

}  // namespace coopcache
