#include "coopcache/verify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <random>

#include "coopcache/interface.hpp"
#include "coopcache/policies.hpp"

namespace coopcache {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxExamples = 10;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, n); modulo bias is irrelevant at these ranges.
  std::size_t pick(std::size_t n) {
    return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n);
  }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(pick(static_cast<std::size_t>(hi - lo + 1)));
  }
  bool chance(int percent) { return range(1, 100) <= percent; }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

struct Golden {
  SlotObservation obs;
  std::string prompt;
  std::string expert;
};

// States along one-step oracle trajectories on a few topologies, including a
// small library where random ids often hit cached and requested files.
std::vector<Golden> golden_pool(std::uint64_t seed, int per_instance) {
  std::vector<InstanceConfig> configs;
  configs.push_back(InstanceConfig::two_bs());
  configs.push_back(InstanceConfig::five_bs());
  InstanceConfig tiny = InstanceConfig::two_bs();
  tiny.num_bs = 3;
  tiny.num_users = 9;
  tiny.num_files = 12;
  tiny.cache_capacity = 3;
  tiny.windows = {5, 20};
  tiny.warmup_slots = 30;
  tiny.rollout_slots = per_instance;
  tiny.bs_positions = {{0.3, 0.4}, {0.7, 0.4}, {0.5, 0.75}};
  tiny.coverage_radius = 0.35;
  configs.push_back(tiny);

  std::vector<Golden> pool;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    InstanceConfig cfg = configs[i];
    cfg.rollout_slots = per_instance;
    Instance inst = build_instance(cfg, seed + i);
    WarmStart ws = warm_start(inst);
    CacheState cache = ws.cache;
    for (int k = 0; k < per_instance; ++k) {
      const int t = ws.next_slot + k;
      const RequestSlot& requests = inst.slot(t);
      ws.tracker.advance(requests);
      SlotObservation obs = SlotObservation::build(t, cache, requests, ws.tracker);
      JointAction expert =
          lookahead_oracle_action(obs, inst.lookahead(t, 1), inst.graph, 1, 0.9);
      pool.push_back({obs, encode(obs), serialize(expert)});
      cache = apply(cache, expert, requests);
    }
  }
  return pool;
}

JointAction random_feasible(const SlotObservation& obs, Rng& rng) {
  std::vector<BsAction> per_bs;
  for (int b = 0; b < obs.num_bs(); ++b) {
    auto options = feasible_actions(obs.cache, b, obs.requests);
    per_bs.push_back(options[rng.pick(options.size())]);
  }
  return JointAction::valid(std::move(per_bs));
}

std::string random_number(const SlotObservation& obs, Rng& rng) {
  switch (rng.pick(6)) {
    case 0: return std::to_string(rng.range(0, 3));
    case 1: return std::to_string(rng.range(1, obs.cache.num_files() + 2));
    case 2: return std::to_string(rng.range(1, obs.cache.capacity(0) + 1));
    case 3: {
      int b = static_cast<int>(rng.pick(static_cast<std::size_t>(obs.num_bs())));
      auto slots = obs.cache.slots(b);
      return std::to_string(slots[rng.pick(slots.size())]);
    }
    case 4: {
      int b = static_cast<int>(rng.pick(static_cast<std::size_t>(obs.num_bs())));
      auto counts = obs.requests.counts(b);
      if (counts.empty()) return "1";
      return std::to_string(counts[rng.pick(counts.size())].file);
    }
    default: {
      static const char* odd[] = {"00", "01", "-1", "+2", "1234567890",
                                  "999999999", "4294967297", "1e3", "0x1", ""};
      return odd[rng.pick(std::size(odd))];
    }
  }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

// One structural or character-level edit.
void mutate(std::string& text, const SlotObservation& obs, Rng& rng) {
  static const char alphabet[] = "BSNOPWAlotuin=: \t\r\n0123456789_-x";
  switch (rng.pick(9)) {
    case 0:  // overwrite a character
      if (!text.empty()) {
        text[rng.pick(text.size())] =
            rng.chance(70) ? alphabet[rng.pick(sizeof alphabet - 1)]
                           : static_cast<char>(rng.pick(256));
      }
      break;
    case 1:  // insert a character
      text.insert(text.begin() + static_cast<std::ptrdiff_t>(rng.pick(text.size() + 1)),
                  alphabet[rng.pick(sizeof alphabet - 1)]);
      break;
    case 2:  // delete a character
      if (!text.empty()) {
        text.erase(text.begin() + static_cast<std::ptrdiff_t>(rng.pick(text.size())));
      }
      break;
    case 3:
    case 4: {  // replace a number
      std::vector<std::pair<std::size_t, std::size_t>> spans;
      for (std::size_t i = 0; i < text.size();) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
          std::size_t j = i;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
          spans.push_back({i, j - i});
          i = j;
        } else {
          ++i;
        }
      }
      if (!spans.empty()) {
        auto [pos, len] = spans[rng.pick(spans.size())];
        text.replace(pos, len, random_number(obs, rng));
      }
      break;
    }
    case 5: {  // duplicate, drop or swap lines
      auto lines = split_lines(text);
      if (lines.empty()) break;
      std::size_t i = rng.pick(lines.size());
      std::size_t j = rng.pick(lines.size());
      switch (rng.pick(3)) {
        case 0: lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(i), lines[j]); break;
        case 1: lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(i)); break;
        default: std::swap(lines[i], lines[j]); break;
      }
      text = join_lines(lines);
      break;
    }
    case 6: {  // swap a keyword
      static const char* words[] = {"NOOP", "SWAP", "noop", "Swap", "slot=",
                                    "out=", "in=",  "BS",   "bs",   ":"};
      static const char* targets[] = {"NOOP", "SWAP", "slot=", "out=", "in=", "BS"};
      std::string from = targets[rng.pick(std::size(targets))];
      auto pos = text.find(from);
      if (pos != std::string::npos) {
        text.replace(pos, from.size(), words[rng.pick(std::size(words))]);
      }
      break;
    }
    case 7:  // whitespace noise
      text.insert(rng.pick(text.size() + 1), rng.chance(50) ? "  " : "\n\n");
      break;
    default:  // truncate
      text.resize(rng.pick(text.size() + 1));
      break;
  }
}

// True when a Valid parse respects every rule against the observation.
bool feasible_everywhere(const JointAction& action, const SlotObservation& obs) {
  const auto& per_bs = action.actions();
  if (static_cast<int>(per_bs.size()) != obs.num_bs()) return false;
  for (int b = 0; b < obs.num_bs(); ++b) {
    if (check_feasible(obs.cache, b, per_bs[b], obs.requests)) return false;
  }
  try {
    CacheState next = apply(obs.cache, action, obs.requests);
    return check_transition(obs.cache, next);
  } catch (const Error&) {
    return false;
  }
}

std::string printable(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (c == '\n') {
      out += "\\n";
    } else if (c < 0x20 || c >= 0x7f) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", c);
      out += buf;
    } else {
      out += static_cast<char>(c);
    }
  }
  return out.size() > 200 ? out.substr(0, 200) + "..." : out;
}

}  // namespace

FuzzReport run_parser_fuzz(long long cases, std::uint64_t seed) {
  FuzzReport report;
  Rng rng(seed);
  const auto pool = golden_pool(seed, 40);
  for (long long i = 0; i < cases; ++i) {
    const Golden& g = pool[rng.pick(pool.size())];
    std::string input;
    const auto mode = rng.pick(10);
    if (mode < 3) {
      ++report.random_byte_cases;
      const int len = rng.range(0, 160);
      for (int k = 0; k < len; ++k) input += static_cast<char>(rng.pick(256));
    } else {
      ++report.mutated_cases;
      if (mode < 5) {
        input = g.expert;
      } else if (mode < 9) {
        input = serialize(random_feasible(g.obs, rng));
      } else {
        input = g.prompt;
      }
      const int edits = rng.range(1, 4);
      for (int k = 0; k < edits; ++k) mutate(input, g.obs, rng);
    }
    ++report.cases;
    try {
      JointAction action = parse(input, g.obs);
      if (action.is_valid()) {
        ++report.valid;
        if (!feasible_everywhere(action, g.obs)) {
          ++report.infeasible_valid;
          if (report.examples.size() < kMaxExamples) {
            report.examples.push_back("infeasible: " + printable(input));
          }
        }
      }
    } catch (...) {
      ++report.panics;
      if (report.examples.size() < kMaxExamples) {
        report.examples.push_back("threw: " + printable(input));
      }
    }
  }
  return report;
}

RoundTripReport run_roundtrips(int cases, std::uint64_t seed) {
  RoundTripReport report;
  Rng rng(seed);
  const auto pool = golden_pool(seed, 30);
  for (int i = 0; i < cases; ++i) {
    const Golden& g = pool[rng.pick(pool.size())];
    JointAction action = random_feasible(g.obs, rng);
    if (parse(serialize(action), g.obs) != action) ++report.action_mismatches;
    SlotObservation back = decode_prompt(g.prompt);
    // The library size is not rendered, so slot contents are compared.
    bool same = back.t == g.obs.t && back.num_bs() == g.obs.num_bs();
    for (int b = 0; same && b < g.obs.num_bs(); ++b) {
      auto x = back.requests.counts(b);
      auto y = g.obs.requests.counts(b);
      auto p = back.cache.slots(b);
      auto q = g.obs.cache.slots(b);
      same = std::equal(x.begin(), x.end(), y.begin(), y.end()) &&
             std::equal(p.begin(), p.end(), q.begin(), q.end());
    }
    if (!same) ++report.prompt_mismatches;
    ++report.cases;
  }
  return report;
}

HitOracleReport check_hit_rate_oracle(int instances, std::uint64_t seed) {
  HitOracleReport report;
  Rng rng(seed);
  for (int n = 0; n < instances; ++n) {
    const int num_bs = rng.range(1, 3);
    const int num_files = rng.range(1, 10);
    const int num_users = rng.range(1, 8);
    AssociationGraph graph;
    graph.radius = 0.2 + 0.5 * rng.unit();
    for (int b = 0; b < num_bs; ++b) graph.bs_positions.push_back({rng.unit(), rng.unit()});
    for (int u = 0; u < num_users; ++u) {
      Point p{rng.unit(), rng.unit()};
      std::vector<int> cover;
      for (int b = 0; b < num_bs; ++b) {
        if (std::hypot(p.x - graph.bs_positions[b].x, p.y - graph.bs_positions[b].y) <=
            graph.radius) {
          cover.push_back(b);
        }
      }
      if (cover.empty()) cover.push_back(rng.range(0, num_bs - 1));
      std::sort(cover.begin(), cover.end());
      graph.user_positions.push_back(p);
      graph.covering.push_back(cover);
    }
    for (int s = 0; s < 10; ++s) {
      std::vector<std::vector<FileId>> slots(num_bs);
      for (auto& row : slots) {
        std::vector<FileId> files(num_files);
        for (int f = 0; f < num_files; ++f) files[f] = f + 1;
        for (std::size_t k = files.size(); k > 1; --k) {
          std::swap(files[k - 1], files[rng.pick(k)]);
        }
        const int capacity = rng.range(1, std::min(4, num_files));
        for (int z = 0; z < capacity; ++z) {
          row.push_back(rng.chance(80) ? files[z] : kEmptySlot);
        }
      }
      CacheState cache = CacheState::from_slots(num_files, slots);
      std::vector<FileId> per_user;
      for (int u = 0; u < num_users; ++u) per_user.push_back(rng.range(1, num_files));
      RequestSlot requests(per_user, graph);

      int brute = 0;
      for (int u = 0; u < num_users; ++u) {
        bool hit = false;
        for (int b : graph.covering[u]) {
          for (FileId f : slots[b]) hit = hit || f == per_user[u];
        }
        brute += hit ? 1 : 0;
      }
      const double expected = static_cast<double>(brute) / num_users;
      if (hit_count(cache, requests, graph) != brute ||
          hit_rate(cache, requests, graph) != expected) {
        ++report.mismatches;
      }
      ++report.states;
    }
    ++report.instances;
  }
  return report;
}

ActionSpaceReport verify_action_space(const Instance& instance) {
  ActionSpaceReport report;
  WarmStart ws = warm_start(instance);
  CacheState cache = ws.cache;
  for (int k = 0; k < instance.config.rollout_slots; ++k) {
    const int t = ws.next_slot + k;
    const RequestSlot& requests = instance.slot(t);
    ws.tracker.advance(requests);
    SlotObservation obs = SlotObservation::build(t, cache, requests, ws.tracker);
    JointSpaceSize size = joint_space_size(obs);
    ++report.slots;
    if (size.bound_applicable) {
      ++report.applicable;
      if (!size.bound_holds) ++report.violations;
    }
    if (size.factors != size.nominal_factors) ++report.nominal_differs;
    JointAction action = lookahead_oracle_action(obs, instance.lookahead(t, 1),
                                                 instance.graph, 1,
                                                 instance.config.warmup_discount);
    cache = apply(cache, action, requests);
  }
  return report;
}

json to_json(const FuzzReport& r) {
  return json{{"cases", r.cases},
              {"random_byte_cases", r.random_byte_cases},
              {"mutated_cases", r.mutated_cases},
              {"valid", r.valid},
              {"panics", r.panics},
              {"infeasible_valid", r.infeasible_valid},
              {"examples", r.examples},
              {"ok", r.ok()}};
}

json to_json(const RoundTripReport& r) {
  return json{{"cases", r.cases},
              {"action_mismatches", r.action_mismatches},
              {"prompt_mismatches", r.prompt_mismatches},
              {"ok", r.ok()}};
}

json to_json(const HitOracleReport& r) {
  return json{{"instances", r.instances},
              {"states", r.states},
              {"mismatches", r.mismatches},
              {"ok", r.ok()}};
}

json to_json(const ActionSpaceReport& r) {
  return json{{"slots", r.slots},
              {"applicable", r.applicable},
              {"violations", r.violations},
              {"nominal_differs", r.nominal_differs},
              {"ok", r.ok()}};
}

json to_json(const PbrsReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back(
        {{"slot", v.slot}, {"bs", v.bs}, {"check", v.check}, {"detail", v.detail}});
  }
  return json{{"seed", r.seed},
              {"slots_checked", r.slots_checked},
              {"actions_checked", r.actions_checked},
              {"write_pairs_checked", r.write_pairs_checked},
              {"demotion_cases", r.demotion_cases},
              {"strict_demotion_applicable", r.strict_demotion_applicable},
              {"argmax_violations", r.argmax_violations},
              {"order_violations", r.order_violations},
              {"demotion_violations", r.demotion_violations},
              {"violations", violations},
              {"ok", r.total_violations() == 0}};
}

}  // namespace coopcache
