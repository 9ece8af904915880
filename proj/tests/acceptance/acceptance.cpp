// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Informational lines start with "  ".

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "coopcache/dataset.hpp"
#include "coopcache/harness.hpp"
#include "coopcache/instance_io.hpp"
#include "coopcache/verify.hpp"

namespace fs = std::filesystem;
using namespace coopcache;

namespace {

int failures = 0;

void verdict(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

void note(const std::string& text) { std::cout << "  " << text << std::endl; }

int sh(const std::string& cmd) {
  int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return rc;
}

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
  }
  return out;
}

void determinism(const fs::path& work) {
  const std::string cli = COOPCACHE_CLI;
  const fs::path out = work / "det";
  std::map<std::string, std::string> first;
  bool ok = true;
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(out);
    ok = ok && sh(cli + " run --out " + out.string()) == 0;
    ok = ok && sh(cli + " export-sft --records 200 --out " + out.string()) == 0;
    auto snap = snapshot(out);
    snap.erase("latency.csv");  // wall-clock measurements
    if (pass == 0) {
      first = std::move(snap);
    } else {
      ok = ok && snap == first;
    }
  }
  std::size_t instances = 0;
  std::size_t reports = 0;
  for (const auto& [name, _] : first) {
    instances += name.rfind("instances/", 0) == 0;
    reports += name.rfind("reports/", 0) == 0;
  }
  ok = ok && instances == 3 && reports == 12 && first.count("sft.jsonl") == 1;
  verdict("determinism", ok,
          std::to_string(first.size()) + " files byte-identical across two runs (" +
              std::to_string(instances) + " instances, " + std::to_string(reports) +
              " reports, 1 dataset)");
}

void feasibility_suite() {
  FuzzReport fuzz = run_parser_fuzz(100000, 2024);
  RoundTripReport rt = run_roundtrips(1000, 2024);
  for (const auto& e : fuzz.examples) note(e);
  verdict("parser feasibility suite", fuzz.ok() && rt.ok() && fuzz.cases == 100000,
          std::to_string(fuzz.cases) + " fuzz cases (" + std::to_string(fuzz.valid) +
              " parsed Valid), panics=" + std::to_string(fuzz.panics) +
              ", valid-but-infeasible=" + std::to_string(fuzz.infeasible_valid) +
              "; " + std::to_string(rt.cases) + " round-trips, mismatches=" +
              std::to_string(rt.action_mismatches + rt.prompt_mismatches));
}

void hit_rate_oracle() {
  HitOracleReport r = check_hit_rate_oracle(200, 99);
  verdict("hit-rate oracle equivalence", r.ok() && r.instances == 200,
          std::to_string(r.instances) + " instances, " + std::to_string(r.states) +
              " states, mismatches=" + std::to_string(r.mismatches));
}

void shaping() {
  int violations = 0;
  int slots = 0;
  long long actions = 0;
  int demotions = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    PbrsReport r = verify_pbrs(build_instance(InstanceConfig::two_bs(), seed), 20,
                               RewardConfig{});
    violations += r.total_violations();
    slots += r.slots_checked;
    actions += r.actions_checked;
    demotions += r.demotion_cases;
    for (const auto& v : r.violations) {
      note("seed " + std::to_string(seed) + " slot " + std::to_string(v.slot) + " " +
           v.check + ": " + v.detail);
    }
  }
  verdict("reward shaping guarantees", violations == 0 && slots == 60,
          std::to_string(slots) + " full-cache slots, " + std::to_string(actions) +
              " per-BS actions, " + std::to_string(demotions) +
              " demotion cases, violations=" + std::to_string(violations));
}

void action_space() {
  long long slots = 0;
  long long applicable = 0;
  long long violations = 0;
  for (auto cfg : {InstanceConfig::two_bs(), InstanceConfig::five_bs()}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      ActionSpaceReport r = verify_action_space(build_instance(cfg, seed));
      slots += r.slots;
      applicable += r.applicable;
      violations += r.violations;
    }
  }
  std::vector<long long> factors(5, 41);
  const auto product = joint_space_size(factors).product;
  verdict("joint action-space lower bound", violations == 0 && product == 115856201ULL,
          std::to_string(slots) + " evaluated slots, " + std::to_string(applicable) +
              " with every factor >= 2, violations=" + std::to_string(violations) +
              "; 41^5 = " + std::to_string(product));
}

std::map<std::string, double> baseline_means(const InstanceConfig& instance) {
  RunConfig cfg;
  cfg.instance = instance;
  auto reports = run_all(cfg, build_instances(cfg));
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : reports) {
    acc[r.policy].first += r.checkpoint_mean;
    acc[r.policy].second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [p, v] : acc) out[p] = v.first / v.second;
  return out;
}

void baseline_ordering() {
  struct Scale {
    const char* label;
    InstanceConfig config;
    std::map<std::string, double> reference;
  };
  std::vector<Scale> scales{
      {"two-BS", InstanceConfig::two_bs(),
       {{"oracle:1", 0.536}, {"lru", 0.502}, {"lfu", 0.497}, {"fifo", 0.313}}},
      {"five-BS", InstanceConfig::five_bs(),
       {{"oracle:1", 0.617}, {"lru", 0.574}, {"lfu", 0.586}, {"fifo", 0.370}}}};
  bool ok = true;
  std::string detail;
  for (const auto& s : scales) {
    auto m = baseline_means(s.config);
    const bool order = m["oracle:1"] > m["lru"] && m["oracle:1"] > m["lfu"] &&
                       m["lfu"] > m["fifo"] && m["lru"] > m["fifo"];
    const bool fifo_band = m["fifo"] < 0.45;
    const bool oracle_band = m["oracle:1"] > 0.45;
    ok = ok && order && fifo_band && oracle_band;
    std::ostringstream line;
    line << s.label << " oracle:1=" << fixed(m["oracle:1"], 3) << " lfu=" << fixed(m["lfu"], 3)
         << " lru=" << fixed(m["lru"], 3) << " fifo=" << fixed(m["fifo"], 3)
         << " ordering=" << (order ? "ok" : "violated")
         << " fifo<0.45=" << (fifo_band ? "ok" : "violated")
         << " oracle>0.45=" << (oracle_band ? "ok" : "violated");
    note(line.str());
    for (const auto& [policy, ref] : s.reference) {
      const double dev = m[policy] - ref;
      if (std::abs(dev) > 0.10) {
        note(std::string("flag: ") + s.label + " " + policy + " mean " + fixed(m[policy], 3) +
             " deviates from the reference band " + fixed(ref, 3) + " by " + fixed(dev, 3));
      }
    }
    detail += std::string(detail.empty() ? "" : "; ") + s.label + (order && fifo_band && oracle_band ? " ok" : " failed");
  }
  verdict("baseline ordering and bands", ok, detail);
}

// Non-decreasing (sign=+1) or non-increasing (sign=-1) with at most one
// inversion no larger than slack.
bool trend_holds(const std::vector<double>& ys, int sign, double slack, std::string& why) {
  int inversions = 0;
  for (std::size_t i = 1; i < ys.size(); ++i) {
    const double step = sign * (ys[i] - ys[i - 1]);
    if (step < 0.0) {
      ++inversions;
      if (-step > slack) {
        why = "inversion of " + fixed(-step, 4) + " at index " + std::to_string(i);
        return false;
      }
    }
  }
  if (inversions > 1) {
    why = std::to_string(inversions) + " inversions";
    return false;
  }
  why = std::to_string(inversions) + " inversion(s)";
  return true;
}

void sweep_trends() {
  struct Case {
    const char* label;
    InstanceConfig base;
    SweepAxis axis;
    std::vector<double> values;
    int sign;
  };
  std::vector<Case> cases{
      {"cache capacity (two-BS)", InstanceConfig::two_bs(), SweepAxis::kCacheCapacity,
       {10, 15, 20, 25, 30}, +1},
      {"library size (five-BS)", InstanceConfig::five_bs(), SweepAxis::kLibrarySize,
       {100, 300, 500, 700, 900, 1100}, -1},
      {"zipf skew (five-BS)", InstanceConfig::five_bs(), SweepAxis::kZipfAlpha,
       {0.6, 0.8, 1.0, 1.2, 1.4, 1.6}, +1}};
  bool ok = true;
  int checked = 0;
  for (const auto& c : cases) {
    RunConfig cfg;
    cfg.instance = c.base;
    cfg.policies = {"oracle:1", "lru", "lfu"};
    auto means = sweep_means(sweep(cfg, c.axis, c.values));
    for (const auto& policy : cfg.policies) {
      std::vector<double> ys;
      std::string series;
      for (double v : c.values) {
        ys.push_back(means.at({v, policy}));
        series += (series.empty() ? "" : " ") + fixed(ys.back(), 3);
      }
      std::string why;
      const bool holds = trend_holds(ys, c.sign, 0.005, why);
      ok = ok && holds;
      ++checked;
      note(std::string(c.label) + " " + policy + ": " + series + " (" + why + ")");
    }
  }
  verdict("sweep trends", ok, std::to_string(checked) + " policy/axis series checked");
}

void dataset_audit() {
  auto cfg = InstanceConfig::two_bs();
  cfg.rollout_slots = 500;
  Instance inst = build_instance(cfg, 1);
  ExportOptions opts;
  opts.target_records = 500;
  std::string a = to_jsonl(generate_sft(inst, opts));
  std::string b = to_jsonl(generate_sft(build_instance(cfg, 1), opts));
  AuditReport r = audit_dataset_text(a);
  verdict("dataset audit",
          r.records == 500 && r.invalid == 0 && r.full_cache_violations == 0 && a == b,
          std::to_string(r.records) + " records, invalid=" + std::to_string(r.invalid) +
              ", full-cache violations=" + std::to_string(r.full_cache_violations) +
              ", NoOp fraction=" + fixed(r.noop_fraction, 3) +
              ", regenerated " + (a == b ? "bit-identically" : "differently"));
}

void extern_echo() {
  RunConfig cfg;
  Instance inst = build_instance(cfg.instance, 1);
  auto policy = make_policy(std::string("extern:") + NOOP_AGENT + " noop", 0.9,
                            std::chrono::milliseconds(10000));
  EvalReport r = rollout(inst, *policy, cfg);
  double total = 0.0;
  for (double ms : r.latency_ms) total += ms;
  verdict("external policy end-to-end", r.hit_series.size() == 300 && r.invalid_count == 0,
          std::to_string(r.hit_series.size()) + " slots, invalid=" +
              std::to_string(r.invalid_count) + ", mean latency " +
              fixed(total / static_cast<double>(r.latency_ms.size()), 3) + " ms");
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "coopcache-acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const auto start = std::chrono::steady_clock::now();
  try {
    determinism(work);
    feasibility_suite();
    hit_rate_oracle();
    shaping();
    action_space();
    baseline_ordering();
    sweep_trends();
    dataset_audit();
    extern_echo();
  } catch (const std::exception& e) {
    verdict("acceptance run", false, std::string("aborted: ") + e.what());
  }
  fs::remove_all(work);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED")
            << " (" << fixed(secs, 1) << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
