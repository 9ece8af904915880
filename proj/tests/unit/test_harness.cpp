#include <doctest.h>

#include <filesystem>

#include "coopcache/harness.hpp"
#include "coopcache/instance_io.hpp"

using namespace coopcache;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig cfg;
  cfg.instance.rollout_slots = 120;
  cfg.seeds = {1, 2, 3};
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("coopcache-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("checkpoints and prefix averages") {
  CHECK(checkpoint_slots(300) == std::vector<int>{50, 100, 150, 200, 250, 300});
  CHECK(checkpoint_slots(120) == std::vector<int>{50, 100, 120});
  CHECK(checkpoint_slots(30) == std::vector<int>{30});
  std::vector<double> s{1.0, 0.0, 0.5};
  CHECK(prefix_average(s, 2) == 0.5);
  CHECK(prefix_average(s, 3) == 0.5);
  CHECK_THROWS_AS(prefix_average(s, 4), StructuralError);
}

TEST_CASE("a NoOp policy reproduces the warm-started cache's hit series") {
  RunConfig cfg = small_config();
  Instance inst = build_instance(cfg.instance, 1);
  WarmStart ws = warm_start(inst);
  auto policy = make_policy("noop", 0.9);
  EvalReport r = rollout(inst, ws, *policy, cfg);
  REQUIRE(r.hit_series.size() == 120);
  for (int i = 0; i < 120; ++i) {
    CHECK(r.hit_series[i] == hit_rate(ws.cache, inst.slot(ws.next_slot + i), inst.graph));
  }
  CHECK(r.invalid_count == 0);
  CHECK(report_consistent(r));
  CHECK(r.latency_ms.size() == 120);
}

TEST_CASE("rollouts are deterministic and reports round-trip") {
  RunConfig cfg = small_config();
  auto instances = build_instances(cfg);
  auto a = run_all(cfg, instances);
  auto b = run_all(cfg, instances);
  REQUIRE(a.size() == 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(report_to_json(a[i]).dump() == report_to_json(b[i]).dump());
    CHECK(report_consistent(a[i]));
    auto back = report_from_json(report_to_json(a[i]));
    CHECK(report_to_json(back).dump() == report_to_json(a[i]).dump());
  }
}

TEST_CASE("summary table layout") {
  RunConfig cfg = small_config();
  cfg.instance.rollout_slots = 300;
  auto reports = run_all(cfg, build_instances(cfg));
  std::string csv = summary_csv(reports);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "policy,seed,slot_50,slot_100,slot_150,slot_200,slot_250,slot_300,mean");
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 1 + 12 + 4);
  CHECK(csv.find("\noracle:1,mean,") != std::string::npos);
}

TEST_CASE("report emission is idempotent") {
  RunConfig cfg = small_config();
  auto reports = run_all(cfg, build_instances(cfg));
  fs::path dir = scratch_dir("emit");
  write_reports(reports, dir);
  auto loaded = load_reports(dir);
  CHECK(loaded.size() == reports.size());
  fs::path again = scratch_dir("emit-again");
  write_reports(loaded, again);
  for (const char* name : {"summary.csv", "series.csv", "metrics.csv"}) {
    CHECK(read_file(dir / name) == read_file(again / name));
  }
  CHECK(fs::exists(dir / "latency.csv"));
  CHECK_FALSE(fs::exists(again / "latency.csv"));
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("run configuration files") {
  RunConfig cfg = small_config();
  cfg.policies = {"lru", "oracle:2"};
  auto j = run_config_to_json(cfg);
  RunConfig back = run_config_from_json(j);
  CHECK(run_config_to_json(back) == j);
  auto bad = j;
  bad["surprise"] = 1;
  CHECK_THROWS_AS(run_config_from_json(bad), ConfigError);
  auto unversioned = j;
  unversioned.erase("schema");
  CHECK_THROWS_AS(run_config_from_json(unversioned), ConfigError);
  cfg.policies = {"oracle:20"};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.policies = {"best"};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("sweeps regenerate instances per value") {
  RunConfig cfg = small_config();
  cfg.seeds = {1};
  cfg.policies = {"lru"};
  auto rows = sweep(cfg, SweepAxis::kCacheCapacity, {10, 20});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == 10);
  CHECK(rows[1].mean > rows[0].mean);
  CHECK(with_axis_value(cfg.instance, SweepAxis::kUsers, 60).num_users == 60);
  CHECK_THROWS_AS(with_axis_value(cfg.instance, SweepAxis::kLibrarySize, 10.5), ConfigError);
  CHECK_THROWS_AS(parse_sweep_axis("radius"), ConfigError);
  std::string csv = sweep_csv(SweepAxis::kCacheCapacity, rows);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "cache_capacity,policy,seed,mean,overall_mean,invalid_count");
}

TEST_CASE("extern adapter failures count as unavailable without aborting") {
  RunConfig cfg = small_config();
  cfg.instance.rollout_slots = 5;
  Instance inst = build_instance(cfg.instance, 1);
  auto policy = make_policy(std::string("extern:") + NOOP_AGENT + " sleep", 0.9,
                            std::chrono::milliseconds(50));
  EvalReport r = rollout(inst, *policy, cfg);
  CHECK(r.invalid_count == 5);
  CHECK(r.invalid_reasons.at("unavailable") == 5);
}
