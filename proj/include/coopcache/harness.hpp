#pragma once

// Frozen-trajectory evaluation: rollouts, prefix-average metrics, multi-seed
// runs, parameter sweeps and table emission.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopcache/policies.hpp"
#include "coopcache/reward.hpp"
#include "coopcache/traffic.hpp"

namespace coopcache {

inline constexpr const char* kRunSchema = "coopcache.run/v1";
inline constexpr const char* kReportSchema = "coopcache.report/v1";
inline constexpr const char* kOutputDirEnv = "COOPCACHE_OUTPUT_DIR";

struct RunConfig {
  InstanceConfig instance = InstanceConfig::two_bs();
  // When set, the instance is loaded from this file and `seeds` is ignored.
  std::optional<std::filesystem::path> instance_file;
  std::vector<std::string> policies{"lru", "lfu", "fifo", "oracle:1"};
  RewardConfig reward;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::filesystem::path output_dir = "coopcache-out";
  int extern_timeout_ms = 10000;

  // Throws ConfigError on malformed policy specs or an inconsistent layout.
  void validate() const;
};

nlohmann::json run_config_to_json(const RunConfig& cfg);
// Requires the schema tag; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

struct EvalReport {
  std::string policy;
  std::uint64_t seed = 0;
  std::string instance_hash;
  int first_slot = 0;  // global index of the first evaluated slot
  std::vector<double> hit_series;
  std::vector<int> checkpoints;
  std::vector<double> prefix_at_checkpoints;
  // Mean of the checkpoint prefix averages (the tables' "Mean" column).
  double checkpoint_mean = 0.0;
  // Mean of the per-slot series (the prefix average at the last slot).
  double overall_mean = 0.0;
  int invalid_count = 0;
  std::map<std::string, int> invalid_reasons;
  // Wall-clock decision latency per slot. Kept out of the report document so
  // reports stay byte-identical across runs.
  std::vector<double> latency_ms;
};

// Prefix-average checkpoints: every 50 slots up to T, always including T.
std::vector<int> checkpoint_slots(int rollout_slots);
// (1/t) * sum of the first t entries.
double prefix_average(const std::vector<double>& series, int t);
// Recomputes prefix averages from the series and compares them.
bool report_consistent(const EvalReport& report);

// Evaluates `policy` from the warm-started state for rollout_slots slots:
// measure P_hit on X^(t) against Q^(t), advance features, decide, parse,
// apply unless Invalid. Every executed transition is audited.
EvalReport rollout(const Instance& instance, const WarmStart& start,
                   Policy& policy, const RunConfig& cfg);
EvalReport rollout(const Instance& instance, Policy& policy,
                   const RunConfig& cfg);

// Every configured policy on every seed; policies on one seed share the
// instance and warm start.
std::vector<EvalReport> run_all(const RunConfig& cfg,
                                const std::vector<Instance>& instances);
std::vector<Instance> build_instances(const RunConfig& cfg);

enum class SweepAxis { kCacheCapacity, kLibrarySize, kZipfAlpha, kUsers };

SweepAxis parse_sweep_axis(const std::string& name);
const char* to_string(SweepAxis axis);
InstanceConfig with_axis_value(InstanceConfig config, SweepAxis axis,
                               double value);

struct SweepRow {
  double value = 0.0;
  std::string policy;
  std::uint64_t seed = 0;
  double mean = 0.0;  // checkpoint mean
  double overall_mean = 0.0;
  int invalid_count = 0;
};

std::vector<SweepRow> sweep(const RunConfig& base, SweepAxis axis,
                            const std::vector<double>& values);
// Mean over seeds of `mean`, keyed by (value, policy).
std::map<std::pair<double, std::string>, double> sweep_means(
    const std::vector<SweepRow>& rows);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// Tables:
//   summary.csv  policy,seed,slot_50,...,slot_T,mean  (per seed, then one
//                aggregate row per policy with seed "mean")
//   series.csv   policy,seed,slot,hit_rate,prefix_avg (long format)
//   metrics.csv  policy,seed,overall_mean,checkpoint_mean,invalid_count
//   latency.csv  policy,seed,slot,latency_ms (wall clock, not reproducible)
std::string summary_csv(const std::vector<EvalReport>& reports);
std::string series_csv(const std::vector<EvalReport>& reports);
std::string metrics_csv(const std::vector<EvalReport>& reports);
std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

// Writes reports/<policy>_seed<seed>.json, summary.csv, series.csv and
// metrics.csv under dir, plus latency.csv when latencies are present. Returns written paths.
std::vector<std::filesystem::path> write_reports(
    const std::vector<EvalReport>& reports, const std::filesystem::path& dir);
std::vector<EvalReport> load_reports(const std::filesystem::path& dir);

// Formats with fixed precision for tables.
std::string fixed(double value, int digits);

}  // namespace coopcache
