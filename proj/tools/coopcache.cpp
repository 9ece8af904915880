// Command-line front end: instance generation, evaluation runs, sweeps,
// demonstration export, self-verification and report re-emission.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "coopcache/dataset.hpp"
#include "coopcache/harness.hpp"
#include "coopcache/instance_io.hpp"
#include "coopcache/verify.hpp"

namespace fs = std::filesystem;
using namespace coopcache;

namespace {

// Flags that mirror RunConfig. Unset flags leave the configuration alone.
struct ConfigFlags {
  std::string config_file;
  std::string out;
  int bs = 0;
  int users = 0;
  int files = 0;
  int capacity = 0;
  int groups = 0;
  double alpha = 0.0;
  std::vector<int> windows;
  int warmup = -1;
  int slots = 0;
  int horizon_reserve = -1;
  double radius = 0.0;
  std::string instance_file;
  std::vector<std::string> policies;
  std::vector<std::uint64_t> seeds;
  int timeout_ms = 0;
  int reward_horizon = 0;
  double reward_discount = 0.0;
  double lambda_fmt = 0.0;
  double lambda_opp = 0.0;

  CLI::App* app = nullptr;

  bool given(const std::string& name) const { return app->count(name) > 0; }
};

void add_instance_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--config", f.config_file, "run configuration file (coopcache.run/v1)");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--bs", f.bs, "number of base stations (2 or 5 select the default layouts)");
  app->add_option("--users", f.users, "number of users");
  app->add_option("--files", f.files, "library size");
  app->add_option("--capacity", f.capacity, "cache slots per BS");
  app->add_option("--groups", f.groups, "user groups");
  app->add_option("--alpha", f.alpha, "Zipf exponent");
  app->add_option("--windows", f.windows, "history windows")->delimiter(',');
  app->add_option("--warmup", f.warmup, "warm-up slots");
  app->add_option("--slots", f.slots, "rollout slots");
  app->add_option("--horizon-reserve", f.horizon_reserve, "trace slots kept after the rollout");
  app->add_option("--radius", f.radius, "coverage radius");
  f.app = app;
}

void add_run_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--instance-file", f.instance_file, "evaluate a saved instance instead of generating");
  app->add_option("--policy", f.policies, "lru | lfu | fifo | noop | oracle:H | extern:CMD (repeatable)");
  app->add_option("--seeds", f.seeds, "seed list")->delimiter(',');
  app->add_option("--timeout-ms", f.timeout_ms, "extern adapter timeout");
  app->add_option("--reward-horizon", f.reward_horizon, "look-ahead horizon H");
  app->add_option("--discount", f.reward_discount, "discount gamma");
  app->add_option("--lambda-fmt", f.lambda_fmt, "invalid-output penalty");
  app->add_option("--lambda-opp", f.lambda_opp, "missed-opportunity penalty");
}

RunConfig resolve(const ConfigFlags& f) {
  RunConfig cfg;
  if (!f.config_file.empty()) {
    cfg = load_run_config(f.config_file);
  } else if (f.given("--bs") && f.bs == 5) {
    cfg.instance = InstanceConfig::five_bs();
  }
  auto& ic = cfg.instance;
  if (f.given("--bs") && ic.num_bs != f.bs) {
    ic.num_bs = f.bs;
    ic.bs_positions.clear();
    ic.coverage_radius = 0.0;
  }
  if (f.given("--users")) ic.num_users = f.users;
  if (f.given("--files")) ic.num_files = f.files;
  if (f.given("--capacity")) {
    ic.cache_capacity = f.capacity;
    ic.capacities.clear();
  }
  if (f.given("--groups")) ic.num_groups = f.groups;
  if (f.given("--alpha")) ic.zipf_alpha = f.alpha;
  if (f.given("--windows")) ic.windows = f.windows;
  if (f.given("--warmup")) ic.warmup_slots = f.warmup;
  if (f.given("--slots")) ic.rollout_slots = f.slots;
  if (f.given("--horizon-reserve")) ic.horizon_reserve = f.horizon_reserve;
  if (f.given("--radius")) ic.coverage_radius = f.radius;
  if (f.app->get_option_no_throw("--policy")) {
    if (f.given("--instance-file")) cfg.instance_file = f.instance_file;
    if (f.given("--policy")) cfg.policies = f.policies;
    if (f.given("--seeds")) cfg.seeds = f.seeds;
    if (f.given("--timeout-ms")) cfg.extern_timeout_ms = f.timeout_ms;
    if (f.given("--reward-horizon")) cfg.reward.horizon = f.reward_horizon;
    if (f.given("--discount")) cfg.reward.discount = f.reward_discount;
    if (f.given("--lambda-fmt")) cfg.reward.lambda_fmt = f.lambda_fmt;
    if (f.given("--lambda-opp")) cfg.reward.lambda_opp = f.lambda_opp;
  }
  // Output directory precedence: flag, environment, file, default.
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
  if (f.given("--out")) cfg.output_dir = f.out;
  cfg.reward.validate();
  return cfg;
}

std::string seed_file(std::uint64_t seed) {
  return "instance_seed" + std::to_string(seed) + ".json";
}

int cmd_gen_instance(const ConfigFlags& f, std::uint64_t seed,
                     const std::string& output) {
  RunConfig cfg = resolve(f);
  Instance inst = build_instance(cfg.instance, seed);
  fs::path path = output.empty() ? cfg.output_dir / "instances" / seed_file(seed)
                                 : fs::path(output);
  save_instance(inst, path);
  std::cout << path.string() << " hash=" << instance_hash(inst) << "\n";
  return 0;
}

int cmd_run(const ConfigFlags& f) {
  RunConfig cfg = resolve(f);
  cfg.validate();
  auto instances = build_instances(cfg);
  if (!cfg.instance_file) {
    for (const auto& inst : instances) {
      save_instance(inst, cfg.output_dir / "instances" / seed_file(inst.seed));
    }
  } else {
    cfg.instance = instances.front().config;
  }
  write_file(cfg.output_dir / "run_config.json",
             run_config_to_json(cfg).dump(2) + "\n");
  auto reports = run_all(cfg, instances);
  write_reports(reports, cfg.output_dir);
  for (const auto& r : reports) {
    std::cerr << "[run] " << r.policy << " seed=" << r.seed
              << " hash=" << r.instance_hash << " mean=" << fixed(r.checkpoint_mean, 4)
              << " invalid=" << r.invalid_count << "\n";
  }
  std::cout << summary_csv(reports);
  return 0;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("sweep needs at least one value");
  return out;
}

int cmd_sweep(const ConfigFlags& f, const std::string& axis_name,
              const std::string& values) {
  RunConfig cfg = resolve(f);
  SweepAxis axis = parse_sweep_axis(axis_name);
  auto rows = sweep(cfg, axis, parse_values(values));
  std::string table = sweep_csv(axis, rows);
  fs::path path = cfg.output_dir / ("sweep_" + axis_name + ".csv");
  write_file(path, table);
  std::cerr << "[sweep] wrote " << path.string() << "\n";
  for (const auto& [key, mean] : sweep_means(rows)) {
    std::cout << axis_name << "=" << key.first << " " << key.second << " "
              << fixed(mean, 4) << "\n";
  }
  return 0;
}

int cmd_export(const ConfigFlags& f, std::uint64_t seed, int records,
               const std::string& format, int horizon, double discount,
               const std::string& output) {
  if (records < 0) throw ConfigError("--records must be >= 0");
  RunConfig cfg = resolve(f);
  // One record per slot at most, so the trace must cover the request.
  cfg.instance.rollout_slots = std::max(cfg.instance.rollout_slots, records);
  cfg.instance.horizon_reserve = std::max(cfg.instance.horizon_reserve, horizon);
  Instance inst = build_instance(cfg.instance, seed);
  ExportOptions opts;
  opts.horizon = horizon;
  opts.discount = discount;
  opts.target_records = records;
  std::string text;
  bool truncated = false;
  if (format == "sft") {
    auto r = generate_sft(inst, opts);
    text = to_jsonl(r);
    truncated = r.truncated;
  } else if (format == "grpo") {
    auto r = generate_grpo_states(inst, opts);
    text = to_jsonl(r);
    truncated = r.truncated;
  } else {
    throw ConfigError("--format must be sft or grpo");
  }
  fs::path path = output.empty() ? cfg.output_dir / (format + ".jsonl") : fs::path(output);
  write_file(path, text);
  AuditReport audit = audit_dataset_text(text);
  std::cout << path.string() << " records=" << audit.records
            << " invalid=" << audit.invalid
            << " full_cache_violations=" << audit.full_cache_violations
            << " noop_fraction=" << fixed(audit.noop_fraction, 4)
            << (truncated ? " truncated" : "") << "\n";
  return audit.invalid == 0 && audit.full_cache_violations == 0 ? 0 : 1;
}

int cmd_verify(const ConfigFlags& f, const std::string& suite, int pbrs_slots,
               long long fuzz_cases, int roundtrips, const std::string& dataset,
               const std::string& output) {
  RunConfig cfg = resolve(f);
  const bool all = suite == "all";
  nlohmann::json doc{{"schema", "coopcache.verify/v1"}};
  bool ok = true;
  auto line = [&](const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << " " << detail << "\n";
    ok = ok && pass;
  };
  if (all || suite == "pbrs") {
    nlohmann::json arr = nlohmann::json::array();
    int violations = 0;
    for (auto seed : cfg.seeds) {
      PbrsReport r = verify_pbrs(build_instance(cfg.instance, seed), pbrs_slots, cfg.reward);
      violations += r.total_violations();
      arr.push_back(to_json(r));
    }
    doc["pbrs"] = arr;
    line("pbrs", violations == 0, "violations=" + std::to_string(violations));
  }
  if (all || suite == "action-space") {
    nlohmann::json arr = nlohmann::json::array();
    long long violations = 0;
    for (auto seed : cfg.seeds) {
      ActionSpaceReport r = verify_action_space(build_instance(cfg.instance, seed));
      violations += r.violations;
      arr.push_back(to_json(r));
    }
    doc["action-space"] = arr;
    line("action-space", violations == 0, "violations=" + std::to_string(violations));
  }
  if (all || suite == "fuzz") {
    FuzzReport r = run_parser_fuzz(fuzz_cases, 1);
    RoundTripReport rt = run_roundtrips(roundtrips, 1);
    doc["fuzz"] = to_json(r);
    doc["roundtrip"] = to_json(rt);
    line("fuzz", r.ok(), "cases=" + std::to_string(r.cases) +
                             " panics=" + std::to_string(r.panics) +
                             " infeasible_valid=" + std::to_string(r.infeasible_valid));
    line("roundtrip", rt.ok(), "cases=" + std::to_string(rt.cases));
  }
  if (all || suite == "hit-oracle") {
    HitOracleReport r = check_hit_rate_oracle(200, 1);
    doc["hit_oracle"] = to_json(r);
    line("hit-oracle", r.ok(), "mismatches=" + std::to_string(r.mismatches));
  }
  if (!dataset.empty()) {
    AuditReport a = audit_dataset(dataset);
    doc["dataset"] = {{"path", dataset},
                      {"records", a.records},
                      {"invalid", a.invalid},
                      {"full_cache_violations", a.full_cache_violations},
                      {"noop_fraction", a.noop_fraction},
                      {"truncated", a.truncated}};
    line("dataset", a.invalid == 0 && a.full_cache_violations == 0,
         "records=" + std::to_string(a.records) + " invalid=" + std::to_string(a.invalid));
  }
  if (doc.size() == 1) throw ConfigError("unknown suite '" + suite + "'");
  fs::path path = output.empty() ? cfg.output_dir / "verify.json" : fs::path(output);
  write_file(path, doc.dump(2) + "\n");
  return ok ? 0 : 1;
}

int cmd_report(const std::string& in, const std::string& out) {
  auto reports = load_reports(in);
  fs::path dir = out.empty() ? fs::path(in) : fs::path(out);
  write_reports(reports, dir);
  std::cout << summary_csv(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-BS caching testbed"};
  app.require_subcommand(1);

  ConfigFlags gen_flags;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-instance", "generate and save a frozen instance");
  add_instance_flags(gen, gen_flags);
  gen->add_option("--seed", gen_seed, "instance seed");
  gen->add_option("-o,--output", gen_out, "instance file path");

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "evaluate policies on frozen instances");
  add_instance_flags(run, run_flags);
  add_run_flags(run, run_flags);

  ConfigFlags sweep_flags;
  std::string axis;
  std::string values;
  auto* sw = app.add_subcommand("sweep", "zero-shot parameter sweep");
  add_instance_flags(sw, sweep_flags);
  add_run_flags(sw, sweep_flags);
  sw->add_option("--axis", axis, "cache_capacity | library_size | zipf_alpha | users")->required();
  sw->add_option("--values", values, "comma-separated axis values")->required();

  ConfigFlags export_flags;
  std::uint64_t export_seed = 1;
  int records = 500;
  std::string format = "sft";
  int export_horizon = 10;
  double export_discount = 0.9;
  std::string export_out;
  auto* ex = app.add_subcommand("export-sft", "export expert demonstrations as JSONL");
  add_instance_flags(ex, export_flags);
  ex->add_option("--seed", export_seed, "instance seed");
  ex->add_option("--records", records, "target record count");
  ex->add_option("--format", format, "sft | grpo");
  ex->add_option("--horizon", export_horizon, "expert look-ahead horizon");
  ex->add_option("--expert-discount", export_discount, "expert discount");
  ex->add_option("-o,--output", export_out, "dataset path");

  ConfigFlags verify_flags;
  std::string suite = "all";
  int pbrs_slots = 20;
  long long fuzz_cases = 100000;
  int roundtrips = 1000;
  std::string dataset;
  std::string verify_out;
  auto* ver = app.add_subcommand("verify", "shaping, action-space and parser checks");
  add_instance_flags(ver, verify_flags);
  add_run_flags(ver, verify_flags);
  ver->add_option("--suite", suite, "all | pbrs | action-space | fuzz | hit-oracle")
      ->check(CLI::IsMember({"all", "pbrs", "action-space", "fuzz", "hit-oracle"}));
  ver->add_option("--pbrs-slots", pbrs_slots, "full-cache slots per seed");
  ver->add_option("--fuzz-cases", fuzz_cases, "parser fuzz inputs");
  ver->add_option("--roundtrips", roundtrips, "serialize/parse round-trips");
  ver->add_option("--dataset", dataset, "also audit this JSONL dataset");
  ver->add_option("-o,--output", verify_out, "structured report path");

  std::string report_in;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "re-emit tables from saved reports");
  rep->add_option("--in", report_in, "run output directory")->required();
  rep->add_option("--out", report_out, "destination directory (defaults to --in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; malformed flags count as configuration errors.
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (*gen) return cmd_gen_instance(gen_flags, gen_seed, gen_out);
    if (*run) return cmd_run(run_flags);
    if (*sw) return cmd_sweep(sweep_flags, axis, values);
    if (*ex) {
      return cmd_export(export_flags, export_seed, records, format, export_horizon,
                        export_discount, export_out);
    }
    if (*ver) {
      return cmd_verify(verify_flags, suite, pbrs_slots, fuzz_cases, roundtrips,
                        dataset, verify_out);
    }
    if (*rep) return cmd_report(report_in, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
