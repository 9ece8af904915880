#include "coopcache/instance_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace coopcache {

using nlohmann::json;

namespace {

json point_json(const Point& p) { return json::array({p.x, p.y}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw StructuralError("bad point");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw StructuralError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

json config_to_json(const InstanceConfig& c) {
  json positions = json::array();
  for (const auto& p : c.bs_positions) positions.push_back(point_json(p));
  return json{{"num_bs", c.num_bs},
              {"num_users", c.num_users},
              {"num_files", c.num_files},
              {"cache_capacity", c.cache_capacity},
              {"capacities", c.capacities},
              {"num_groups", c.num_groups},
              {"zipf_alpha", c.zipf_alpha},
              {"windows", c.windows},
              {"warmup_slots", c.warmup_slots},
              {"rollout_slots", c.rollout_slots},
              {"horizon_reserve", c.horizon_reserve},
              {"warmup_horizon", c.warmup_horizon},
              {"warmup_discount", c.warmup_discount},
              {"bs_positions", positions},
              {"coverage_radius", c.coverage_radius},
              {"require_overlap", c.require_overlap}};
}

InstanceConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"num_bs", "num_users", "num_files", "cache_capacity",
                  "capacities", "num_groups", "zipf_alpha", "windows",
                  "warmup_slots", "rollout_slots", "horizon_reserve",
                  "warmup_horizon", "warmup_discount", "bs_positions",
                  "coverage_radius", "require_overlap"},
                 "instance config");
  InstanceConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("num_bs", c.num_bs);
  get("num_users", c.num_users);
  get("num_files", c.num_files);
  get("cache_capacity", c.cache_capacity);
  get("capacities", c.capacities);
  get("num_groups", c.num_groups);
  get("zipf_alpha", c.zipf_alpha);
  get("windows", c.windows);
  get("warmup_slots", c.warmup_slots);
  get("rollout_slots", c.rollout_slots);
  get("horizon_reserve", c.horizon_reserve);
  get("warmup_horizon", c.warmup_horizon);
  get("warmup_discount", c.warmup_discount);
  get("coverage_radius", c.coverage_radius);
  get("require_overlap", c.require_overlap);
  if (j.contains("bs_positions")) {
    c.bs_positions.clear();
    for (const auto& p : j.at("bs_positions")) c.bs_positions.push_back(point_from(p));
  }
  return c;
}

json reward_to_json(const RewardConfig& r) {
  return json{{"horizon", r.horizon},       {"discount", r.discount},
              {"lambda_fmt", r.lambda_fmt}, {"lambda_opp", r.lambda_opp},
              {"clip_low", r.clip_low},     {"clip_high", r.clip_high},
              {"epsilon", r.epsilon}};
}

RewardConfig reward_from_json(const json& j) {
  reject_unknown(j,
                 {"horizon", "discount", "lambda_fmt", "lambda_opp", "clip_low",
                  "clip_high", "epsilon"},
                 "reward config");
  RewardConfig r;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("horizon", r.horizon);
  get("discount", r.discount);
  get("lambda_fmt", r.lambda_fmt);
  get("lambda_opp", r.lambda_opp);
  get("clip_low", r.clip_low);
  get("clip_high", r.clip_high);
  get("epsilon", r.epsilon);
  return r;
}

json instance_to_json(const Instance& inst) {
  json users = json::array();
  for (const auto& p : inst.graph.user_positions) users.push_back(point_json(p));
  json bss = json::array();
  for (const auto& p : inst.graph.bs_positions) bss.push_back(point_json(p));
  return json{
      {"schema", kInstanceSchema},
      {"seed", inst.seed},
      {"config", config_to_json(inst.config)},
      {"graph",
       {{"bs_positions", bss},
        {"user_positions", users},
        {"radius", inst.graph.radius},
        {"covering", inst.graph.covering}}},
      {"demand",
       {{"permutations", inst.demand.permutations},
        {"user_group", inst.demand.user_group},
        {"rank_pmf", inst.demand.rank_pmf}}},
      {"trace", inst.trace}};
}

Instance instance_from_json(const json& j) {
  if (!j.is_object() || j.value("schema", std::string{}) != kInstanceSchema) {
    throw StructuralError(std::string("instance file must carry schema '") +
                          kInstanceSchema + "'");
  }
  try {
    Instance inst;
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.config = config_from_json(j.at("config"));
    const json& g = j.at("graph");
    for (const auto& p : g.at("bs_positions")) {
      inst.graph.bs_positions.push_back(point_from(p));
    }
    for (const auto& p : g.at("user_positions")) {
      inst.graph.user_positions.push_back(point_from(p));
    }
    inst.graph.radius = g.at("radius").get<double>();
    g.at("covering").get_to(inst.graph.covering);
    const json& d = j.at("demand");
    d.at("permutations").get_to(inst.demand.permutations);
    d.at("user_group").get_to(inst.demand.user_group);
    d.at("rank_pmf").get_to(inst.demand.rank_pmf);
    j.at("trace").get_to(inst.trace);

    const InstanceConfig& c = inst.config;
    if (inst.graph.num_bs() != c.num_bs ||
        inst.graph.num_users() != c.num_users ||
        static_cast<int>(inst.graph.user_positions.size()) != c.num_users ||
        static_cast<int>(inst.demand.user_group.size()) != c.num_users ||
        inst.demand.num_groups() != c.num_groups ||
        static_cast<int>(inst.demand.rank_pmf.size()) != c.num_files ||
        inst.trace_length() != c.trace_length()) {
      throw StructuralError("instance file dimensions are inconsistent");
    }
    for (const auto& cover : inst.graph.covering) {
      for (int b : cover) {
        if (b < 0 || b >= c.num_bs) throw StructuralError("bad covering set");
      }
    }
    for (const auto& slot : inst.trace) {
      if (static_cast<int>(slot.size()) != c.num_users) {
        throw StructuralError("trace slot has the wrong user count");
      }
      for (FileId f : slot) {
        if (f < 1 || f > c.num_files) throw StructuralError("trace file out of range");
      }
    }
    inst.rebuild_slots();
    return inst;
  } catch (const json::exception& e) {
    throw StructuralError(std::string("malformed instance file: ") + e.what());
  }
}

std::string dump_instance(const Instance& instance) {
  return instance_to_json(instance).dump() + "\n";
}

Instance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("instance file is not JSON: ") + e.what());
  }
  return instance_from_json(j);
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  write_file(path, dump_instance(instance));
}

Instance load_instance(const std::filesystem::path& path) {
  return parse_instance(read_file(path));
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string instance_hash(const Instance& instance) {
  return fnv1a_hex(dump_instance(instance));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << bytes;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace coopcache
