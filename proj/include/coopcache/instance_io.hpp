#pragma once

// Instance file: a single JSON document with sorted keys and a schema tag,
// holding every parameter, coordinate, group table and the full trace.
// save(load(text)) reproduces text byte for byte.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "coopcache/reward.hpp"
#include "coopcache/traffic.hpp"

namespace coopcache {

inline constexpr const char* kInstanceSchema = "coopcache.instance/v1";

nlohmann::json config_to_json(const InstanceConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
InstanceConfig config_from_json(const nlohmann::json& j);

nlohmann::json reward_to_json(const RewardConfig& cfg);
RewardConfig reward_from_json(const nlohmann::json& j);

nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

// Canonical text: compact JSON plus a trailing newline.
std::string dump_instance(const Instance& instance);
Instance parse_instance(const std::string& text);

void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

// FNV-1a 64 over the canonical text, as 16 lowercase hex digits.
std::string instance_hash(const Instance& instance);
std::string fnv1a_hex(const std::string& bytes);

// Whole-file helpers shared by the writers.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace coopcache
