#pragma once

// Randomized and exhaustive self-checks shared by the CLI `verify`
// subcommand and the acceptance binary.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopcache/reward.hpp"
#include "coopcache/traffic.hpp"

namespace coopcache {

struct FuzzReport {
  long long cases = 0;
  long long random_byte_cases = 0;
  long long mutated_cases = 0;
  long long valid = 0;    // parsed Valid (then re-checked against the rules)
  long long panics = 0;   // parse threw
  long long infeasible_valid = 0;
  std::vector<std::string> examples;  // first few offending inputs

  bool ok() const { return panics == 0 && infeasible_valid == 0; }
};

// Feeds `cases` inputs to the parser: random byte strings, and mutated
// golden completions and prompts drawn from expert trajectories.
FuzzReport run_parser_fuzz(long long cases, std::uint64_t seed);

struct RoundTripReport {
  int cases = 0;
  int action_mismatches = 0;
  int prompt_mismatches = 0;
  bool ok() const { return action_mismatches == 0 && prompt_mismatches == 0; }
};

// Random feasible joint actions: parse(serialize(a)) == a. Also checks that
// decode_prompt(encode(s)) restores the cache and request counts.
RoundTripReport run_roundtrips(int cases, std::uint64_t seed);

struct HitOracleReport {
  int instances = 0;
  long long states = 0;
  int mismatches = 0;
  bool ok() const { return mismatches == 0; }
};

// Small random topologies (B <= 3, F <= 10, U <= 8) and caches: hit_count and
// hit_rate against a direct per-user scan of every covering BS.
HitOracleReport check_hit_rate_oracle(int instances, std::uint64_t seed);

struct ActionSpaceReport {
  long long slots = 0;
  long long applicable = 0;  // every per-BS factor >= 2
  long long violations = 0;
  long long nominal_differs = 0;  // enumeration count != C*|R|+1 somewhere
  bool ok() const { return violations == 0; }
};

// Walks the one-step oracle trajectory for the instance's rollout slots and
// checks the joint action-space lower bound at every slot.
ActionSpaceReport verify_action_space(const Instance& instance);

nlohmann::json to_json(const FuzzReport& r);
nlohmann::json to_json(const RoundTripReport& r);
nlohmann::json to_json(const HitOracleReport& r);
nlohmann::json to_json(const ActionSpaceReport& r);
nlohmann::json to_json(const PbrsReport& r);

}  // namespace coopcache
