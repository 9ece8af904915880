#pragma once

// Look-ahead value, delta-weighted gain, opportunity-aware penalties, the
// clipped completion reward and group-relative advantages, plus executable
// checks of the shaping guarantees and of joint action-space growth.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coopcache/core.hpp"
#include "coopcache/interface.hpp"
#include "coopcache/traffic.hpp"

namespace coopcache {

struct RewardConfig {
  int horizon = 10;
  double discount = 0.9;
  double lambda_fmt = -1.0;
  double lambda_opp = -0.2;
  double clip_low = -1.0;
  double clip_high = 1.0;
  double epsilon = 1e-4;

  // Throws ConfigError unless lambda_fmt < 0, lambda_opp < 0, horizon >= 1,
  // 0 < discount <= 1, epsilon > 0 and clip_low < clip_high.
  void validate() const;
  bool operator==(const RewardConfig&) const = default;
};

enum class ActionClass { kValidWrite, kValidNoop, kInvalid };

const char* to_string(ActionClass c);

struct RewardBreakdown {
  double delta_perf = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  ActionClass classification = ActionClass::kInvalid;
  // The expert joint action contains at least one write.
  bool expert_witness = false;
  std::optional<InvalidReason> invalid_reason;
};

// Normalized discounted mean of hit rates of `cache` over the first `horizon`
// slots of `peek`. Throws StructuralError if peek is shorter than horizon.
double lookahead_value(const CacheState& cache, LookaheadWindow peek,
                       const AssociationGraph& graph, int horizon,
                       double discount);

// lookahead_value(after) - lookahead_value(before). Throws StructuralError
// if before -> after is not a legal single-swap transition.
double delta_perf(const CacheState& before, const CacheState& after,
                  LookaheadWindow peek, const AssociationGraph& graph,
                  const RewardConfig& cfg);

RewardBreakdown score_completion(std::string_view text,
                                 const SlotObservation& obs,
                                 LookaheadWindow peek,
                                 const AssociationGraph& graph,
                                 const JointAction& expert,
                                 const RewardConfig& cfg);

// (R_i - mean) / (std + eps) with the population standard deviation.
std::vector<double> group_advantage(std::span<const double> rewards,
                                    double epsilon);

struct PbrsViolation {
  int slot = 0;
  int bs = 0;  // 0-based
  std::string check;  // "argmax" | "order" | "demotion"
  std::string detail;
};

struct PbrsReport {
  std::uint64_t seed = 0;
  int slots_checked = 0;
  long long actions_checked = 0;
  long long write_pairs_checked = 0;
  // Slots x BSs where a positive-gain write existed under a non-NoOp expert.
  int demotion_cases = 0;
  // False when lambda_opp >= 0, in which case strict demotion cannot hold.
  bool strict_demotion_applicable = true;
  int argmax_violations = 0;
  int order_violations = 0;
  int demotion_violations = 0;
  std::vector<PbrsViolation> violations;  // first few, for diagnostics

  int total_violations() const {
    return argmax_violations + order_violations + demotion_violations;
  }
};

// Exhaustively checks, for every BS at `sample_slots` full-cache slots along
// the expert trajectory after warm-up:
//   (i)   argmax of the gain equals argmax of the post-action potential;
//   (ii)  shaped rewards rank writes exactly as their gains do;
//   (iii) with a non-NoOp expert and a positive-gain write w,
//         shaped(w) > 0 > shaped(NoOp).
// Shaped reward is the unclipped gain plus the opportunity penalty.
PbrsReport verify_pbrs(const Instance& instance, int sample_slots,
                       const RewardConfig& cfg);

// Same checks on a single prepared state.
void verify_pbrs_slot(const SlotObservation& obs, LookaheadWindow peek,
                      const AssociationGraph& graph, const JointAction& expert,
                      const RewardConfig& cfg, PbrsReport& report);

struct JointSpaceSize {
  std::vector<long long> factors;          // |A_b| from the enumeration
  std::vector<long long> nominal_factors;  // C_b * |R_b| + 1
  // Product of factors; saturates at UINT64_MAX with overflow set.
  std::uint64_t product = 1;
  std::uint64_t nominal_product = 1;
  bool overflow = false;
  // Every factor >= 2, so the 2^B lower bound is claimed.
  bool bound_applicable = false;
  bool bound_holds = true;
};

JointSpaceSize joint_space_size(const SlotObservation& obs);
JointSpaceSize joint_space_size(std::span<const long long> factors);

}  // namespace coopcache
