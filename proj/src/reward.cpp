#include "coopcache/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace coopcache {

void RewardConfig::validate() const {
  if (!(lambda_fmt < 0.0)) throw ConfigError("lambda_fmt must be < 0");
  if (!(lambda_opp < 0.0)) throw ConfigError("lambda_opp must be < 0");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw ConfigError("discount must be in (0, 1]");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(clip_low < clip_high)) throw ConfigError("clip bounds are reversed");
}

const char* to_string(ActionClass c) {
  switch (c) {
    case ActionClass::kValidWrite: return "valid-write";
    case ActionClass::kValidNoop: return "valid-noop";
    case ActionClass::kInvalid: return "invalid";
  }
  return "unknown";
}

double lookahead_value(const CacheState& cache, LookaheadWindow peek,
                       const AssociationGraph& graph, int horizon,
                       double discount) {
  if (horizon < 1) throw StructuralError("horizon must be >= 1");
  if (static_cast<int>(peek.size()) < horizon) {
    throw StructuralError("look-ahead window shorter than the horizon");
  }
  double weighted = 0.0;
  double norm = 0.0;
  double w = 1.0;
  for (int k = 0; k < horizon; ++k) {
    weighted += w * hit_rate(cache, peek[k], graph);
    norm += w;
    w *= discount;
  }
  return weighted / norm;
}

double delta_perf(const CacheState& before, const CacheState& after,
                  LookaheadWindow peek, const AssociationGraph& graph,
                  const RewardConfig& cfg) {
  if (!check_transition(before, after)) {
    throw StructuralError("delta_perf: illegal cache transition");
  }
  if (before == after) {
    // Still validates the window so a short peek is reported consistently.
    lookahead_value(before, peek, graph, cfg.horizon, cfg.discount);
    return 0.0;
  }
  return lookahead_value(after, peek, graph, cfg.horizon, cfg.discount) -
         lookahead_value(before, peek, graph, cfg.horizon, cfg.discount);
}

RewardBreakdown score_completion(std::string_view text,
                                 const SlotObservation& obs,
                                 LookaheadWindow peek,
                                 const AssociationGraph& graph,
                                 const JointAction& expert,
                                 const RewardConfig& cfg) {
  RewardBreakdown out;
  out.expert_witness = expert.is_valid() && !expert.is_all_noop();
  JointAction action = parse(text, obs);
  if (!action.is_valid()) {
    out.classification = ActionClass::kInvalid;
    out.invalid_reason = action.invalid_info().reason;
    out.delta_perf = 0.0;
    out.penalty = cfg.lambda_fmt;
  } else {
    CacheState after = apply(obs.cache, action, obs.requests);
    out.delta_perf = delta_perf(obs.cache, after, peek, graph, cfg);
    if (action.is_all_noop()) {
      out.classification = ActionClass::kValidNoop;
      out.penalty = out.expert_witness ? cfg.lambda_opp : 0.0;
    } else {
      out.classification = ActionClass::kValidWrite;
      out.penalty = 0.0;
    }
  }
  out.total = std::clamp(out.delta_perf + out.penalty, cfg.clip_low,
                         cfg.clip_high);
  return out;
}

std::vector<double> group_advantage(std::span<const double> rewards,
                                    double epsilon) {
  if (rewards.empty()) return {};
  const auto m = static_cast<double>(rewards.size());
  double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / m;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  double sd = std::sqrt(ss / m);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / (sd + epsilon));
  return out;
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b, bool& overflow) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    overflow = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

}  // namespace

JointSpaceSize joint_space_size(std::span<const long long> factors) {
  JointSpaceSize out;
  out.factors.assign(factors.begin(), factors.end());
  out.bound_applicable = !factors.empty();
  for (long long f : factors) {
    if (f < 0) throw StructuralError("negative action-set size");
    out.product = saturating_mul(out.product, static_cast<std::uint64_t>(f),
                                 out.overflow);
    if (f < 2) out.bound_applicable = false;
  }
  if (out.bound_applicable) {
    const auto b = factors.size();
    // 2^B; any saturated product already exceeds it.
    out.bound_holds = out.overflow || b >= 64 || out.product >= (1ULL << b);
  }
  return out;
}

JointSpaceSize joint_space_size(const SlotObservation& obs) {
  std::vector<long long> factors;
  std::vector<long long> nominal;
  for (int b = 0; b < obs.num_bs(); ++b) {
    factors.push_back(static_cast<long long>(
        feasible_actions(obs.cache, b, obs.requests).size()));
    nominal.push_back(nominal_action_count(obs.cache, b, obs.requests));
  }
  JointSpaceSize out = joint_space_size(factors);
  out.nominal_factors = nominal;
  bool nominal_overflow = false;
  for (long long f : nominal) {
    out.nominal_product = saturating_mul(
        out.nominal_product, static_cast<std::uint64_t>(f), nominal_overflow);
  }
  return out;
}

}  // namespace coopcache
