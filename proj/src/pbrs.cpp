#include <algorithm>
#include <cmath>

#include "coopcache/policies.hpp"
#include "coopcache/reward.hpp"

namespace coopcache {

namespace {

constexpr double kTol = 1e-12;
constexpr std::size_t kMaxRecordedViolations = 20;

int compare(double a, double b) {
  if (a > b + kTol) return 1;
  if (a < b - kTol) return -1;
  return 0;
}

void record(PbrsReport& report, int slot, int bs, const char* check,
            std::string detail) {
  if (report.violations.size() < kMaxRecordedViolations) {
    report.violations.push_back({slot, bs, check, std::move(detail)});
  }
}

}  // namespace

void verify_pbrs_slot(const SlotObservation& obs, LookaheadWindow peek,
                      const AssociationGraph& graph, const JointAction& expert,
                      const RewardConfig& cfg, PbrsReport& report) {
  const bool witness = expert.is_valid() && !expert.is_all_noop();
  report.strict_demotion_applicable = cfg.lambda_opp < 0.0;
  for (int b = 0; b < obs.num_bs(); ++b) {
    auto actions = feasible_actions(obs.cache, b, obs.requests);
    std::vector<double> gain;
    std::vector<double> potential;
    std::vector<double> shaped;
    for (const auto& a : actions) {
      CacheState after = apply(obs.cache, b, a, obs.requests);
      gain.push_back(delta_perf(obs.cache, after, peek, graph, cfg));
      potential.push_back(
          lookahead_value(after, peek, graph, cfg.horizon, cfg.discount));
      double penalty = (is_noop(a) && witness) ? cfg.lambda_opp : 0.0;
      shaped.push_back(gain.back() + penalty);
    }
    report.actions_checked += static_cast<long long>(actions.size());

    // (i) argmax of the gain and of the post-action potential coincide.
    double best_gain = *std::max_element(gain.begin(), gain.end());
    double best_pot = *std::max_element(potential.begin(), potential.end());
    for (std::size_t i = 0; i < actions.size(); ++i) {
      bool in_gain = compare(gain[i], best_gain) == 0;
      bool in_pot = compare(potential[i], best_pot) == 0;
      if (in_gain != in_pot) {
        ++report.argmax_violations;
        record(report, obs.t, b, "argmax",
               serialize_line(b, actions[i]) + " is in only one argmax set");
      }
    }

    // (ii) shaped reward orders writes exactly as the gain does.
    for (std::size_t i = 1; i < actions.size(); ++i) {
      for (std::size_t j = i + 1; j < actions.size(); ++j) {
        ++report.write_pairs_checked;
        if (compare(shaped[i], shaped[j]) != compare(gain[i], gain[j])) {
          ++report.order_violations;
          record(report, obs.t, b, "order",
                 serialize_line(b, actions[i]) + " vs " +
                     serialize_line(b, actions[j]));
        }
      }
    }

    // (iii) with a witness, any positive-gain write strictly beats NoOp and
    // NoOp itself is pushed below zero.
    if (!witness) continue;
    bool counted = false;
    for (std::size_t i = 1; i < actions.size(); ++i) {
      if (compare(gain[i], 0.0) <= 0) continue;
      if (!counted) {
        ++report.demotion_cases;
        counted = true;
      }
      if (!(shaped[i] > 0.0 && shaped[0] < 0.0 && shaped[i] > shaped[0])) {
        ++report.demotion_violations;
        record(report, obs.t, b, "demotion",
               serialize_line(b, actions[i]) + " shaped=" +
                   std::to_string(shaped[i]) +
                   " noop shaped=" + std::to_string(shaped[0]));
      }
    }
  }
}

PbrsReport verify_pbrs(const Instance& instance, int sample_slots,
                       const RewardConfig& cfg) {
  PbrsReport report;
  report.seed = instance.seed;
  report.strict_demotion_applicable = cfg.lambda_opp < 0.0;
  WarmStart ws = warm_start(instance);
  CacheState cache = ws.cache;
  int t = ws.next_slot;
  while (report.slots_checked < sample_slots &&
         t + cfg.horizon <= instance.trace_length()) {
    const RequestSlot& requests = instance.slot(t);
    ws.tracker.advance(requests);
    SlotObservation obs = SlotObservation::build(t, cache, requests, ws.tracker);
    LookaheadWindow peek = instance.lookahead(t, cfg.horizon);
    JointAction expert = lookahead_oracle_action(obs, peek, instance.graph,
                                                 cfg.horizon, cfg.discount);
    if (cache.all_full()) {
      verify_pbrs_slot(obs, peek, instance.graph, expert, cfg, report);
      ++report.slots_checked;
    }
    cache = apply(cache, expert, requests);
    ++t;
  }
  return report;
}

}  // namespace coopcache
