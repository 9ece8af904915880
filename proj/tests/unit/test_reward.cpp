#include <doctest.h>

#include "coopcache/policies.hpp"
#include "coopcache/reward.hpp"
#include "helpers.hpp"

using namespace coopcache;
using coopcache::testing::graph_of;

namespace {

// Two users on one BS; `hits` of them request file 1 (cached), the rest 9.
RequestSlot slot_with_hits(const AssociationGraph& g, int hits, int users) {
  std::vector<FileId> files;
  for (int u = 0; u < users; ++u) files.push_back(u < hits ? 1 : 9);
  return RequestSlot(files, g);
}

SlotObservation observe(const CacheState& cache, const RequestSlot& q) {
  FrequencyTracker tr(q.num_bs(), cache.num_files(), {10});
  tr.advance(q);
  return SlotObservation::build(1, cache, q, tr);
}

}  // namespace

TEST_CASE("look-ahead value is a normalized discounted mean") {
  std::vector<std::vector<int>> cover(10, std::vector<int>{0});
  auto g = graph_of(1, cover);
  auto cache = CacheState::from_slots(10, {{1}});
  {
    std::vector<RequestSlot> peek{slot_with_hits(g, 5, 10), slot_with_hits(g, 7, 10)};
    CHECK(lookahead_value(cache, peek, g, 2, 1.0) == doctest::Approx(0.6).epsilon(1e-15));
  }
  {
    std::vector<RequestSlot> peek{slot_with_hits(g, 10, 10), slot_with_hits(g, 0, 10),
                                  slot_with_hits(g, 0, 10)};
    CHECK(lookahead_value(cache, peek, g, 3, 0.5) ==
          doctest::Approx(0.5714285714285714).epsilon(1e-15));
    CHECK(lookahead_value(cache, peek, g, 1, 0.5) == hit_rate(cache, peek[0], g));
    CHECK_THROWS_AS(lookahead_value(cache, peek, g, 4, 0.5), StructuralError);
  }
}

TEST_CASE("delta_perf") {
  auto g = graph_of(1, {{0}, {0}});
  std::vector<RequestSlot> peek{RequestSlot({4, 4}, g), RequestSlot({4, 4}, g)};
  RewardConfig cfg;
  cfg.horizon = 2;
  auto before = CacheState::from_slots(10, {{1, 2}});
  CHECK(delta_perf(before, before, peek, g, cfg) == 0.0);
  auto after = CacheState::from_slots(10, {{4, 2}});
  const double v0 = lookahead_value(before, peek, g, 2, cfg.discount);
  CHECK(delta_perf(before, after, peek, g, cfg) == doctest::Approx(1.0 - v0));
  CHECK(delta_perf(after, before, peek, g, cfg) < 0.0);
  auto jump = CacheState::from_slots(10, {{4, 5}});
  CHECK_THROWS_AS(delta_perf(before, jump, peek, g, cfg), StructuralError);
}

TEST_CASE("completion scoring branches") {
  auto g = graph_of(1, {{0}, {0}});
  RequestSlot now({4, 4}, g);
  std::vector<RequestSlot> peek(10, RequestSlot({4, 4}, g));
  auto cache = CacheState::from_slots(10, {{1, 2}});
  auto obs = observe(cache, now);
  RewardConfig cfg;
  auto expert_swap = JointAction::valid({Replace{1, 4, 1}});
  auto expert_noop = JointAction::all_noop(1);

  auto garbage = score_completion("lol", obs, peek, g, expert_swap, cfg);
  CHECK(garbage.total == -1.0);
  CHECK(garbage.classification == ActionClass::kInvalid);
  CHECK(garbage.invalid_reason == InvalidReason::kSyntax);

  auto missed = score_completion("BS 1: NOOP", obs, peek, g, expert_swap, cfg);
  CHECK(missed.delta_perf == 0.0);
  CHECK(missed.total == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(missed.expert_witness);

  auto idle = score_completion("BS 1: NOOP", obs, peek, g, expert_noop, cfg);
  CHECK(idle.total == 0.0);
  CHECK(idle.penalty == 0.0);

  auto write = score_completion("BS 1: SWAP slot=2 out=2 in=4", obs, peek, g, expert_swap, cfg);
  CHECK(write.classification == ActionClass::kValidWrite);
  CHECK(write.penalty == 0.0);
  CHECK(write.total == doctest::Approx(1.0));
}

TEST_CASE("a write worth 0.05 is rewarded 0.05") {
  std::vector<std::vector<int>> cover(20, std::vector<int>{0});
  auto g = graph_of(1, cover);
  std::vector<FileId> users(20, 9);
  users[0] = 4;  // one of twenty users requests 4 in the peeked slot
  RequestSlot now(users, g);
  std::vector<RequestSlot> peek{RequestSlot(users, g)};
  auto obs = observe(CacheState::from_slots(10, {{1, 9}}), now);
  RewardConfig cfg;
  cfg.horizon = 1;
  auto r = score_completion("BS 1: SWAP slot=1 out=1 in=4", obs, peek, g,
                            JointAction::all_noop(1), cfg);
  CHECK(r.delta_perf == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(r.total == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(r.penalty == 0.0);
}

TEST_CASE("group advantage") {
  std::vector<double> flat{0.5, 0.5, 0.5};
  for (double a : group_advantage(flat, 1e-4)) CHECK(a == 0.0);
  std::vector<double> pair{1.0, -1.0};
  auto adv = group_advantage(pair, 1e-4);
  CHECK(adv[0] == doctest::Approx(0.9999000099990001).epsilon(1e-15));
  CHECK(adv[1] == doctest::Approx(-0.9999000099990001).epsilon(1e-15));
  std::vector<double> one{0.3};
  CHECK(group_advantage(one, 1e-4) == std::vector<double>{0.0});
}

TEST_CASE("reward configuration validation") {
  RewardConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lambda_opp = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RewardConfig{};
  cfg.discount = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("shaping checks on a random two-BS instance") {
  Instance inst = build_instance(InstanceConfig::two_bs(), 11);
  PbrsReport r = verify_pbrs(inst, 20, RewardConfig{});
  CHECK(r.slots_checked == 20);
  CHECK(r.total_violations() == 0);
  CHECK(r.demotion_cases > 0);
}

TEST_CASE("NoOp expert leaves NoOp unpenalized and optimal") {
  auto g = graph_of(1, {{0}, {0}});
  RequestSlot now({3, 4}, g);
  std::vector<RequestSlot> peek(10, RequestSlot({1, 2}, g));
  auto obs = observe(CacheState::from_slots(10, {{1, 2}}), now);
  RewardConfig cfg;
  auto expert = lookahead_oracle_action(obs, peek, g, cfg.horizon, cfg.discount);
  REQUIRE(expert.is_all_noop());
  PbrsReport report;
  verify_pbrs_slot(obs, peek, g, expert, cfg, report);
  CHECK(report.total_violations() == 0);
  CHECK(report.demotion_cases == 0);
  auto r = score_completion("BS 1: NOOP", obs, peek, g, expert, cfg);
  CHECK(r.total == 0.0);
}

TEST_CASE("zero opportunity penalty cannot demote strictly") {
  auto g = graph_of(1, {{0}, {0}});
  RequestSlot now({4, 4}, g);
  std::vector<RequestSlot> peek(10, RequestSlot({4, 4}, g));
  auto obs = observe(CacheState::from_slots(10, {{1, 2}}), now);
  RewardConfig cfg;
  cfg.lambda_opp = 0.0;
  PbrsReport report;
  verify_pbrs_slot(obs, peek, g, JointAction::valid({Replace{1, 4, 1}}), cfg, report);
  CHECK_FALSE(report.strict_demotion_applicable);
  CHECK(report.demotion_violations > 0);
}

TEST_CASE("joint action-space size") {
  std::vector<long long> five(5, 41);
  auto s = joint_space_size(five);
  CHECK(s.product == 115856201ULL);
  CHECK(s.bound_applicable);
  CHECK(s.bound_holds);
  std::vector<long long> tight{2, 2, 2};
  auto t = joint_space_size(tight);
  CHECK(t.product == 8);
  CHECK(t.bound_holds);
  std::vector<long long> stuck{41, 1, 41};
  CHECK_FALSE(joint_space_size(stuck).bound_applicable);
  std::vector<long long> huge(20, 1000);
  auto h = joint_space_size(huge);
  CHECK(h.overflow);
  CHECK(h.bound_holds);
}

TEST_CASE("joint space from an observation counts both ways") {
  std::vector<std::vector<int>> cover(5, std::vector<int>{0});
  auto g = graph_of(1, cover);
  RequestSlot now({11, 12, 13, 14, 3}, g);
  std::vector<FileId> row;
  for (int f = 1; f <= 10; ++f) row.push_back(f);
  auto obs = observe(CacheState::from_slots(20, {row}), now);
  auto s = joint_space_size(obs);
  CHECK(s.factors == std::vector<long long>{41});
  CHECK(s.nominal_factors == std::vector<long long>{51});
}
