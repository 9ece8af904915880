#include <doctest.h>

#include <random>

#include "coopcache/policies.hpp"
#include "coopcache/reward.hpp"
#include "helpers.hpp"

using namespace coopcache;
using coopcache::testing::graph_of;

namespace {

SlotObservation observe(int t, const CacheState& cache, const RequestSlot& q) {
  FrequencyTracker tr(q.num_bs(), cache.num_files(), {10});
  tr.advance(q);
  SlotObservation obs = SlotObservation::build(1, cache, q, tr);
  obs.t = t;
  return obs;
}

// Slot-by-slot per-user hit count, written without the library helpers.
double brute_value(const std::vector<std::vector<FileId>>& rows,
                   const std::vector<std::vector<FileId>>& future,
                   const AssociationGraph& g, double discount) {
  double num = 0.0;
  double den = 0.0;
  double w = 1.0;
  for (const auto& users : future) {
    int hits = 0;
    for (std::size_t u = 0; u < users.size(); ++u) {
      bool hit = false;
      for (int b : g.covering[u]) {
        hit = hit || std::find(rows[b].begin(), rows[b].end(), users[u]) != rows[b].end();
      }
      hits += hit;
    }
    num += w * hits / static_cast<double>(users.size());
    den += w;
    w *= discount;
  }
  return num / den;
}

}  // namespace

TEST_CASE("LRU evicts the least recently requested file") {
  auto g = graph_of(1, {{0}});
  PolicyBooks books(1, 10);
  books.observe(5, RequestSlot({1}, g));
  books.observe(9, RequestSlot({2}, g));
  RequestSlot q({3}, g);
  books.observe(10, q);
  auto obs = observe(10, CacheState::from_slots(10, {{1, 2}}), q);
  CHECK(lru_decide(obs, books) == "BS 1: SWAP slot=1 out=1 in=3\n");
}

TEST_CASE("heuristics NOOP when every request is cached or the cache has room") {
  auto g = graph_of(1, {{0}, {0}});
  PolicyBooks books(1, 10);
  RequestSlot q({1, 2}, g);
  books.observe(1, q);
  auto obs = observe(1, CacheState::from_slots(10, {{1, 2}}), q);
  CHECK(lru_decide(obs, books) == "BS 1: NOOP\n");
  CHECK(lfu_decide(obs, books) == "BS 1: NOOP\n");
  CHECK(fifo_decide(obs, books) == "BS 1: NOOP\n");
  RequestSlot q2({5, 5}, g);
  auto roomy = observe(1, CacheState::from_slots(10, {{1, kEmptySlot}}), q2);
  CHECK(lru_decide(roomy, books) == "BS 1: NOOP\n");
}

TEST_CASE("ties on the eviction key go to the lower file id") {
  auto g = graph_of(1, {{0}, {0}, {0}, {0}});
  PolicyBooks books(1, 10);
  // 7 and 4 share last access and count; both were inserted at slot 2.
  books.observe(3, RequestSlot({7, 4, 7, 4}, g));
  auto empty = CacheState(10, {2});
  auto filled = CacheState::from_slots(10, {{7, 4}});
  books.record_transition(2, empty, filled);
  RequestSlot q({9, 8, 8, 9}, g);
  auto obs = observe(4, filled, q);
  // Candidate: 8 and 9 both twice, lower id 8 wins; victim 4 sits in slot 2.
  CHECK(lru_decide(obs, books) == "BS 1: SWAP slot=2 out=4 in=8\n");
  CHECK(lfu_decide(obs, books) == "BS 1: SWAP slot=2 out=4 in=8\n");
  CHECK(fifo_decide(obs, books) == "BS 1: SWAP slot=2 out=4 in=8\n");
}

TEST_CASE("LFU and FIFO keys") {
  auto g = graph_of(1, {{0}});
  PolicyBooks books(1, 10);
  auto empty = CacheState(10, {2});
  auto a = CacheState::from_slots(10, {{1, kEmptySlot}});
  auto b = CacheState::from_slots(10, {{1, 2}});
  books.record_transition(1, empty, a);
  books.record_transition(2, a, b);
  for (int t = 3; t < 6; ++t) books.observe(t, RequestSlot({1}, g));
  books.observe(6, RequestSlot({2}, g));
  RequestSlot q({3}, g);
  books.observe(7, q);
  auto obs = observe(7, b, q);
  CHECK(books.frequency(0, 1) == 3);
  CHECK(books.inserted_at(0, 2) == 2);
  CHECK(lfu_decide(obs, books) == "BS 1: SWAP slot=2 out=2 in=3\n");
  CHECK(fifo_decide(obs, books) == "BS 1: SWAP slot=1 out=1 in=3\n");
  CHECK(lru_decide(obs, books) == "BS 1: SWAP slot=1 out=1 in=3\n");
}

TEST_CASE("one-step oracle inserts the next requested file") {
  auto g = graph_of(1, {{0}});
  RequestSlot now({5}, g);
  std::vector<RequestSlot> peek{RequestSlot({5}, g)};
  auto cache = CacheState::from_slots(10, {{1, 2}});
  auto obs = observe(1, cache, now);
  auto act = oracle_bs_action(cache, 0, now, peek, g, 1, 0.9);
  CHECK(act == BsAction{Replace{1, 5, 1}});
  CHECK(lookahead_oracle(obs, peek, g, 1, 0.9) == "BS 1: SWAP slot=1 out=1 in=5\n");
}

TEST_CASE("oracle prefers NoOp when nothing improves the look-ahead value") {
  auto g = graph_of(1, {{0}, {0}});
  RequestSlot now({3, 4}, g);
  std::vector<RequestSlot> peek{RequestSlot({1, 2}, g), RequestSlot({2, 1}, g)};
  auto cache = CacheState::from_slots(10, {{1, 2}});
  CHECK(is_noop(oracle_bs_action(cache, 0, now, peek, g, 2, 0.9)));
  CHECK_THROWS_AS(oracle_bs_action(cache, 0, now, peek, g, 3, 0.9), StructuralError);
}

TEST_CASE("oracle attains the per-BS maximum on random small instances") {
  std::mt19937_64 rng(5);
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % (hi - lo + 1)); };
  for (int n = 0; n < 150; ++n) {
    const int num_bs = pick(1, 3);
    const int num_files = pick(3, 8);
    const int num_users = pick(1, 6);
    const int cap = pick(1, std::min(3, num_files - 1));
    const int horizon = pick(1, 3);
    std::vector<std::vector<int>> covering;
    for (int u = 0; u < num_users; ++u) {
      std::vector<int> c;
      for (int b = 0; b < num_bs; ++b) {
        if (rng() % 2) c.push_back(b);
      }
      if (c.empty()) c.push_back(pick(0, num_bs - 1));
      covering.push_back(c);
    }
    auto g = graph_of(num_bs, covering);
    std::vector<std::vector<FileId>> rows(num_bs);
    for (auto& row : rows) {
      std::vector<FileId> files;
      for (int f = 1; f <= num_files; ++f) files.push_back(f);
      std::shuffle(files.begin(), files.end(), rng);
      row.assign(files.begin(), files.begin() + cap);
    }
    auto draw = [&] {
      std::vector<FileId> users;
      for (int u = 0; u < num_users; ++u) users.push_back(pick(1, num_files));
      return users;
    };
    auto now_users = draw();
    RequestSlot now(now_users, g);
    std::vector<std::vector<FileId>> future_users;
    std::vector<RequestSlot> peek;
    for (int h = 0; h < horizon; ++h) {
      future_users.push_back(draw());
      peek.emplace_back(future_users.back(), g);
    }
    auto cache = CacheState::from_slots(num_files, rows);
    for (int b = 0; b < num_bs; ++b) {
      // Independent enumeration over every (slot, requested uncached file).
      double best = brute_value(rows, future_users, g, 0.9);
      for (int z = 0; z < cap; ++z) {
        for (int u = 0; u < num_users; ++u) {
          FileId f = now_users[u];
          bool covered = std::find(covering[u].begin(), covering[u].end(), b) != covering[u].end();
          bool cached = std::find(rows[b].begin(), rows[b].end(), f) != rows[b].end();
          if (!covered || cached) continue;
          auto alt = rows;
          alt[b][z] = f;
          best = std::max(best, brute_value(alt, future_users, g, 0.9));
        }
      }
      auto act = oracle_bs_action(cache, b, now, peek, g, horizon, 0.9);
      auto after = apply(cache, b, act, now);
      std::vector<std::vector<FileId>> after_rows;
      for (int k = 0; k < num_bs; ++k) {
        after_rows.emplace_back(after.slots(k).begin(), after.slots(k).end());
      }
      CHECK(brute_value(after_rows, future_users, g, 0.9) == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("policy factory") {
  CHECK(make_policy("lru", 0.9)->name() == "lru");
  CHECK(make_policy("oracle:3", 0.9)->lookahead_horizon() == 3);
  CHECK(make_policy("noop", 0.9)->lookahead_horizon() == 0);
  CHECK_THROWS_AS(make_policy("oracle:0", 0.9), ConfigError);
  CHECK_THROWS_AS(make_policy("oracle:x", 0.9), ConfigError);
  CHECK_THROWS_AS(make_policy("extern:", 0.9), ConfigError);
  CHECK_THROWS_AS(make_policy("random", 0.9), ConfigError);
}

TEST_CASE("extern adapter") {
  auto g = graph_of(2, {{0}, {1}});
  RequestSlot q({3, 4}, g);
  auto obs = observe(1, CacheState::from_slots(10, {{1, 2}, {5, 6}}), q);
  DecisionContext ctx;
  const std::string agent = NOOP_AGENT;

  SUBCASE("echo agent answers NOOP per BS") {
    ExternalPolicy p({agent + " noop", std::chrono::milliseconds(5000)});
    for (int i = 0; i < 3; ++i) {
      auto a = parse(p.decide(obs, ctx), obs);
      REQUIRE(a.is_valid());
      CHECK(a.is_all_noop());
    }
    CHECK(p.failures() == 0);
  }
  SUBCASE("garbage is a syntax error") {
    ExternalPolicy p({agent + " garbage", std::chrono::milliseconds(5000)});
    auto a = parse(p.decide(obs, ctx), obs);
    REQUIRE_FALSE(a.is_valid());
    CHECK(a.invalid_info().reason == InvalidReason::kSyntax);
  }
  SUBCASE("a silent agent times out and is restarted") {
    ExternalPolicy p({agent + " sleep", std::chrono::milliseconds(100)});
    CHECK(p.decide(obs, ctx).empty());
    CHECK(p.decide(obs, ctx).empty());
    CHECK(p.timeouts() == 2);
  }
  SUBCASE("an agent that exits yields an empty completion") {
    ExternalPolicy p({agent + " exit", std::chrono::milliseconds(2000)});
    CHECK(p.decide(obs, ctx).empty());
    CHECK(p.failures() == 1);
  }
  SUBCASE("a missing command is a configuration error") {
    ExternalPolicy p({"/nonexistent/agent-binary", std::chrono::milliseconds(2000)});
    CHECK_THROWS_AS(p.decide(obs, ctx), ConfigError);
  }
}
