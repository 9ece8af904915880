#include <doctest.h>

#include <set>

#include "coopcache/instance_io.hpp"
#include "coopcache/interface.hpp"
#include "coopcache/verify.hpp"
#include "helpers.hpp"

using namespace coopcache;
using coopcache::testing::graph_of;

namespace {

// Users cover {BS1}, {BS1,BS2}, {BS2}, {BS2}; windows {2,5}; three slots.
SlotObservation golden_observation(int t = 3) {
  auto g = graph_of(2, {{0}, {0, 1}, {1}, {1}});
  FrequencyTracker tr(2, 50, {2, 5});
  RequestSlot last;
  for (auto h : std::vector<std::vector<FileId>>{
           {3, 17, 42, 42}, {3, 5, 17, 8}, {9, 17, 42, 17}}) {
    last = RequestSlot(h, g);
    tr.advance(last);
  }
  auto cache = CacheState::from_slots(50, {{3, 17, 8}, {17, kEmptySlot, 5}});
  return SlotObservation::build(t, cache, last, tr);
}

// BS2 slot 3 holds 17 and 42 is requested there.
SlotObservation parser_observation() {
  auto g = graph_of(2, {{0}, {1}, {1}});
  FrequencyTracker tr(2, 50, {10});
  RequestSlot q({4, 42, 42}, g);
  tr.advance(q);
  auto cache = CacheState::from_slots(50, {{1, 2, 3}, {5, 6, 17}});
  return SlotObservation::build(1, cache, q, tr);
}

InvalidReason reason_of(std::string_view text, const SlotObservation& obs) {
  auto a = parse(text, obs);
  REQUIRE_FALSE(a.is_valid());
  return a.invalid_info().reason;
}

}  // namespace

TEST_CASE("encoder matches the golden prompt") {
  auto obs = golden_observation();
  CHECK(encode(obs) == read_file(COOPCACHE_TEST_DATA "/golden_prompt_2bs.txt"));
  CHECK(encode(obs) == encode(obs));
}

TEST_CASE("prompts differ only in the header when only the slot differs") {
  std::string a = encode(golden_observation(3));
  std::string b = encode(golden_observation(4));
  CHECK(a.substr(0, a.find('\n')) == "SLOT 3");
  CHECK(b.substr(0, b.find('\n')) == "SLOT 4");
  CHECK(a.substr(a.find('\n')) == b.substr(b.find('\n')));
}

TEST_CASE("rates use exact half-even rounding") {
  CHECK(format_rate(0, 0) == "0.000");
  CHECK(format_rate(1, 8) == "0.125");
  CHECK(format_rate(1, 16) == "0.062");
  CHECK(format_rate(3, 16) == "0.188");
  CHECK(format_rate(5, 16) == "0.312");
  CHECK(format_rate(1, 2000) == "0.000");
  CHECK(format_rate(3, 2000) == "0.002");
  CHECK(format_rate(2, 3) == "0.667");
  CHECK(format_rate(7, 7) == "1.000");
}

TEST_CASE("decode_prompt restores cache and requests") {
  auto obs = golden_observation();
  auto back = decode_prompt(encode(obs));
  CHECK(back.t == 3);
  for (int b = 0; b < 2; ++b) {
    auto x = back.cache.slots(b);
    auto y = obs.cache.slots(b);
    CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
    auto p = back.requests.counts(b);
    auto q = obs.requests.counts(b);
    CHECK(std::equal(p.begin(), p.end(), q.begin(), q.end()));
  }
  CHECK_THROWS_AS(decode_prompt("hello"), StructuralError);
}

TEST_CASE("parser accepts well-formed feasible completions") {
  auto obs = parser_observation();
  auto a = parse("BS 1: NOOP\nBS 2: SWAP slot=3 out=17 in=42", obs);
  REQUIRE(a.is_valid());
  CHECK(a.actions()[0] == BsAction{NoOp{}});
  CHECK(a.actions()[1] == BsAction{Replace{3, 42, 17}});
  CHECK(parse("  BS 1: NOOP  \n\n\tBS 2: NOOP\r\n\n", obs).is_valid());
}

TEST_CASE("parser failure reasons") {
  auto obs = parser_observation();
  CHECK(reason_of("BS 1: NOOP", obs) == InvalidReason::kCount);
  CHECK(reason_of("BS 1: NOOP\nBS 2: NOOP\nBS 2: NOOP", obs) == InvalidReason::kCount);
  CHECK(reason_of("BS 2: NOOP\nBS 1: NOOP", obs) == InvalidReason::kOrder);
  CHECK(reason_of("BS 1: NOOP\nBS 2: SWAP slot=3 out=99 in=42", obs) ==
        InvalidReason::kConsistency);
  CHECK(reason_of("BS 1: NOOP\nBS 2: SWAP slot=3 out=17 in=43", obs) ==
        InvalidReason::kAdmissibility);
  CHECK(reason_of("BS 1: SWAP slot=1 out=1 in=4\nBS 2: SWAP slot=1 out=5 in=17", obs) ==
        InvalidReason::kAdmissibility);
  CHECK(reason_of("", obs) == InvalidReason::kCount);
  CHECK(reason_of("BS 1: noop\nBS 2: NOOP", obs) == InvalidReason::kSyntax);
  CHECK(reason_of("BS 1: NOOP\nBS 2: SWAP slot=03 out=17 in=42", obs) ==
        InvalidReason::kSyntax);
  CHECK(reason_of("BS 1: NOOP\nBS 2: SWAP slot=0 out=17 in=42", obs) ==
        InvalidReason::kSyntax);
  CHECK(reason_of("BS 1: NOOP\nBS 2: SWAP slot=3 in=42 out=17", obs) ==
        InvalidReason::kSyntax);
  CHECK(reason_of("BS 1: NOOP\nBS 2: SWAP slot=1234567890 out=17 in=42", obs) ==
        InvalidReason::kSyntax);
  CHECK(reason_of("BS 1: NOOP\nSure! BS 2: NOOP", obs) == InvalidReason::kSyntax);
  // Syntax is checked on every line before the count.
  CHECK(reason_of("BS 1: NOOP\nBS 2: NOOP\ngarbage", obs) == InvalidReason::kSyntax);
}

TEST_CASE("duplication is reported when the incoming file is already cached") {
  auto g = graph_of(1, {{0}});
  FrequencyTracker tr(1, 10, {10});
  RequestSlot q({2}, g);
  tr.advance(q);
  auto obs = SlotObservation::build(1, CacheState::from_slots(10, {{1, 2}}), q, tr);
  CHECK(reason_of("BS 1: SWAP slot=1 out=1 in=2", obs) == InvalidReason::kDuplication);
}

TEST_CASE("serializer") {
  CHECK(serialize(JointAction::all_noop(3)) == "BS 1: NOOP\nBS 2: NOOP\nBS 3: NOOP\n");
  CHECK(serialize_line(1, Replace{3, 42, 17}) == "BS 2: SWAP slot=3 out=17 in=42");
  CHECK_THROWS_AS(serialize(JointAction::invalid(InvalidReason::kSyntax)), StructuralError);
}

TEST_CASE("serialization is injective and round-trips on feasible actions") {
  auto obs = parser_observation();
  std::set<std::string> seen;
  for (const auto& a : feasible_actions(obs.cache, 1, obs.requests)) {
    auto joint = JointAction::valid({NoOp{}, a});
    std::string text = serialize(joint);
    CHECK(seen.insert(text).second);
    CHECK(parse(text, obs) == joint);
  }
  auto report = run_roundtrips(1000, 11);
  CHECK(report.cases == 1000);
  CHECK(report.ok());
}

TEST_CASE("parser fuzz smoke") {
  auto report = run_parser_fuzz(5000, 3);
  CHECK(report.panics == 0);
  CHECK(report.infeasible_valid == 0);
  CHECK(report.valid > 0);
}
