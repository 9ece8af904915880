#pragma once

// State-to-prompt encoder and the strict text-to-action parser.
//
// Decision line grammar (ASCII, case-sensitive, one line per BS, ascending):
//
//   BS <b>: NOOP
//   BS <b>: SWAP slot=<z> out=<f_out> in=<f_in>
//
// Numbers are positive decimals without sign or leading zeros. Leading and
// trailing whitespace on a line is ignored, blank lines are skipped, and any
// other non-empty line makes the whole completion Invalid(syntax).

#include <string>
#include <string_view>
#include <vector>

#include "coopcache/core.hpp"
#include "coopcache/traffic.hpp"

namespace coopcache {

// Appearance counts over one history window for the files relevant to a BS
// (cached or currently requested), sorted by file id.
struct WindowFeatures {
  int window = 0;
  int denominator = 0;  // min(window, t)
  std::vector<FileCount> counts;
  bool operator==(const WindowFeatures&) const = default;
};

// The MDP state s_t as seen by a policy.
struct SlotObservation {
  int t = 0;
  CacheState cache;
  RequestSlot requests;
  // freq[b][k] for window k of BS b.
  std::vector<std::vector<WindowFeatures>> freq;

  int num_bs() const { return cache.num_bs(); }

  static SlotObservation build(int t, const CacheState& cache,
                               const RequestSlot& requests,
                               const FrequencyTracker& tracker);
};

// Renders `numerator / denominator` with three decimals, rounding half to
// even, using exact integer arithmetic.
std::string format_rate(int numerator, int denominator);

std::string encode(const SlotObservation& obs);

// Never throws. Invalid carries the first failing reason.
JointAction parse(std::string_view text, const SlotObservation& obs);

// One grammar line per BS, each terminated by '\n'. Throws StructuralError on
// Invalid.
std::string serialize(const JointAction& action);
std::string serialize_line(int bs, const BsAction& action);

// Rebuilds the slot index, cache and request counts from an encoded prompt;
// frequency features are left empty and the library size is taken as the
// largest file id that appears. Throws StructuralError if the text is
// not an encoder-produced prompt.
SlotObservation decode_prompt(std::string_view prompt);

}  // namespace coopcache
