#include <optional>

#include "coopcache/policies.hpp"

namespace coopcache {

namespace {

// Requested file not cached at bs with the highest count; ties to lower id.
std::optional<FileId> insertion_candidate(const SlotObservation& obs, int bs) {
  std::optional<FileId> best;
  int best_count = 0;
  for (const auto& fc : obs.requests.counts(bs)) {
    if (fc.file > obs.cache.num_files() || obs.cache.contains(bs, fc.file)) {
      continue;
    }
    if (fc.count > best_count) {  // counts are visited in ascending file id
      best = fc.file;
      best_count = fc.count;
    }
  }
  return best;
}

// Cached file minimizing key(bs, f); ties to lower id.
template <typename KeyFn>
std::string evict_by(const SlotObservation& obs, KeyFn key) {
  std::string out;
  for (int b = 0; b < obs.num_bs(); ++b) {
    BsAction action = NoOp{};
    auto candidate = obs.cache.full(b) ? insertion_candidate(obs, b) : std::nullopt;
    if (candidate) {
      int victim_slot = 0;
      FileId victim = kEmptySlot;
      for (int z = 1; z <= obs.cache.capacity(b); ++z) {
        FileId f = obs.cache.at(b, z);
        if (victim == kEmptySlot || key(b, f) < key(b, victim) ||
            (key(b, f) == key(b, victim) && f < victim)) {
          victim = f;
          victim_slot = z;
        }
      }
      action = Replace{victim_slot, *candidate, victim};
    }
    out += serialize_line(b, action);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string lru_decide(const SlotObservation& obs, const PolicyBooks& books) {
  return evict_by(obs, [&](int b, FileId f) { return books.last_access(b, f); });
}

std::string lfu_decide(const SlotObservation& obs, const PolicyBooks& books) {
  return evict_by(obs, [&](int b, FileId f) { return books.frequency(b, f); });
}

std::string fifo_decide(const SlotObservation& obs, const PolicyBooks& books) {
  return evict_by(obs, [&](int b, FileId f) { return books.inserted_at(b, f); });
}

}  // namespace coopcache
