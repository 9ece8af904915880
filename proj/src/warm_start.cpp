#include "coopcache/policies.hpp"
#include "coopcache/traffic.hpp"

namespace coopcache {

WarmStart warm_start(const Instance& instance) {
  return warm_start(instance, instance.config.warmup_slots);
}

WarmStart warm_start(const Instance& instance, int warmup_slots) {
  const InstanceConfig& c = instance.config;
  if (warmup_slots < 0 || warmup_slots > instance.trace_length()) {
    throw StructuralError("warm-up longer than the trace");
  }
  WarmStart ws{CacheState(c.num_files, c.resolved_capacities()),
               FrequencyTracker(c.num_bs, c.num_files, c.windows),
               PolicyBooks(c.num_bs, c.num_files), 1};
  for (int t = 1; t <= warmup_slots; ++t) {
    const RequestSlot& requests = instance.slot(t);
    ws.tracker.advance(requests);
    ws.books.observe(t, requests);
    CacheState next = ws.cache;
    for (int b = 0; b < c.num_bs; ++b) {
      if (!ws.cache.full(b)) {
        FileId pick = kEmptySlot;
        int best = 0;
        for (const auto& fc : requests.counts(b)) {
          if (!ws.cache.contains(b, fc.file) && fc.count > best) {
            pick = fc.file;
            best = fc.count;
          }
        }
        if (pick == kEmptySlot) continue;
        int z = 1;
        while (ws.cache.at(b, z) != kEmptySlot) ++z;
        next.put(b, z, pick);
        continue;
      }
      BsAction action = oracle_bs_action(
          ws.cache, b, requests, instance.lookahead(t, c.warmup_horizon),
          instance.graph, c.warmup_horizon, c.warmup_discount);
      if (const auto* swap = std::get_if<Replace>(&action)) {
        next.put(b, swap->slot, swap->in);
      }
    }
    ws.books.record_transition(t, ws.cache, next);
    ws.cache = std::move(next);
  }
  ws.next_slot = warmup_slots + 1;
  return ws;
}

}  // namespace coopcache
