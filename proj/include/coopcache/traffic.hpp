#pragma once

// Frozen task instances: topology, grouped-Zipf demand, the pre-drawn request
// trace, history-window frequency features, and the warm-start prefill.

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "coopcache/books.hpp"
#include "coopcache/core.hpp"

namespace coopcache {

struct InstanceConfig {
  int num_bs = 2;
  int num_users = 20;
  int num_files = 100;
  int cache_capacity = 10;
  // Per-BS capacities; when empty every BS gets cache_capacity.
  std::vector<int> capacities;
  int num_groups = 3;
  double zipf_alpha = 1.2;
  std::vector<int> windows{10, 100, 1000};
  int warmup_slots = 100;
  int rollout_slots = 300;
  int horizon_reserve = 10;
  // Oracle horizon and discount used by the warm-start prefill.
  int warmup_horizon = 10;
  double warmup_discount = 0.9;
  // Empty / non-positive means the default layout for num_bs.
  std::vector<Point> bs_positions;
  double coverage_radius = 0.0;
  // Resample users until some user is covered by >= 2 BSs (only when B >= 2).
  bool require_overlap = true;

  static InstanceConfig two_bs();
  static InstanceConfig five_bs();

  std::vector<int> resolved_capacities() const;
  // Copy with capacities, BS layout and radius filled in.
  InstanceConfig resolved() const;
  int trace_length() const {
    return warmup_slots + rollout_slots + horizon_reserve;
  }

  bool operator==(const InstanceConfig&) const = default;
};

struct DemandModel {
  // permutations[g][r] is the file at popularity rank r (0-based) for group g.
  std::vector<std::vector<FileId>> permutations;
  std::vector<int> user_group;
  // Rank probabilities shared by every group.
  std::vector<double> rank_pmf;

  int num_groups() const { return static_cast<int>(permutations.size()); }
  // Probability that a user of group g requests file f.
  double file_probability(int g, FileId f) const;

  bool operator==(const DemandModel&) const = default;
};

// The frozen trajectory reused by every policy.
struct Instance {
  std::uint64_t seed = 0;
  InstanceConfig config;  // resolved
  AssociationGraph graph;
  DemandModel demand;
  // trace[t-1][u] is the file requested by user u at slot t (t is 1-based).
  std::vector<std::vector<FileId>> trace;
  // Derived from trace and graph; rebuilt on load.
  std::vector<RequestSlot> slots;

  int trace_length() const { return static_cast<int>(trace.size()); }
  const RequestSlot& slot(int t) const { return slots.at(t - 1); }
  // Frozen future Q^(t+1 : t+h). Throws StructuralError if it runs past the
  // end of the trace.
  std::span<const RequestSlot> lookahead(int t, int h) const;

  // Recomputes `slots` from `trace` and `graph`.
  void rebuild_slots();

  bool operator==(const Instance& o) const {
    return seed == o.seed && config == o.config && graph == o.graph &&
           demand == o.demand && trace == o.trace;
  }
};

// The frozen future request slots handed to look-ahead scoring.
using LookaheadWindow = std::span<const RequestSlot>;

std::vector<double> zipf_pmf(int num_files, double alpha);

Instance build_instance(const InstanceConfig& config, std::uint64_t seed);

// Multi-window appearance rates phi_{b,f}(w): the fraction of the last
// min(w, t) slots in which f was in R^(b).
class FrequencyTracker {
 public:
  FrequencyTracker() = default;
  FrequencyTracker(int num_bs, int num_files, std::vector<int> windows);

  void advance(const RequestSlot& requests);

  int t() const { return t_; }
  const std::vector<int>& windows() const { return windows_; }
  int num_bs() const { return num_bs_; }
  int num_files() const { return num_files_; }
  // Slots within window k (index into windows()) where f was admissible at b.
  int count(int bs, FileId f, std::size_t k) const;
  // min(w_k, t); 0 before the first slot.
  int denominator(std::size_t k) const;
  double phi(int bs, FileId f, std::size_t k) const;

 private:
  std::size_t idx(std::size_t k, int bs, FileId f) const {
    return (k * num_bs_ + static_cast<std::size_t>(bs)) * (num_files_ + 1) +
           static_cast<std::size_t>(f);
  }

  int num_bs_ = 0;
  int num_files_ = 0;
  int t_ = 0;
  std::vector<int> windows_;
  int max_window_ = 0;
  std::vector<int> counts_;
  // Admissible files per BS for the most recent max_window_ slots.
  std::deque<std::vector<std::vector<FileId>>> history_;
};

FrequencyTracker advance_tracker(FrequencyTracker tracker,
                                 const RequestSlot& requests);

// Environment state after the prefill: the common starting point of every
// rollout on an instance.
struct WarmStart {
  CacheState cache;
  FrequencyTracker tracker;
  PolicyBooks books;
  int next_slot = 1;  // first slot to be decided by the evaluated policy
};

// Runs config.warmup_slots slots: while a BS has empty slots, the
// highest-count requested uncached file goes into its lowest empty slot; a
// full BS follows the look-ahead oracle (warmup_horizon, warmup_discount).
WarmStart warm_start(const Instance& instance);
WarmStart warm_start(const Instance& instance, int warmup_slots);

}  // namespace coopcache
