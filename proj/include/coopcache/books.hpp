#pragma once

// Per-BS bookkeeping consumed by the classical eviction heuristics.

#include <vector>

#include "coopcache/core.hpp"

namespace coopcache {

class PolicyBooks {
 public:
  PolicyBooks() = default;
  PolicyBooks(int num_bs, int num_files);

  // Records slot t's requests: last-access and cumulative counts for every
  // file in R_t^(b).
  void observe(int t, const RequestSlot& requests);
  // Records insertion slots for every file that entered a BS between
  // `before` and `after` at slot t.
  void record_transition(int t, const CacheState& before,
                         const CacheState& after);

  // 0 when never requested / never inserted.
  int last_access(int bs, FileId f) const { return last_access_[idx(bs, f)]; }
  long long frequency(int bs, FileId f) const { return frequency_[idx(bs, f)]; }
  int inserted_at(int bs, FileId f) const { return inserted_at_[idx(bs, f)]; }

  int num_bs() const { return num_bs_; }
  int num_files() const { return num_files_; }

 private:
  std::size_t idx(int bs, FileId f) const {
    return static_cast<std::size_t>(bs) * (num_files_ + 1) +
           static_cast<std::size_t>(f);
  }

  int num_bs_ = 0;
  int num_files_ = 0;
  std::vector<int> last_access_;
  std::vector<long long> frequency_;
  std::vector<int> inserted_at_;
};

}  // namespace coopcache
