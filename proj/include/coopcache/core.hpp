#pragma once

// Domain types for cooperative multi-BS caching: cache placement, per-slot
// requests, single-swap actions, and the cooperative hit-rate metric.
//
// Indexing conventions:
//   * base stations are 0-based in containers and rendered 1-based in text;
//   * cache slot indices z are 1-based everywhere (z in [1, C_b]);
//   * file ids are dense and 1-based (f in [1, F]); 0 marks an empty slot.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace coopcache {

using FileId = std::int32_t;
inline constexpr FileId kEmptySlot = 0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches, malformed inputs, misuse of an API contract.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Unsatisfiable or malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class FeasibilityRule { kAdmissibility, kDuplication, kConsistency };

const char* to_string(FeasibilityRule rule);

class FeasibilityError : public Error {
 public:
  FeasibilityError(int bs, FeasibilityRule rule, const std::string& detail);

  int bs() const { return bs_; }
  FeasibilityRule rule() const { return rule_; }

 private:
  int bs_;
  FeasibilityRule rule_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// User-to-BS coverage. covering[u] is the sorted set B_u of BS indices within
// `radius` of user u.
struct AssociationGraph {
  std::vector<Point> bs_positions;
  std::vector<Point> user_positions;
  double radius = 0.0;
  std::vector<std::vector<int>> covering;

  int num_bs() const { return static_cast<int>(bs_positions.size()); }
  int num_users() const { return static_cast<int>(covering.size()); }
  bool operator==(const AssociationGraph&) const = default;
};

struct FileCount {
  FileId file = kEmptySlot;
  int count = 0;
  bool operator==(const FileCount&) const = default;
};

// One slot of requests: one file per user, plus the per-BS request counts
// n_{b,f} (sorted by file id) whose support is the admissible set R_t^(b).
class RequestSlot {
 public:
  RequestSlot() = default;
  RequestSlot(std::vector<FileId> per_user, const AssociationGraph& graph);

  // Builds a slot directly from per-BS counts; the per-user list is left
  // empty. Used to reconstruct observations from rendered prompts.
  static RequestSlot from_counts(std::vector<std::vector<FileCount>> counts);

  int num_users() const { return static_cast<int>(per_user_.size()); }
  int num_bs() const { return static_cast<int>(counts_.size()); }
  std::span<const FileId> per_user() const { return per_user_; }

  // Sorted by ascending file id.
  std::span<const FileCount> counts(int bs) const { return counts_.at(bs); }
  int count(int bs, FileId f) const;
  bool admissible(int bs, FileId f) const { return count(bs, f) > 0; }
  // Number of users covered by `bs` this slot (sum of its counts).
  int users_at(int bs) const;

  bool operator==(const RequestSlot&) const = default;

 private:
  std::vector<FileId> per_user_;
  std::vector<std::vector<FileCount>> counts_;
};

// Global placement X^(t) with per-BS slot order. Value type.
class CacheState {
 public:
  CacheState() = default;
  CacheState(int num_files, std::vector<int> capacities);
  // Capacity of each BS is the length of its slot list.
  static CacheState from_slots(int num_files,
                               std::vector<std::vector<FileId>> slots);

  int num_bs() const { return static_cast<int>(slots_.size()); }
  int num_files() const { return num_files_; }
  int capacity(int bs) const { return static_cast<int>(slots_.at(bs).size()); }
  std::span<const FileId> slots(int bs) const { return slots_.at(bs); }
  // z is 1-based.
  FileId at(int bs, int z) const;
  bool contains(int bs, FileId f) const {
    return present_[index(bs, f)] != 0;
  }
  std::optional<int> slot_of(int bs, FileId f) const;
  int occupancy(int bs) const;
  bool full(int bs) const { return occupancy(bs) == capacity(bs); }
  bool all_full() const;

  // Overwrites slot z of `bs` with f (kEmptySlot clears it). Throws
  // StructuralError if f is already stored in a different slot of `bs`.
  void put(int bs, int z, FileId f);

  bool operator==(const CacheState& other) const {
    return num_files_ == other.num_files_ && slots_ == other.slots_;
  }

 private:
  std::size_t index(int bs, FileId f) const {
    return static_cast<std::size_t>(bs) * (num_files_ + 1) +
           static_cast<std::size_t>(f);
  }

  int num_files_ = 0;
  std::vector<std::vector<FileId>> slots_;
  std::vector<std::uint8_t> present_;
};

struct NoOp {
  bool operator==(const NoOp&) const = default;
};

struct Replace {
  int slot = 0;  // 1-based
  FileId in = kEmptySlot;
  FileId out = kEmptySlot;
  bool operator==(const Replace&) const = default;
};

using BsAction = std::variant<NoOp, Replace>;

inline bool is_noop(const BsAction& a) {
  return std::holds_alternative<NoOp>(a);
}

enum class InvalidReason {
  kSyntax,
  kCount,
  kOrder,
  kAdmissibility,
  kDuplication,
  kConsistency,
  kUnavailable,  // no completion was produced (adapter timeout or EOF)
};

const char* to_string(InvalidReason reason);

struct Invalid {
  InvalidReason reason = InvalidReason::kSyntax;
  std::string detail;
  bool operator==(const Invalid& o) const { return reason == o.reason; }
};

// Either one BsAction per BS in ascending BS order, or Invalid.
class JointAction {
 public:
  JointAction() : value_(Invalid{}) {}
  static JointAction valid(std::vector<BsAction> per_bs);
  static JointAction invalid(InvalidReason reason, std::string detail = {});
  static JointAction all_noop(int num_bs);

  bool is_valid() const {
    return std::holds_alternative<std::vector<BsAction>>(value_);
  }
  // Throws StructuralError on Invalid.
  const std::vector<BsAction>& actions() const;
  const Invalid& invalid_info() const;
  bool is_all_noop() const;

  bool operator==(const JointAction&) const = default;

 private:
  explicit JointAction(std::variant<std::vector<BsAction>, Invalid> v)
      : value_(std::move(v)) {}
  std::variant<std::vector<BsAction>, Invalid> value_;
};

// Cooperative hit rate: fraction of users whose file is cached at any
// covering BS. Returns 0 when there are no users.
double hit_rate(const CacheState& cache, const RequestSlot& requests,
                const AssociationGraph& graph);
// Integer numerator of hit_rate.
int hit_count(const CacheState& cache, const RequestSlot& requests,
              const AssociationGraph& graph);

// First violated rule for `action` at BS `bs`, or nullopt if feasible.
std::optional<FeasibilityRule> check_feasible(const CacheState& cache, int bs,
                                              const BsAction& action,
                                              const RequestSlot& requests);

// Applies a valid joint action. Throws FeasibilityError naming the first
// offending BS, StructuralError for Invalid or a length mismatch.
CacheState apply(const CacheState& cache, const JointAction& action,
                 const RequestSlot& requests);

// Applies one BS's action, leaving the other rows untouched.
CacheState apply(const CacheState& cache, int bs, const BsAction& action,
                 const RequestSlot& requests);

// NoOp followed by every feasible (z, f_in, f_out) in (z, f_in) order.
// Non-full caches admit NoOp only.
std::vector<BsAction> feasible_actions(const CacheState& cache, int bs,
                                       const RequestSlot& requests);

// The action-space size as counted by D_b = C_b * |R| + 1, without excluding
// requested files that are already cached.
long long nominal_action_count(const CacheState& cache, int bs,
                               const RequestSlot& requests);

// True iff every BS moved by Hamming distance <= 2 and stays within capacity.
bool check_transition(const CacheState& prev, const CacheState& next);

int hamming_distance(const CacheState& a, const CacheState& b, int bs);

}  // namespace coopcache
