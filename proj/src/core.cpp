#include "coopcache/core.hpp"

#include <algorithm>
#include <map>

namespace coopcache {

const char* to_string(FeasibilityRule rule) {
  switch (rule) {
    case FeasibilityRule::kAdmissibility: return "admissibility";
    case FeasibilityRule::kDuplication: return "duplication";
    case FeasibilityRule::kConsistency: return "consistency";
  }
  return "unknown";
}

const char* to_string(InvalidReason reason) {
  switch (reason) {
    case InvalidReason::kSyntax: return "syntax";
    case InvalidReason::kCount: return "count";
    case InvalidReason::kOrder: return "order";
    case InvalidReason::kAdmissibility: return "admissibility";
    case InvalidReason::kDuplication: return "duplication";
    case InvalidReason::kConsistency: return "consistency";
    case InvalidReason::kUnavailable: return "unavailable";
  }
  return "unknown";
}

FeasibilityError::FeasibilityError(int bs, FeasibilityRule rule,
                                   const std::string& detail)
    : Error("BS " + std::to_string(bs + 1) + ": " + to_string(rule) +
            " violated" + (detail.empty() ? "" : " (" + detail + ")")),
      bs_(bs),
      rule_(rule) {}

// ---------------------------------------------------------------------------
// RequestSlot

RequestSlot::RequestSlot(std::vector<FileId> per_user,
                         const AssociationGraph& graph)
    : per_user_(std::move(per_user)) {
  if (static_cast<int>(per_user_.size()) != graph.num_users()) {
    throw StructuralError("request slot has " +
                          std::to_string(per_user_.size()) +
                          " users, graph has " +
                          std::to_string(graph.num_users()));
  }
  std::vector<std::map<FileId, int>> tally(graph.num_bs());
  for (int u = 0; u < num_users(); ++u) {
    FileId f = per_user_[u];
    if (f < 1) throw StructuralError("request for invalid file id");
    for (int b : graph.covering[u]) ++tally[b][f];
  }
  counts_.resize(graph.num_bs());
  for (int b = 0; b < graph.num_bs(); ++b) {
    for (const auto& [f, n] : tally[b]) counts_[b].push_back({f, n});
  }
}

RequestSlot RequestSlot::from_counts(
    std::vector<std::vector<FileCount>> counts) {
  RequestSlot slot;
  for (auto& per_bs : counts) {
    std::sort(per_bs.begin(), per_bs.end(),
              [](const FileCount& a, const FileCount& b) {
                return a.file < b.file;
              });
    for (std::size_t i = 0; i < per_bs.size(); ++i) {
      if (per_bs[i].count <= 0 || per_bs[i].file < 1 ||
          (i > 0 && per_bs[i].file == per_bs[i - 1].file)) {
        throw StructuralError("malformed request counts");
      }
    }
  }
  slot.counts_ = std::move(counts);
  return slot;
}

int RequestSlot::count(int bs, FileId f) const {
  const auto& c = counts_.at(bs);
  auto it = std::lower_bound(
      c.begin(), c.end(), f,
      [](const FileCount& fc, FileId id) { return fc.file < id; });
  return (it != c.end() && it->file == f) ? it->count : 0;
}

int RequestSlot::users_at(int bs) const {
  int total = 0;
  for (const auto& fc : counts_.at(bs)) total += fc.count;
  return total;
}

// ---------------------------------------------------------------------------
// CacheState

CacheState::CacheState(int num_files, std::vector<int> capacities)
    : num_files_(num_files) {
  if (num_files < 1) throw StructuralError("library size must be >= 1");
  for (int c : capacities) {
    if (c < 1) throw StructuralError("cache capacity must be >= 1");
    slots_.emplace_back(static_cast<std::size_t>(c), kEmptySlot);
  }
  present_.assign(slots_.size() * (num_files_ + 1), 0);
}

CacheState CacheState::from_slots(int num_files,
                                  std::vector<std::vector<FileId>> slots) {
  std::vector<int> caps;
  for (const auto& s : slots) caps.push_back(static_cast<int>(s.size()));
  CacheState cache(num_files, std::move(caps));
  for (int b = 0; b < cache.num_bs(); ++b) {
    for (int z = 1; z <= cache.capacity(b); ++z) {
      if (slots[b][z - 1] != kEmptySlot) cache.put(b, z, slots[b][z - 1]);
    }
  }
  return cache;
}

FileId CacheState::at(int bs, int z) const {
  const auto& s = slots_.at(bs);
  if (z < 1 || z > static_cast<int>(s.size())) {
    throw StructuralError("slot index out of range");
  }
  return s[z - 1];
}

std::optional<int> CacheState::slot_of(int bs, FileId f) const {
  if (f < 1 || f > num_files_ || !contains(bs, f)) return std::nullopt;
  const auto& s = slots_.at(bs);
  auto it = std::find(s.begin(), s.end(), f);
  return static_cast<int>(it - s.begin()) + 1;
}

int CacheState::occupancy(int bs) const {
  const auto& s = slots_.at(bs);
  return static_cast<int>(
      std::count_if(s.begin(), s.end(), [](FileId f) { return f != kEmptySlot; }));
}

bool CacheState::all_full() const {
  for (int b = 0; b < num_bs(); ++b) {
    if (!full(b)) return false;
  }
  return true;
}

void CacheState::put(int bs, int z, FileId f) {
  auto& s = slots_.at(bs);
  if (z < 1 || z > static_cast<int>(s.size())) {
    throw StructuralError("slot index out of range");
  }
  if (f < 0 || f > num_files_) throw StructuralError("file id out of range");
  FileId& cell = s[z - 1];
  if (cell == f) return;
  if (f != kEmptySlot && contains(bs, f)) {
    throw StructuralError("file " + std::to_string(f) +
                          " already cached at BS " + std::to_string(bs + 1));
  }
  if (cell != kEmptySlot) present_[index(bs, cell)] = 0;
  cell = f;
  if (f != kEmptySlot) present_[index(bs, f)] = 1;
}

// ---------------------------------------------------------------------------
// JointAction

JointAction JointAction::valid(std::vector<BsAction> per_bs) {
  return JointAction(std::move(per_bs));
}

JointAction JointAction::invalid(InvalidReason reason, std::string detail) {
  return JointAction(Invalid{reason, std::move(detail)});
}

JointAction JointAction::all_noop(int num_bs) {
  return valid(std::vector<BsAction>(static_cast<std::size_t>(num_bs), NoOp{}));
}

const std::vector<BsAction>& JointAction::actions() const {
  if (!is_valid()) throw StructuralError("joint action is Invalid");
  return std::get<std::vector<BsAction>>(value_);
}

const Invalid& JointAction::invalid_info() const {
  if (is_valid()) throw StructuralError("joint action is Valid");
  return std::get<Invalid>(value_);
}

bool JointAction::is_all_noop() const {
  if (!is_valid()) return false;
  const auto& a = actions();
  return std::all_of(a.begin(), a.end(), is_noop);
}

// ---------------------------------------------------------------------------
// Metric and feasibility

namespace {

void check_dims(const CacheState& cache, const RequestSlot& requests,
                const AssociationGraph& graph) {
  if (cache.num_bs() != graph.num_bs()) {
    throw StructuralError("cache and graph disagree on BS count");
  }
  if (requests.num_users() != graph.num_users()) {
    throw StructuralError("requests and graph disagree on user count");
  }
}

}  // namespace

int hit_count(const CacheState& cache, const RequestSlot& requests,
              const AssociationGraph& graph) {
  check_dims(cache, requests, graph);
  int hits = 0;
  auto files = requests.per_user();
  for (int u = 0; u < requests.num_users(); ++u) {
    FileId f = files[u];
    if (f < 1 || f > cache.num_files()) {
      throw StructuralError("request for file outside the library");
    }
    for (int b : graph.covering[u]) {
      if (cache.contains(b, f)) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

double hit_rate(const CacheState& cache, const RequestSlot& requests,
                const AssociationGraph& graph) {
  int hits = hit_count(cache, requests, graph);
  if (requests.num_users() == 0) return 0.0;
  return static_cast<double>(hits) / requests.num_users();
}

std::optional<FeasibilityRule> check_feasible(const CacheState& cache, int bs,
                                              const BsAction& action,
                                              const RequestSlot& requests) {
  const auto* swap = std::get_if<Replace>(&action);
  if (swap == nullptr) return std::nullopt;
  if (!requests.admissible(bs, swap->in)) return FeasibilityRule::kAdmissibility;
  if (swap->in < 1 || swap->in > cache.num_files() ||
      cache.contains(bs, swap->in)) {
    return FeasibilityRule::kDuplication;
  }
  if (swap->slot < 1 || swap->slot > cache.capacity(bs) ||
      swap->out == kEmptySlot || cache.at(bs, swap->slot) != swap->out) {
    return FeasibilityRule::kConsistency;
  }
  return std::nullopt;
}

CacheState apply(const CacheState& cache, int bs, const BsAction& action,
                 const RequestSlot& requests) {
  if (auto rule = check_feasible(cache, bs, action, requests)) {
    throw FeasibilityError(bs, *rule, "");
  }
  CacheState next = cache;
  if (const auto* swap = std::get_if<Replace>(&action)) {
    next.put(bs, swap->slot, swap->in);
  }
  return next;
}

CacheState apply(const CacheState& cache, const JointAction& action,
                 const RequestSlot& requests) {
  if (!action.is_valid()) {
    throw StructuralError("cannot apply an Invalid joint action");
  }
  const auto& per_bs = action.actions();
  if (static_cast<int>(per_bs.size()) != cache.num_bs() ||
      requests.num_bs() != cache.num_bs()) {
    throw StructuralError("joint action length does not match BS count");
  }
  // Validate every component against the pre-action state first.
  for (int b = 0; b < cache.num_bs(); ++b) {
    if (auto rule = check_feasible(cache, b, per_bs[b], requests)) {
      throw FeasibilityError(b, *rule, "");
    }
  }
  CacheState next = cache;
  for (int b = 0; b < cache.num_bs(); ++b) {
    if (const auto* swap = std::get_if<Replace>(&per_bs[b])) {
      next.put(b, swap->slot, swap->in);
    }
  }
  return next;
}

std::vector<BsAction> feasible_actions(const CacheState& cache, int bs,
                                       const RequestSlot& requests) {
  std::vector<BsAction> out{NoOp{}};
  if (!cache.full(bs)) return out;
  std::vector<FileId> pool;
  for (const auto& fc : requests.counts(bs)) {
    if (fc.file <= cache.num_files() && !cache.contains(bs, fc.file)) {
      pool.push_back(fc.file);
    }
  }
  out.reserve(1 + pool.size() * cache.capacity(bs));
  for (int z = 1; z <= cache.capacity(bs); ++z) {
    FileId victim = cache.at(bs, z);
    for (FileId f : pool) out.push_back(Replace{z, f, victim});
  }
  return out;
}

long long nominal_action_count(const CacheState& cache, int bs,
                               const RequestSlot& requests) {
  return static_cast<long long>(cache.capacity(bs)) *
             static_cast<long long>(requests.counts(bs).size()) +
         1;
}

int hamming_distance(const CacheState& a, const CacheState& b, int bs) {
  int d = 0;
  for (FileId f : a.slots(bs)) {
    if (f != kEmptySlot && !b.contains(bs, f)) ++d;
  }
  for (FileId f : b.slots(bs)) {
    if (f != kEmptySlot && !a.contains(bs, f)) ++d;
  }
  return d;
}

bool check_transition(const CacheState& prev, const CacheState& next) {
  if (prev.num_bs() != next.num_bs() || prev.num_files() != next.num_files()) {
    return false;
  }
  for (int b = 0; b < prev.num_bs(); ++b) {
    if (prev.capacity(b) != next.capacity(b)) return false;
    if (next.occupancy(b) > next.capacity(b)) return false;
    if (hamming_distance(prev, next, b) > 2) return false;
  }
  return true;
}

}  // namespace coopcache
