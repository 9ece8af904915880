#include "coopcache/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "coopcache/random.hpp"

namespace coopcache {

namespace {

constexpr int kMaxUserDraws = 10000;
constexpr int kMaxOverlapRounds = 1000;

std::vector<Point> default_layout(int num_bs) {
  if (num_bs == 2) return {{0.35, 0.5}, {0.65, 0.5}};
  if (num_bs == 5) {
    return {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}, {0.5, 0.5}};
  }
  if (num_bs == 1) return {{0.5, 0.5}};
  std::vector<Point> ring;
  for (int b = 0; b < num_bs; ++b) {
    double angle = 2.0 * std::numbers::pi * b / num_bs;
    ring.push_back({0.5 + 0.3 * std::cos(angle), 0.5 + 0.3 * std::sin(angle)});
  }
  return ring;
}

double default_radius(int num_bs) {
  if (num_bs == 2) return 0.40;
  if (num_bs == 5) return 0.38;
  if (num_bs == 1) return 0.5;
  return 0.35;
}

std::vector<int> covering_set(const Point& user, const std::vector<Point>& bs,
                              double radius) {
  std::vector<int> out;
  for (int b = 0; b < static_cast<int>(bs.size()); ++b) {
    double dx = user.x - bs[b].x;
    double dy = user.y - bs[b].y;
    if (dx * dx + dy * dy <= radius * radius) out.push_back(b);
  }
  return out;
}

void validate(const InstanceConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.num_bs < 1) fail("num_bs must be >= 1");
  if (c.num_users < 1) fail("num_users must be >= 1");
  if (c.num_groups < 1) fail("num_groups must be >= 1");
  if (!(c.zipf_alpha > 0.0)) fail("zipf_alpha must be > 0");
  auto caps = c.resolved_capacities();
  if (static_cast<int>(caps.size()) != c.num_bs) {
    fail("capacities must list one entry per BS");
  }
  for (int cap : caps) {
    if (cap < 1) fail("cache capacity must be >= 1");
    if (c.num_files <= cap) fail("num_files must exceed every cache capacity");
  }
  if (c.windows.empty()) fail("at least one history window is required");
  for (int w : c.windows) {
    if (w < 1) fail("history windows must be >= 1");
  }
  if (c.warmup_slots < 0 || c.rollout_slots < 0 || c.horizon_reserve < 0) {
    fail("slot counts must be non-negative");
  }
  if (c.warmup_horizon < 1) fail("warmup_horizon must be >= 1");
  if (c.warmup_slots > 0 && c.horizon_reserve + c.rollout_slots < c.warmup_horizon) {
    fail("trace too short for the warm-start look-ahead");
  }
  if (!(c.warmup_discount > 0.0 && c.warmup_discount <= 1.0)) {
    fail("warmup_discount must be in (0, 1]");
  }
  if (!c.bs_positions.empty() &&
      static_cast<int>(c.bs_positions.size()) != c.num_bs) {
    fail("bs_positions must list one point per BS");
  }
}

}  // namespace

InstanceConfig InstanceConfig::two_bs() { return InstanceConfig{}; }

InstanceConfig InstanceConfig::five_bs() {
  InstanceConfig c;
  c.num_bs = 5;
  c.num_users = 40;
  return c;
}

std::vector<int> InstanceConfig::resolved_capacities() const {
  if (!capacities.empty()) return capacities;
  return std::vector<int>(static_cast<std::size_t>(std::max(num_bs, 0)),
                          cache_capacity);
}

InstanceConfig InstanceConfig::resolved() const {
  InstanceConfig c = *this;
  c.capacities = resolved_capacities();
  if (c.bs_positions.empty()) c.bs_positions = default_layout(c.num_bs);
  if (!(c.coverage_radius > 0.0)) c.coverage_radius = default_radius(c.num_bs);
  return c;
}

double DemandModel::file_probability(int g, FileId f) const {
  const auto& perm = permutations.at(g);
  auto it = std::find(perm.begin(), perm.end(), f);
  if (it == perm.end()) return 0.0;
  return rank_pmf[static_cast<std::size_t>(it - perm.begin())];
}

std::span<const RequestSlot> Instance::lookahead(int t, int h) const {
  if (t < 0 || h < 0 || t + h > trace_length()) {
    throw StructuralError("look-ahead window runs past the end of the trace");
  }
  return std::span<const RequestSlot>(slots).subspan(
      static_cast<std::size_t>(t), static_cast<std::size_t>(h));
}

void Instance::rebuild_slots() {
  slots.clear();
  slots.reserve(trace.size());
  for (const auto& per_user : trace) slots.emplace_back(per_user, graph);
}

std::vector<double> zipf_pmf(int num_files, double alpha) {
  if (num_files < 1) throw ConfigError("zipf_pmf: num_files must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("zipf_pmf: alpha must be > 0");
  std::vector<double> p(static_cast<std::size_t>(num_files));
  for (int r = 1; r <= num_files; ++r) p[r - 1] = std::pow(r, -alpha);
  double total = 0.0;
  for (int r = num_files; r >= 1; --r) total += p[r - 1];
  for (double& v : p) v /= total;
  return p;
}

Instance build_instance(const InstanceConfig& config, std::uint64_t seed) {
  validate(config);
  Instance inst;
  inst.seed = seed;
  inst.config = config.resolved();
  const InstanceConfig& c = inst.config;

  // Topology.
  inst.graph.bs_positions = c.bs_positions;
  inst.graph.radius = c.coverage_radius;
  RandomStream topo(seed, Stream::kTopology);
  bool need_overlap = c.require_overlap && c.num_bs >= 2;
  for (int round = 0;; ++round) {
    inst.graph.user_positions.clear();
    inst.graph.covering.clear();
    for (int u = 0; u < c.num_users; ++u) {
      for (int draw = 0;; ++draw) {
        if (draw == kMaxUserDraws) {
          throw ConfigError("could not place a covered user after " +
                            std::to_string(kMaxUserDraws) + " draws");
        }
        Point p{topo.uniform(), topo.uniform()};
        auto cover = covering_set(p, c.bs_positions, c.coverage_radius);
        if (!cover.empty()) {
          inst.graph.user_positions.push_back(p);
          inst.graph.covering.push_back(std::move(cover));
          break;
        }
      }
    }
    bool overlap = std::any_of(inst.graph.covering.begin(),
                               inst.graph.covering.end(),
                               [](const auto& s) { return s.size() >= 2; });
    if (!need_overlap || overlap) break;
    if (round + 1 == kMaxOverlapRounds) {
      throw ConfigError("layout produced no overlapping coverage");
    }
  }

  // Demand.
  inst.demand.rank_pmf = zipf_pmf(c.num_files, c.zipf_alpha);
  RandomStream groups(seed, Stream::kGroups);
  for (int u = 0; u < c.num_users; ++u) {
    inst.demand.user_group.push_back(
        static_cast<int>(groups.below(static_cast<std::uint64_t>(c.num_groups))));
  }
  RandomStream perms(seed, Stream::kPermutations);
  for (int g = 0; g < c.num_groups; ++g) {
    std::vector<FileId> perm(static_cast<std::size_t>(c.num_files));
    for (int i = 0; i < c.num_files; ++i) perm[i] = i + 1;
    for (int i = c.num_files - 1; i > 0; --i) {
      auto j = static_cast<int>(perms.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(perm[i], perm[j]);
    }
    inst.demand.permutations.push_back(std::move(perm));
  }

  // Trace.
  std::vector<double> cdf(inst.demand.rank_pmf.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < cdf.size(); ++r) {
    acc += inst.demand.rank_pmf[r];
    cdf[r] = acc;
  }
  RandomStream trace(seed, Stream::kTrace);
  inst.trace.reserve(static_cast<std::size_t>(c.trace_length()));
  for (int t = 0; t < c.trace_length(); ++t) {
    std::vector<FileId> slot(static_cast<std::size_t>(c.num_users));
    for (int u = 0; u < c.num_users; ++u) {
      double x = trace.uniform() * acc;
      auto rank = static_cast<std::size_t>(
          std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
      rank = std::min(rank, cdf.size() - 1);
      slot[u] = inst.demand.permutations[inst.demand.user_group[u]][rank];
    }
    inst.trace.push_back(std::move(slot));
  }
  inst.rebuild_slots();
  return inst;
}

// ---------------------------------------------------------------------------
// FrequencyTracker

FrequencyTracker::FrequencyTracker(int num_bs, int num_files,
                                   std::vector<int> windows)
    : num_bs_(num_bs), num_files_(num_files), windows_(std::move(windows)) {
  if (windows_.empty()) throw StructuralError("no history windows");
  for (int w : windows_) {
    if (w < 1) throw StructuralError("history window must be >= 1");
    max_window_ = std::max(max_window_, w);
  }
  counts_.assign(windows_.size() * num_bs_ * (num_files_ + 1), 0);
}

void FrequencyTracker::advance(const RequestSlot& requests) {
  if (requests.num_bs() != num_bs_) {
    throw StructuralError("tracker and requests disagree on BS count");
  }
  std::vector<std::vector<FileId>> admitted(static_cast<std::size_t>(num_bs_));
  for (int b = 0; b < num_bs_; ++b) {
    for (const auto& fc : requests.counts(b)) {
      if (fc.file > num_files_) throw StructuralError("file id out of range");
      admitted[b].push_back(fc.file);
    }
  }
  history_.push_back(std::move(admitted));
  ++t_;
  const std::size_t size = history_.size();
  for (std::size_t k = 0; k < windows_.size(); ++k) {
    const auto w = static_cast<std::size_t>(windows_[k]);
    for (int b = 0; b < num_bs_; ++b) {
      for (FileId f : history_.back()[b]) ++counts_[idx(k, b, f)];
    }
    if (size > w) {
      const auto& leaving = history_[size - 1 - w];
      for (int b = 0; b < num_bs_; ++b) {
        for (FileId f : leaving[b]) --counts_[idx(k, b, f)];
      }
    }
  }
  while (history_.size() > static_cast<std::size_t>(max_window_)) {
    history_.pop_front();
  }
}

int FrequencyTracker::count(int bs, FileId f, std::size_t k) const {
  if (bs < 0 || bs >= num_bs_ || f < 1 || f > num_files_ ||
      k >= windows_.size()) {
    throw StructuralError("tracker index out of range");
  }
  return counts_[idx(k, bs, f)];
}

int FrequencyTracker::denominator(std::size_t k) const {
  return std::min(windows_.at(k), t_);
}

double FrequencyTracker::phi(int bs, FileId f, std::size_t k) const {
  int denom = denominator(k);
  if (denom == 0) return 0.0;
  return static_cast<double>(count(bs, f, k)) / denom;
}

FrequencyTracker advance_tracker(FrequencyTracker tracker,
                                 const RequestSlot& requests) {
  tracker.advance(requests);
  return tracker;
}

// ---------------------------------------------------------------------------
// PolicyBooks

PolicyBooks::PolicyBooks(int num_bs, int num_files)
    : num_bs_(num_bs), num_files_(num_files) {
  const auto n = static_cast<std::size_t>(num_bs) * (num_files + 1);
  last_access_.assign(n, 0);
  frequency_.assign(n, 0);
  inserted_at_.assign(n, 0);
}

void PolicyBooks::observe(int t, const RequestSlot& requests) {
  for (int b = 0; b < num_bs_; ++b) {
    for (const auto& fc : requests.counts(b)) {
      last_access_[idx(b, fc.file)] = t;
      frequency_[idx(b, fc.file)] += fc.count;
    }
  }
}

void PolicyBooks::record_transition(int t, const CacheState& before,
                                    const CacheState& after) {
  for (int b = 0; b < num_bs_; ++b) {
    for (FileId f : after.slots(b)) {
      if (f != kEmptySlot && !before.contains(b, f)) inserted_at_[idx(b, f)] = t;
    }
  }
}

}  // namespace coopcache
