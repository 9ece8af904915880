#include <charconv>

#include "coopcache/policies.hpp"
#include "coopcache/reward.hpp"

namespace coopcache {

namespace {

// Scores closer than this are treated as equal so tie-breaking does not
// depend on floating-point summation noise.
constexpr double kTieTolerance = 1e-12;

class HeuristicPolicy : public Policy {
 public:
  using DecideFn = std::string (*)(const SlotObservation&, const PolicyBooks&);
  HeuristicPolicy(std::string name, DecideFn fn)
      : name_(std::move(name)), fn_(fn) {}

  std::string name() const override { return name_; }
  std::string decide(const SlotObservation& obs,
                     const DecisionContext& ctx) override {
    if (ctx.books == nullptr) throw StructuralError(name_ + " needs books");
    return fn_(obs, *ctx.books);
  }

 private:
  std::string name_;
  DecideFn fn_;
};

class NoopPolicy : public Policy {
 public:
  std::string name() const override { return "noop"; }
  std::string decide(const SlotObservation& obs,
                     const DecisionContext&) override {
    return serialize(JointAction::all_noop(obs.num_bs()));
  }
};

class OraclePolicy : public Policy {
 public:
  OraclePolicy(int horizon, double discount)
      : horizon_(horizon), discount_(discount) {}

  std::string name() const override {
    return "oracle:" + std::to_string(horizon_);
  }
  int lookahead_horizon() const override { return horizon_; }
  std::string decide(const SlotObservation& obs,
                     const DecisionContext& ctx) override {
    if (ctx.graph == nullptr) throw StructuralError("oracle needs the graph");
    return lookahead_oracle(obs, ctx.peek, *ctx.graph, horizon_, discount_);
  }

 private:
  int horizon_;
  double discount_;
};

}  // namespace

BsAction oracle_bs_action(const CacheState& cache, int bs,
                          const RequestSlot& requests, LookaheadWindow peek,
                          const AssociationGraph& graph, int horizon,
                          double discount) {
  if (static_cast<int>(peek.size()) < horizon) {
    throw StructuralError("oracle: look-ahead window shorter than horizon");
  }
  auto actions = feasible_actions(cache, bs, requests);
  BsAction best = NoOp{};
  double best_score = lookahead_value(cache, peek, graph, horizon, discount);
  CacheState scratch = cache;
  for (const auto& action : actions) {
    const auto* swap = std::get_if<Replace>(&action);
    if (swap == nullptr) continue;
    scratch.put(bs, swap->slot, swap->in);
    double score = lookahead_value(scratch, peek, graph, horizon, discount);
    scratch.put(bs, swap->slot, swap->out);
    if (score > best_score + kTieTolerance) {
      best = action;
      best_score = score;
    }
  }
  return best;
}

JointAction lookahead_oracle_action(const SlotObservation& obs,
                                    LookaheadWindow peek,
                                    const AssociationGraph& graph, int horizon,
                                    double discount) {
  std::vector<BsAction> per_bs;
  per_bs.reserve(static_cast<std::size_t>(obs.num_bs()));
  for (int b = 0; b < obs.num_bs(); ++b) {
    per_bs.push_back(oracle_bs_action(obs.cache, b, obs.requests, peek, graph,
                                      horizon, discount));
  }
  return JointAction::valid(std::move(per_bs));
}

std::string lookahead_oracle(const SlotObservation& obs, LookaheadWindow peek,
                             const AssociationGraph& graph, int horizon,
                             double discount) {
  return serialize(
      lookahead_oracle_action(obs, peek, graph, horizon, discount));
}

std::unique_ptr<Policy> make_policy(const std::string& spec, double discount,
                                    std::chrono::milliseconds timeout) {
  if (spec == "lru") return std::make_unique<HeuristicPolicy>("lru", lru_decide);
  if (spec == "lfu") return std::make_unique<HeuristicPolicy>("lfu", lfu_decide);
  if (spec == "fifo") {
    return std::make_unique<HeuristicPolicy>("fifo", fifo_decide);
  }
  if (spec == "noop") return std::make_unique<NoopPolicy>();
  if (spec.rfind("oracle:", 0) == 0) {
    std::string_view h(spec);
    h.remove_prefix(7);
    int horizon = 0;
    auto [p, ec] = std::from_chars(h.data(), h.data() + h.size(), horizon);
    if (ec != std::errc() || p != h.data() + h.size() || horizon < 1) {
      throw ConfigError("bad oracle horizon in policy spec '" + spec + "'");
    }
    if (!(discount > 0.0 && discount <= 1.0)) {
      throw ConfigError("oracle discount must be in (0, 1]");
    }
    return std::make_unique<OraclePolicy>(horizon, discount);
  }
  if (spec.rfind("extern:", 0) == 0) {
    std::string command = spec.substr(7);
    if (command.empty()) throw ConfigError("extern policy needs a command");
    return std::make_unique<ExternalPolicy>(AdapterConfig{command, timeout});
  }
  throw ConfigError("unknown policy spec '" + spec + "'");
}

}  // namespace coopcache
