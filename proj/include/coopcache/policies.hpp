#pragma once

// Controllers behind one contract: decide() maps an observation to a
// completion in the decision-line grammar. Built-ins are deterministic; only
// oracle-class policies are handed the frozen future window.

#include <chrono>
#include <memory>
#include <string>
#include <sys/types.h>

#include "coopcache/books.hpp"
#include "coopcache/interface.hpp"
#include "coopcache/traffic.hpp"

namespace coopcache {

struct DecisionContext {
  const PolicyBooks* books = nullptr;
  const AssociationGraph* graph = nullptr;
  // Empty unless the policy uses look-ahead.
  LookaheadWindow peek;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Oracle-class policies receive the frozen future window.
  virtual int lookahead_horizon() const { return 0; }
  virtual void reset(const Instance&) {}
  virtual std::string decide(const SlotObservation& obs,
                             const DecisionContext& ctx) = 0;
};

// Heuristics: per BS, insert the requested uncached file with the highest
// current count (ties to lower id) in place of the victim; NOOP when nothing
// is insertable or the cache is not full.
std::string lru_decide(const SlotObservation& obs, const PolicyBooks& books);
std::string lfu_decide(const SlotObservation& obs, const PolicyBooks& books);
std::string fifo_decide(const SlotObservation& obs, const PolicyBooks& books);

// Best action for one BS: maximizes the look-ahead value of the global cache
// with only that BS's row changed. Ties prefer NoOp, then the smallest
// (z, f_in).
BsAction oracle_bs_action(const CacheState& cache, int bs,
                          const RequestSlot& requests, LookaheadWindow peek,
                          const AssociationGraph& graph, int horizon,
                          double discount);

JointAction lookahead_oracle_action(const SlotObservation& obs,
                                    LookaheadWindow peek,
                                    const AssociationGraph& graph, int horizon,
                                    double discount);

std::string lookahead_oracle(const SlotObservation& obs, LookaheadWindow peek,
                             const AssociationGraph& graph, int horizon,
                             double discount);

struct AdapterConfig {
  std::string command;  // run via /bin/sh -c
  std::chrono::milliseconds timeout{10000};
};

// Talks to a persistent child process over stdin/stdout using frames
// "LEN <bytes>\n<payload>" in both directions. A timeout, EOF or malformed
// reply yields an empty completion and restarts the child on the next call.
class ExternalPolicy : public Policy {
 public:
  explicit ExternalPolicy(AdapterConfig config);
  ~ExternalPolicy() override;
  ExternalPolicy(const ExternalPolicy&) = delete;
  ExternalPolicy& operator=(const ExternalPolicy&) = delete;

  std::string name() const override { return "extern"; }
  std::string decide(const SlotObservation& obs,
                     const DecisionContext& ctx) override;

  // Sends one prompt and returns the reply frame (empty on failure).
  std::string exchange(const std::string& prompt);
  int timeouts() const { return timeouts_; }
  int failures() const { return failures_; }

 private:
  void spawn();
  // Returns the child's exit code if it had already exited, else -1.
  int terminate();
  bool write_all(const std::string& data,
                 std::chrono::steady_clock::time_point deadline);
  bool read_frame(std::string& payload,
                  std::chrono::steady_clock::time_point deadline);
  // Appends available bytes to buffer_; false on timeout or EOF.
  bool fill(std::chrono::steady_clock::time_point deadline);

  AdapterConfig config_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool timed_out_ = false;
  bool answered_once_ = false;
  int timeouts_ = 0;
  int failures_ = 0;
};

// Policy factory. Accepted specs: "lru", "lfu", "fifo", "noop",
// "oracle:<H>" and "extern:<command>". `discount` is used by oracle policies,
// `timeout` by extern.
std::unique_ptr<Policy> make_policy(const std::string& spec, double discount,
                                    std::chrono::milliseconds timeout =
                                        std::chrono::milliseconds(10000));

}  // namespace coopcache
