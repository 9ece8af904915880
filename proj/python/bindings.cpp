#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coopcache/dataset.hpp"
#include "coopcache/harness.hpp"
#include "coopcache/instance_io.hpp"
#include "coopcache/verify.hpp"

namespace py = pybind11;
using namespace coopcache;

namespace {

// Steps the frozen trajectory one completion at a time, in the rollout's
// measure, observe, act order.
class Session {
 public:
  Session(Instance instance, RewardConfig reward)
      : instance_(std::move(instance)), reward_(reward) {
    reward_.validate();
    WarmStart ws = warm_start(instance_);
    cache_ = ws.cache;
    tracker_ = ws.tracker;
    t_ = ws.next_slot;
    observe();
  }

  int slot() const { return t_; }
  bool done() const { return t_ + reward_.horizon > instance_.trace_length(); }
  std::string prompt() const { return encode(obs_); }

  std::string expert() const {
    return lookahead_oracle(obs_, peek(), instance_.graph, reward_.horizon,
                            reward_.discount);
  }

  py::dict score(const std::string& completion) const {
    JointAction expert_action = lookahead_oracle_action(
        obs_, peek(), instance_.graph, reward_.horizon, reward_.discount);
    RewardBreakdown r = score_completion(completion, obs_, peek(), instance_.graph,
                                         expert_action, reward_);
    py::dict d;
    d["delta_perf"] = r.delta_perf;
    d["penalty"] = r.penalty;
    d["total"] = r.total;
    d["classification"] = to_string(r.classification);
    d["expert_witness"] = r.expert_witness;
    d["invalid_reason"] = r.invalid_reason ? py::cast(to_string(*r.invalid_reason))
                                           : py::none();
    return d;
  }

  py::dict step(const std::string& completion) {
    if (done()) throw StructuralError("session reached the end of the trace");
    py::dict d;
    d["slot"] = t_;
    d["hit_rate"] = hit_rate(cache_, instance_.slot(t_), instance_.graph);
    JointAction action = parse(completion, obs_);
    d["valid"] = action.is_valid();
    if (action.is_valid()) {
      cache_ = apply(cache_, action, instance_.slot(t_));
      d["reason"] = py::none();
    } else {
      d["reason"] = to_string(action.invalid_info().reason);
    }
    ++t_;
    if (!done()) observe();
    return d;
  }

 private:
  LookaheadWindow peek() const { return instance_.lookahead(t_, reward_.horizon); }

  void observe() {
    tracker_.advance(instance_.slot(t_));
    obs_ = SlotObservation::build(t_, cache_, instance_.slot(t_), tracker_);
  }

  Instance instance_;
  RewardConfig reward_;
  CacheState cache_;
  FrequencyTracker tracker_;
  SlotObservation obs_;
  int t_ = 1;
};

RunConfig run_config_from_text(const std::string& text) {
  return run_config_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_coopcache, m) {
  m.doc() = "Cooperative multi-BS edge caching testbed";

  // Translators run newest first, so the base class is registered before the subclasses.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);

  py::class_<InstanceConfig>(m, "InstanceConfig")
      .def(py::init<>())
      .def_static("two_bs", &InstanceConfig::two_bs)
      .def_static("five_bs", &InstanceConfig::five_bs)
      .def_readwrite("num_bs", &InstanceConfig::num_bs)
      .def_readwrite("num_users", &InstanceConfig::num_users)
      .def_readwrite("num_files", &InstanceConfig::num_files)
      .def_readwrite("cache_capacity", &InstanceConfig::cache_capacity)
      .def_readwrite("num_groups", &InstanceConfig::num_groups)
      .def_readwrite("zipf_alpha", &InstanceConfig::zipf_alpha)
      .def_readwrite("windows", &InstanceConfig::windows)
      .def_readwrite("warmup_slots", &InstanceConfig::warmup_slots)
      .def_readwrite("rollout_slots", &InstanceConfig::rollout_slots)
      .def_readwrite("horizon_reserve", &InstanceConfig::horizon_reserve)
      .def_property_readonly("trace_length", &InstanceConfig::trace_length);

  py::class_<RewardConfig>(m, "RewardConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &RewardConfig::horizon)
      .def_readwrite("discount", &RewardConfig::discount)
      .def_readwrite("lambda_fmt", &RewardConfig::lambda_fmt)
      .def_readwrite("lambda_opp", &RewardConfig::lambda_opp)
      .def_readwrite("epsilon", &RewardConfig::epsilon);

  py::class_<Instance>(m, "Instance")
      .def_readonly("seed", &Instance::seed)
      .def_readonly("config", &Instance::config)
      .def_property_readonly("trace_length", &Instance::trace_length)
      .def("hash", [](const Instance& i) { return instance_hash(i); })
      .def("dumps", [](const Instance& i) { return dump_instance(i); });

  m.def("build_instance", &build_instance, py::arg("config"), py::arg("seed"));
  m.def("parse_instance", &parse_instance, py::arg("text"));
  m.def("zipf_pmf", &zipf_pmf, py::arg("num_files"), py::arg("alpha"));
  m.def("group_advantage",
        [](const std::vector<double>& r, double eps) { return group_advantage(r, eps); },
        py::arg("rewards"), py::arg("epsilon") = 1e-4);

  py::class_<Session>(m, "Session")
      .def(py::init<Instance, RewardConfig>(), py::arg("instance"),
           py::arg("reward") = RewardConfig{})
      .def_property_readonly("slot", &Session::slot)
      .def_property_readonly("done", &Session::done)
      .def("prompt", &Session::prompt)
      .def("expert", &Session::expert)
      .def("score", &Session::score, py::arg("completion"))
      .def("step", &Session::step, py::arg("completion"));

  // Document-returning helpers hand back JSON text; the package decodes it.
  m.def("_run", [](const std::string& config) {
    RunConfig cfg = run_config_from_text(config);
    auto reports = run_all(cfg, build_instances(cfg));
    auto arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    return arr.dump();
  });
  m.def("_summary_csv", [](const std::string& reports) {
    std::vector<EvalReport> rs;
    for (const auto& j : nlohmann::json::parse(reports)) rs.push_back(report_from_json(j));
    return summary_csv(rs);
  });
  m.def("export_sft",
        [](const Instance& inst, int records, int horizon, double discount) {
          ExportOptions o;
          o.target_records = records;
          o.horizon = horizon;
          o.discount = discount;
          return to_jsonl(generate_sft(inst, o));
        },
        py::arg("instance"), py::arg("records"), py::arg("horizon") = 10,
        py::arg("discount") = 0.9);
  m.def("_audit", [](const std::string& text) {
    AuditReport a = audit_dataset_text(text);
    return nlohmann::json{{"records", a.records},
                          {"invalid", a.invalid},
                          {"invalid_indices", a.invalid_indices},
                          {"full_cache_violations", a.full_cache_violations},
                          {"noop_fraction", a.noop_fraction},
                          {"truncated", a.truncated}}
        .dump();
  });
  m.def("_verify_pbrs", [](const Instance& inst, int slots) {
    return to_json(verify_pbrs(inst, slots, RewardConfig{})).dump();
  });
}
