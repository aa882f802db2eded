// Copyright 2026 The RIM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rim/agent.hpp"
#include "rim/envs.hpp"
#include "rim/errors.hpp"
#include "rim/experiment.hpp"
#include "rim/neural.hpp"

namespace py = pybind11;
using namespace rim;

namespace {

nn::Activation ParseActivation(const std::string& name) {
  if (name == "tanh") return nn::Activation::kTanh;
  if (name == "identity") return nn::Activation::kIdentity;
  throw ConfigError("unknown output activation '" + name + "'");
}

std::string SettingText(const py::handle& value) {
  if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
    std::string out;
    for (const auto& item : value) {
      if (!out.empty()) out += ",";
      out += py::str(item).cast<std::string>();
    }
    return out;
  }
  if (py::isinstance<py::bool_>(value)) return value.cast<bool>() ? "1" : "0";
  return py::str(value).cast<std::string>();
}

exp::ExperimentConfig ConfigFromKwargs(const py::kwargs& kwargs) {
  exp::ExperimentConfig cfg;
  for (const auto& [key, value] : kwargs) {
    exp::ApplySetting(cfg, key.cast<std::string>(), SettingText(value));
  }
  cfg.Validate();
  return cfg;
}

py::dict RowDict(const exp::LogRow& r) {
  py::dict d;
  d["frames"] = r.frames;
  d["best_pop_score"] = r.best_pop_score;
  d["rl_score"] = r.rl_score;
  d["imitator_score"] = r.imitator_score;
  return d;
}

py::dict EventDict(const exp::Event& e) {
  py::dict d;
  d["generation"] = e.generation;
  d["frames"] = e.frames;
  d["kind"] = exp::EventKindName(e.kind);
  d["member_index"] = e.member_index;
  d["pre_l1"] = e.pre_l1;
  d["post_l1"] = e.post_l1;
  d["next_fitness"] = e.next_fitness;
  d["selected"] = e.selected;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rimpy, m) {
  m.doc() = "Recruitment-imitation evolutionary reinforcement learning";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

  py::class_<nn::MlpParams>(m, "Mlp")
      .def_static(
          "random",
          [](std::vector<std::size_t> dims, const std::string& output, std::uint64_t seed) {
            Rng rng(seed);
            return nn::MlpParams::RandomInit(std::move(dims), ParseActivation(output), rng);
          },
          py::arg("dims"), py::arg("output") = "tanh", py::arg("seed") = 0)
      .def_readonly("dims", &nn::MlpParams::dims)
      .def_property_readonly("num_params", &nn::MlpParams::num_params)
      .def("predict", py::overload_cast<const nn::MlpParams&, const nn::Matrix&>(&nn::Predict),
           py::arg("inputs"), "Forward pass on a (features, batch) array.")
      .def("predict_one", py::overload_cast<const nn::MlpParams&, const nn::Vector&>(&nn::Predict),
           py::arg("input"))
      .def("flatten", &nn::Flatten)
      .def("assign_flat", &nn::AssignFlat, py::arg("flat"))
      .def("bit_equal", &nn::BitEqual, py::arg("other"))
      .def(py::pickle(
          [](const nn::MlpParams& p) {
            std::ostringstream out;
            nn::SaveParams(out, p);
            return py::bytes(out.str());
          },
          [](const py::bytes& data) {
            std::istringstream in(data.cast<std::string>());
            return nn::LoadParams(in);
          }));

  m.def(
      "soft_update",
      [](nn::MlpParams target, const nn::MlpParams& source, double tau) {
        nn::SoftUpdate(target, source, tau);
        return target;
      },
      py::arg("target"), py::arg("source"), py::arg("tau"),
      "Returns (1 - tau) * target + tau * source.");

  py::class_<envs::EnvSpec>(m, "EnvSpec")
      .def_readonly("name", &envs::EnvSpec::name)
      .def_readonly("obs_dim", &envs::EnvSpec::obs_dim)
      .def_readonly("act_dim", &envs::EnvSpec::act_dim)
      .def_readonly("max_episode_steps", &envs::EnvSpec::max_episode_steps);

  py::class_<envs::Environment>(m, "Environment")
      .def_property_readonly("spec", &envs::Environment::spec)
      .def("reset", &envs::Environment::Reset, py::arg("seed"))
      .def(
          "step",
          [](envs::Environment& env, const nn::Vector& action) {
            auto r = env.Step(action);
            return py::make_tuple(r.observation, r.reward, r.done, r.reached_goal);
          },
          py::arg("action"), "Returns (observation, reward, done, reached_goal).");

  m.def("make_env", &envs::MakeEnv, py::arg("name"));
  m.def("env_names", &envs::EnvNames);
  m.def("point_mass_controller", &envs::PointMassController, py::arg("observation"));

  py::class_<rl::DualPolicyAgent>(m, "Agent")
      .def(py::init([](std::size_t obs_dim, std::size_t act_dim, std::uint64_t seed,
                       const py::kwargs& kwargs) {
             exp::ExperimentConfig cfg = ConfigFromKwargs(kwargs);
             return rl::DualPolicyAgent(obs_dim, act_dim, exp::MakeAgentConfig(cfg), seed);
           }),
           py::arg("obs_dim"), py::arg("act_dim"), py::arg("seed") = 0,
           "Keyword arguments use the experiment config keys (hidden, gamma, tau0, ...).")
      .def_property_readonly("gradient_actor", &rl::DualPolicyAgent::gradient_actor)
      .def_property_readonly("recruited_actor", &rl::DualPolicyAgent::recruited_actor)
      .def_property_readonly("critic", &rl::DualPolicyAgent::critic)
      .def_property_readonly("train_steps", &rl::DualPolicyAgent::train_steps)
      .def("recruit", &rl::DualPolicyAgent::Recruit, py::arg("champion"))
      .def("select_action", &rl::DualPolicyAgent::SelectAction, py::arg("state"))
      .def("explore_action", &rl::DualPolicyAgent::ExploreAction, py::arg("state"))
      .def("q_value", &rl::DualPolicyAgent::QValue, py::arg("state"), py::arg("action"));

  py::class_<exp::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init(&ConfigFromKwargs))
      .def("to_dict", &exp::ConfigToMap)
      .def("__repr__", [](const exp::ExperimentConfig& c) {
        std::string out = "ExperimentConfig(";
        bool first = true;
        for (const auto& [k, v] : exp::ConfigToMap(c)) {
          out += (first ? "" : ", ") + k + "=" + v;
          first = false;
        }
        return out + ")";
      });
  m.def("config_keys", &exp::ConfigKeys);
  m.def("load_config", [](const std::filesystem::path& p) { return exp::LoadConfigFile(p); },
        py::arg("path"));
  m.def("variant_names", [] {
    std::vector<std::string> names;
    for (auto v : exp::AllVariants()) names.push_back(exp::VariantName(v));
    return names;
  });
  m.def("eval_seeds", &exp::EvalSeeds, py::arg("config"));

  py::class_<exp::RunLog>(m, "RunLog")
      .def_readonly("variant", &exp::RunLog::variant)
      .def_readonly("env", &exp::RunLog::env)
      .def_readonly("seed", &exp::RunLog::seed)
      .def_readonly("training_frames", &exp::RunLog::training_frames)
      .def_readonly("population_frames", &exp::RunLog::population_frames)
      .def_readonly("agent_frames", &exp::RunLog::agent_frames)
      .def_readonly("evaluation_frames", &exp::RunLog::evaluation_frames)
      .def_readonly("generations", &exp::RunLog::generations)
      .def_readonly("train_steps", &exp::RunLog::train_steps)
      .def_readonly("goal_hits", &exp::RunLog::goal_hits)
      .def_property_readonly("rows",
                             [](const exp::RunLog& log) {
                               py::list out;
                               for (const auto& r : log.rows) out.append(RowDict(r));
                               return out;
                             })
      .def_property_readonly("events",
                             [](const exp::RunLog& log) {
                               py::list out;
                               for (const auto& e : log.events) out.append(EventDict(e));
                               return out;
                             })
      .def_property_readonly("final_score", &exp::FinalScore);

  m.def("run", py::overload_cast<const exp::ExperimentConfig&>(&exp::Run), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<exp::SummaryRow>(m, "SummaryRow")
      .def_readonly("variant", &exp::SummaryRow::variant)
      .def_readonly("runs", &exp::SummaryRow::runs)
      .def_readonly("max", &exp::SummaryRow::max)
      .def_readonly("mean", &exp::SummaryRow::mean)
      .def_readonly("median", &exp::SummaryRow::median)
      .def_readonly("std_percent", &exp::SummaryRow::std_percent);

  py::class_<exp::SelectionRate>(m, "SelectionRate")
      .def_readonly("events", &exp::SelectionRate::events)
      .def_readonly("selected_fraction", &exp::SelectionRate::selected_fraction)
      .def_readonly("discarded_fraction", &exp::SelectionRate::discarded_fraction);

  m.def(
      "aggregate_seeds",
      [](const std::vector<exp::RunLog>& logs) { return exp::AggregateSeeds(logs); },
      py::arg("logs"));
  m.def(
      "selection_rate",
      [](const std::vector<exp::RunLog>& logs) { return exp::SelectionRateReport(logs); },
      py::arg("logs"), "None when no imitation event has been resolved.");
  m.def(
      "summary_csv",
      [](const std::vector<exp::RunLog>& logs) {
        return exp::SummaryCsv(exp::AggregateSeeds(logs));
      },
      py::arg("logs"));
  m.def(
      "smooth",
      [](const std::vector<double>& series, std::size_t window) {
        return exp::Smooth(series, window);
      },
      py::arg("series"), py::arg("window") = 10);
  m.def("write_run_files", &exp::WriteRunFiles, py::arg("log"), py::arg("dir"));
  m.def("load_run_files", &exp::LoadRunFiles, py::arg("runlog_csv"));
}
