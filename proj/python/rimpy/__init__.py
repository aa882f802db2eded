# Copyright 2026 The RIM Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Recruitment-imitation evolutionary reinforcement learning."""

from rimpy._rimpy import (
    Agent,
    ConfigError,
    ContractViolation,
    EnvSpec,
    Environment,
    ExperimentConfig,
    Mlp,
    NumericalError,
    RunLog,
    SelectionRate,
    SummaryRow,
    aggregate_seeds,
    config_keys,
    env_names,
    eval_seeds,
    load_config,
    load_run_files,
    make_env,
    point_mass_controller,
    run,
    selection_rate,
    smooth,
    soft_update,
    summary_csv,
    variant_names,
    write_run_files,
)

__all__ = [
    "Agent",
    "ConfigError",
    "ContractViolation",
    "EnvSpec",
    "Environment",
    "ExperimentConfig",
    "Mlp",
    "NumericalError",
    "RunLog",
    "SelectionRate",
    "SummaryRow",
    "aggregate_seeds",
    "config_keys",
    "env_names",
    "eval_seeds",
    "load_config",
    "load_run_files",
    "make_env",
    "point_mass_controller",
    "run",
    "selection_rate",
    "smooth",
    "soft_update",
    "summary_csv",
    "variant_names",
    "write_run_files",
]
