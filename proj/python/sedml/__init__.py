# Copyright 2026 The SEDML Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Two-server private label aggregation."""

import json

from ._sedml import (
    InfeasibleError,
    MaxStrategy,
    ProtocolConfig,
    ProtocolError,
    RangeError,
    UsageError,
    closed_form_epsilon,
    epsilon,
    fixed_point_encode,
    plaintext_oracle,
    reconstruct,
    run_sample,
    scmp,
    share,
    solve_noise,
)
from ._sedml import run_experiment as _run_experiment


def run_experiment(config, samples, error_rate=0.0, delta=1e-5):
    """Runs a synthetic-teacher experiment and returns the report as a dict."""
    return json.loads(_run_experiment(config, samples, error_rate, delta))


__all__ = [
    "InfeasibleError",
    "MaxStrategy",
    "ProtocolConfig",
    "ProtocolError",
    "RangeError",
    "UsageError",
    "closed_form_epsilon",
    "epsilon",
    "fixed_point_encode",
    "plaintext_oracle",
    "reconstruct",
    "run_experiment",
    "run_sample",
    "scmp",
    "share",
    "solve_noise",
]
