# Copyright 2026 The madapt Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Multi-modal domain adaptation for visual question answering."""

from ._madapt import (
    Config,
    ConfigError,
    DivergenceError,
    FeatureFileError,
    compare_methods,
    config_keys,
    gaussian_kernel,
    load_features,
    lr_at,
    mmd_sq,
    probe_domain_gap,
    vqa_accuracy,
    write_benchmark,
)

__all__ = [
    "Config",
    "ConfigError",
    "DivergenceError",
    "FeatureFileError",
    "compare_methods",
    "config_keys",
    "gaussian_kernel",
    "load_features",
    "lr_at",
    "mmd_sq",
    "probe_domain_gap",
    "vqa_accuracy",
    "write_benchmark",
]
