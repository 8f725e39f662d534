# Copyright 2026 The FedIIC Simulator Authors.
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
"""Python bindings for the FedIIC federated-learning simulator."""

from fediic._fediic import (
    ConfigError,
    ContractError,
    DataError,
    Error,
    NumericError,
    bacc,
    ce_loss,
    dala_loss,
    dala_margins,
    dynamic_temperature,
    finetune_prototypes,
    generate_keys,
    group_bacc,
    inter_loss,
    intra_loss,
    l2_partition,
    long_tail_counts,
    make_blobs,
    max_pairwise_cosine,
    prototype_objective,
    rounds_to_match_baseline,
    scl_loss,
    secure_sum,
    speedup,
    train,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DataError",
    "Error",
    "NumericError",
    "bacc",
    "ce_loss",
    "dala_loss",
    "dala_margins",
    "dynamic_temperature",
    "finetune_prototypes",
    "generate_keys",
    "group_bacc",
    "inter_loss",
    "intra_loss",
    "l2_partition",
    "long_tail_counts",
    "make_blobs",
    "max_pairwise_cosine",
    "prototype_objective",
    "rounds_to_match_baseline",
    "scl_loss",
    "secure_sum",
    "speedup",
    "train",
]
