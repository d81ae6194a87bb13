# Copyright 2026 The cometkb Authors.
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

"""Commonsense knowledge-base completion with a small transformer."""

from cometkb._core import (
    Error,
    Vocabulary,
    bleu2,
    lr_at,
    normalize_text,
    novelty,
    object_edit_distance,
    render_relation,
    run_cli,
    split_words,
    synthetic_kb,
    train_config,
    unigram_baseline_ppl,
)

__all__ = [
    "Error",
    "Vocabulary",
    "bleu2",
    "lr_at",
    "normalize_text",
    "novelty",
    "object_edit_distance",
    "render_relation",
    "run_cli",
    "split_words",
    "synthetic_kb",
    "train_config",
    "unigram_baseline_ppl",
]
__version__ = "0.1.0"
