// Copyright 2026 The RecZilla Authors.
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

// Glue between fitted models and the metric functions.

#pragma once

#include <vector>

#include "reczilla/algorithms.hpp"
#include "reczilla/metrics.hpp"
#include "reczilla/sparse.hpp"

namespace reczilla {

/// Ranked lists for every user with held-out interactions. Training
/// popularity comes from `train`; seen items are excluded.
EvaluationContext build_evaluation_context(const FittedModel& model, const CsrMatrix& train,
                                           const CsrMatrix& heldout, int list_length);

MetricVector evaluate_model(const FittedModel& model, const CsrMatrix& train, const CsrMatrix& heldout,
                            const std::vector<MetricSpec>& specs);

/// Largest cutoff of a spec list (0 when empty).
int max_cutoff(const std::vector<MetricSpec>& specs);

}  // namespace reczilla
