// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "risbeam/link.hpp"
#include "risbeam/rate.hpp"
#include "risbeam/setnet.hpp"

namespace risbeam {

/// {q : scores[q] > delta}; strict, so a score of exactly delta is rejected.
BeamSet threshold(const Eigen::VectorXd& scores, double delta = 0.5);

struct PredictionPair {
    BeamSet truth;     ///< Q*
    BeamSet predicted; ///< Q-hat
};

/// Per-sample score for an empty prediction, where |Q* n Q^| / |Q^| is 0/0.
struct EmptyPrediction {
    double truth_empty = 1.0;
    double truth_nonempty = 0.0;
};

/// Mean per-sample precision |Q* n Q^| / |Q^|.
double accuracy(std::span<const PredictionPair> pairs, EmptyPrediction empty = {});

/// Mean per-sample |Q* n Q^| / |Q*| over samples with non-empty Q*.
double recall(std::span<const PredictionPair> pairs);

struct SampleRecord {
    std::uint64_t scene_id = 0;
    BeamSet truth;
    BeamSet predicted;
    std::vector<double> exhaustive_rates; ///< per candidate UE
    std::vector<double> achieved_rates;   ///< sweeping only Q^ (0 when empty)
};

struct EvalReport {
    double accuracy = 0.0;
    double recall = 0.0;
    std::size_t n_test = 0;
    std::vector<SampleRecord> records;
};

struct RatioPoint {
    std::size_t k = 0;
    double ratio = 0.0;
};

/// Mean over samples of the mean over candidate UEs of
/// topk_trained_rate / exhaustive rate. Output sorted by k, duplicates merged.
std::vector<RatioPoint> rate_ratio_curve(std::span<const Eigen::VectorXd> scores,
                                         std::span<const std::vector<UeOracle>> oracles,
                                         std::vector<std::size_t> k_values);

void write_eval_csv(std::ostream& os, const EvalReport& report);
void write_eval_records_csv(std::ostream& os, const EvalReport& report);
void write_ratio_csv(std::ostream& os, std::span<const RatioPoint> curve);
void write_learning_curve_csv(std::ostream& os, const LearningCurves& curves);

} // namespace risbeam
