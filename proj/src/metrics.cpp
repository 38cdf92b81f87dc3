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

#include "risbeam/metrics.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "risbeam/format.hpp"

namespace risbeam {

namespace {

std::size_t intersection_size(const BeamSet& a, const BeamSet& b)
{
    std::size_t n = 0;
    for (std::size_t q : a)
        n += b.count(q);
    return n;
}

std::string join(const BeamSet& set)
{
    std::string out;
    for (std::size_t q : set) {
        if (!out.empty())
            out += ' ';
        out += std::to_string(q);
    }
    return out;
}

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (double v : values) {
        if (!out.empty())
            out += ' ';
        out += format_double(v);
    }
    return out;
}

} // namespace

BeamSet threshold(const Eigen::VectorXd& scores, double delta)
{
    BeamSet set;
    for (Eigen::Index q = 0; q < scores.size(); ++q)
        if (scores[q] > delta)
            set.insert(static_cast<std::size_t>(q));
    return set;
}

double accuracy(std::span<const PredictionPair> pairs, EmptyPrediction empty)
{
    if (pairs.empty())
        throw std::invalid_argument("accuracy: no samples");
    double sum = 0.0;
    for (const auto& p : pairs) {
        if (p.predicted.empty())
            sum += p.truth.empty() ? empty.truth_empty : empty.truth_nonempty;
        else
            sum += static_cast<double>(intersection_size(p.truth, p.predicted)) /
                   static_cast<double>(p.predicted.size());
    }
    return sum / static_cast<double>(pairs.size());
}

double recall(std::span<const PredictionPair> pairs)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : pairs) {
        if (p.truth.empty())
            continue;
        sum += static_cast<double>(intersection_size(p.truth, p.predicted)) / static_cast<double>(p.truth.size());
        ++n;
    }
    if (n == 0)
        throw std::invalid_argument("recall: every sample has an empty optimal set");
    return sum / static_cast<double>(n);
}

std::vector<RatioPoint> rate_ratio_curve(std::span<const Eigen::VectorXd> scores,
                                         std::span<const std::vector<UeOracle>> oracles,
                                         std::vector<std::size_t> k_values)
{
    if (scores.size() != oracles.size())
        throw std::invalid_argument("rate_ratio_curve: scores and oracles differ in length");
    std::sort(k_values.begin(), k_values.end());
    k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());

    std::vector<RatioPoint> curve;
    for (std::size_t k : k_values) {
        double total = 0.0;
        std::size_t samples = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const std::span<const double> s(scores[i].data(), static_cast<std::size_t>(scores[i].size()));
            double per_sample = 0.0;
            std::size_t ues = 0;
            for (const auto& ue : oracles[i]) {
                const double best = ue.rates[ue.best];
                if (!(best > 0.0))
                    continue;
                per_sample += topk_trained_rate(s, k, ue.rates) / best;
                ++ues;
            }
            if (ues == 0)
                continue;
            total += per_sample / static_cast<double>(ues);
            ++samples;
        }
        if (samples == 0)
            throw std::invalid_argument("rate_ratio_curve: no sample has a candidate UE with positive rate");
        curve.push_back({k, total / static_cast<double>(samples)});
    }
    return curve;
}

void write_eval_csv(std::ostream& os, const EvalReport& report)
{
    os << "n_test,accuracy,recall\n"
       << report.n_test << ',' << format_double(report.accuracy) << ',' << format_double(report.recall) << '\n';
}

void write_eval_records_csv(std::ostream& os, const EvalReport& report)
{
    os << "scene_id,optimal_beams,predicted_beams,exhaustive_rates,achieved_rates\n";
    for (const auto& r : report.records)
        os << r.scene_id << ',' << join(r.truth) << ',' << join(r.predicted) << ',' << join(r.exhaustive_rates)
           << ',' << join(r.achieved_rates) << '\n';
}

void write_ratio_csv(std::ostream& os, std::span<const RatioPoint> curve)
{
    os << "k,ratio\n";
    for (const auto& p : curve)
        os << p.k << ',' << format_double(p.ratio) << '\n';
}

void write_learning_curve_csv(std::ostream& os, const LearningCurves& curves)
{
    os << "epoch,train_loss,test_loss\n";
    for (std::size_t e = 0; e < curves.train_loss.size(); ++e)
        os << e + 1 << ',' << format_double(curves.train_loss[e]) << ',' << format_double(curves.test_loss[e])
           << '\n';
}

} // namespace risbeam
