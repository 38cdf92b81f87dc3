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

#include "risbeam/rate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace risbeam {

void LinkChannels::validate() const
{
    if (h_r.cols != 1)
        throw std::invalid_argument("link: h_R must be a vector channel");
    if (h_t.rows != h_r.rows)
        throw std::invalid_argument("link: h_R and H_T disagree on the RIS element count");
    if (h_t.subcarriers() != h_r.subcarriers() || h_r.subcarriers() < 1)
        throw std::invalid_argument("link: h_R and H_T disagree on the subcarrier count");
    if (f.size() != h_t.cols)
        throw std::invalid_argument("link: BS beam length does not match H_T columns");
    if (std::abs(f.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("link: BS beam must have unit norm");
    if (!(snr > 0.0))
        throw std::invalid_argument("link: SNR must be positive");
}

std::vector<CVec> cascade(const LinkChannels& link)
{
    link.validate();
    std::vector<CVec> g;
    g.reserve(link.h_r.bins.size());
    for (std::size_t k = 0; k < link.h_r.bins.size(); ++k)
        g.emplace_back(link.h_r.bins[k].col(0).cwiseProduct(link.h_t.bins[k] * link.f));
    return g;
}

double achievable_rate(std::span<const CVec> cascaded, const CVec& psi, double snr)
{
    if (cascaded.empty())
        throw std::invalid_argument("achievable_rate: no subcarriers");
    double sum = 0.0;
    for (const auto& g : cascaded) {
        if (g.size() != psi.size())
            throw std::invalid_argument("achievable_rate: beam length does not match the channel");
        const cdouble y = (g.array() * psi.array()).sum();
        sum += std::log2(1.0 + snr * std::norm(y));
    }
    return sum / static_cast<double>(cascaded.size());
}

double achievable_rate(const LinkChannels& link, const CVec& psi)
{
    for (Eigen::Index m = 0; m < psi.size(); ++m)
        if (std::abs(std::abs(psi[m]) - 1.0) > 1e-9)
            throw std::invalid_argument("achievable_rate: reflection coefficients must be unit modulus");
    const auto g = cascade(link);
    return achievable_rate(g, psi, link.snr);
}

std::vector<double> beam_rates(const LinkChannels& link, const Codebook& cb)
{
    const auto g = cascade(link);
    if (g.front().size() != cb.geometry().size())
        throw std::invalid_argument("beam_rates: codebook and channel disagree on M");

    CMat stacked(static_cast<Eigen::Index>(g.size()), g.front().size());
    for (std::size_t k = 0; k < g.size(); ++k)
        stacked.row(static_cast<Eigen::Index>(k)) = g[k].transpose();
    const Eigen::MatrixXd power = (stacked * cb.matrix()).cwiseAbs2();

    std::vector<double> rates(cb.size());
    for (std::size_t q = 0; q < cb.size(); ++q) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < power.rows(); ++k)
            sum += std::log2(1.0 + link.snr * power(k, static_cast<Eigen::Index>(q)));
        rates[q] = sum / static_cast<double>(power.rows());
    }
    return rates;
}

std::size_t argmax_lowest(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument("argmax over an empty range");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;
    return best;
}

std::size_t best_beam(const LinkChannels& link, const Codebook& cb)
{
    return argmax_lowest(beam_rates(link, cb));
}

std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k)
{
    if (k < 1 || k > scores.size())
        throw std::invalid_argument("top_k: k must lie in [1, |Q|]");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b])
                              return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(k);
    return idx;
}

double topk_trained_rate(std::span<const double> scores, std::size_t k, std::span<const double> rates)
{
    if (scores.size() != rates.size())
        throw std::invalid_argument("topk_trained_rate: scores and rates differ in length");
    double best = -1.0;
    for (std::size_t q : top_k_indices(scores, k))
        best = std::max(best, rates[q]);
    return best;
}

double topk_trained_rate(std::span<const double> scores, std::size_t k, const LinkChannels& link,
                         const Codebook& cb)
{
    return topk_trained_rate(scores, k, beam_rates(link, cb));
}

} // namespace risbeam
