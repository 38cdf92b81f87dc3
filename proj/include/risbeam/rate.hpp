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

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "risbeam/channel.hpp"
#include "risbeam/codebook.hpp"

namespace risbeam {

/// Channels of one BS -> RIS -> UE link.
struct LinkChannels {
    FreqChannel h_r; ///< RIS <-> UE, M x 1 per subcarrier
    FreqChannel h_t; ///< BS -> RIS, M x N per subcarrier
    CVec f;          ///< BS beam, unit norm
    double snr = 1.0;

    int elements() const { return h_r.rows; }
    void validate() const;
};

/// Sorted, duplicate-free beam indices.
using BeamSet = std::set<std::size_t>;

/// g_k = h_R,k (.) (H_T,k f), so that g_k^T psi = h_R,k^T diag(psi) H_T,k f.
std::vector<CVec> cascade(const LinkChannels& link);

double achievable_rate(const LinkChannels& link, const CVec& psi);
double achievable_rate(std::span<const CVec> cascaded, const CVec& psi, double snr);

/// Rate of every codebook beam.
std::vector<double> beam_rates(const LinkChannels& link, const Codebook& cb);

/// First index of the maximum.
std::size_t argmax_lowest(std::span<const double> values);

/// Exhaustive search; lowest index wins ties.
std::size_t best_beam(const LinkChannels& link, const Codebook& cb);

/// Indices of the k largest scores, descending, lower index first on ties.
std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k);

/// Best rate found by sweeping only the k highest-scoring beams.
double topk_trained_rate(std::span<const double> scores, std::size_t k, std::span<const double> rates);
double topk_trained_rate(std::span<const double> scores, std::size_t k, const LinkChannels& link,
                         const Codebook& cb);

} // namespace risbeam
