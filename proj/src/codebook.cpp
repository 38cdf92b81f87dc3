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

#include "risbeam/codebook.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace risbeam {

double sine_grid_point(int i, int n)
{
    return -1.0 + (2.0 * i + 1.0) / n;
}

Codebook::Codebook(const UpaGeometry& geom, int n_az, int n_el) : geom_(geom), n_az_(n_az), n_el_(n_el)
{
    geom.validate();
    if (n_az < 1 || n_el < 1)
        throw std::invalid_argument("codebook: grid must have at least one point per axis");
    if (n_az > 4096 || n_el > 4096)
        throw std::invalid_argument("codebook: grid size exceeds 4096 per axis");

    const int m = geom.size();
    beams_.reserve(static_cast<std::size_t>(n_az) * n_el);
    matrix_.resize(m, static_cast<Eigen::Index>(n_az) * n_el);
    for (int i = 0; i < n_az; ++i)
        for (int j = 0; j < n_el; ++j) {
            const Angles dir{std::asin(sine_grid_point(i, n_az)), std::asin(sine_grid_point(j, n_el))};
            CVec psi = array_response(geom, dir.azimuth, dir.elevation).conjugate();
            matrix_.col(static_cast<Eigen::Index>(beams_.size())) = psi;
            beams_.push_back(std::move(psi));
            directions_.push_back(dir);
        }
}

const CVec& Codebook::beam(std::size_t q) const
{
    if (q >= beams_.size())
        throw std::out_of_range("codebook: beam index " + std::to_string(q) + " out of range (size " +
                                std::to_string(beams_.size()) + ")");
    return beams_[q];
}

const Angles& Codebook::direction(std::size_t q) const
{
    if (q >= directions_.size())
        throw std::out_of_range("codebook: beam index out of range");
    return directions_[q];
}

Codebook build_codebook(const UpaGeometry& geom, int n_az, int n_el)
{
    return Codebook(geom, n_az, n_el);
}

void write_codebook(std::ostream& os, const Codebook& cb)
{
    std::vector<CMat> blocks;
    blocks.reserve(cb.size());
    for (std::size_t q = 0; q < cb.size(); ++q)
        blocks.emplace_back(cb.beam(q));
    write_complex_array(os, cb.geometry().size(), 1, blocks);
}

} // namespace risbeam
