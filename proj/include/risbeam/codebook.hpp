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
#include <iosfwd>
#include <vector>

#include "risbeam/channel.hpp"

namespace risbeam {

/// Steering-grid reflection codebook. Beams are indexed row-major over
/// (azimuth, elevation): index = i_az * n_el + i_el, zero-based.
class Codebook {
public:
    Codebook(const UpaGeometry& geom, int n_az, int n_el);

    std::size_t size() const { return beams_.size(); }
    int n_az() const { return n_az_; }
    int n_el() const { return n_el_; }
    const UpaGeometry& geometry() const { return geom_; }

    /// Throws std::out_of_range for q >= size().
    const CVec& beam(std::size_t q) const;
    const Angles& direction(std::size_t q) const;

    /// M x |Q|, one beam per column.
    const CMat& matrix() const { return matrix_; }

private:
    UpaGeometry geom_;
    int n_az_;
    int n_el_;
    std::vector<CVec> beams_;
    std::vector<Angles> directions_;
    CMat matrix_;
};

/// Grid point i of n equally spaced cells over (-1, 1) in sine space.
double sine_grid_point(int i, int n);

Codebook build_codebook(const UpaGeometry& geom, int n_az, int n_el);

void write_codebook(std::ostream& os, const Codebook& cb);

} // namespace risbeam
