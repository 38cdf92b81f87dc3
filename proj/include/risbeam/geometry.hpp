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

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace risbeam {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Axis-aligned box given by its center and full edge lengths.
struct Aabb {
    Vec3 center = Vec3::Zero();
    Vec3 extents = Vec3::Zero();

    Vec3 lo() const { return center - 0.5 * extents; }
    Vec3 hi() const { return center + 0.5 * extents; }
    double volume() const { return extents.x() * extents.y() * extents.z(); }
    bool contains(const Vec3& p) const;

    static Aabb from_bounds(const Vec3& lo, const Vec3& hi) { return {0.5 * (lo + hi), hi - lo}; }
};

/// True iff the open segment (a, b) passes through the open interior of the box.
/// Segments that only graze a face, edge or corner do not count as hits.
bool segment_hits_box(const Vec3& a, const Vec3& b, const Aabb& box);

} // namespace risbeam
