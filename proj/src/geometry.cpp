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

#include "risbeam/geometry.hpp"

#include <algorithm>
#include <utility>

namespace risbeam {

bool Aabb::contains(const Vec3& p) const
{
    const Vec3 l = lo();
    const Vec3 h = hi();
    for (int i = 0; i < 3; ++i)
        if (p[i] < l[i] || p[i] > h[i])
            return false;
    return true;
}

bool segment_hits_box(const Vec3& a_in, const Vec3& b_in, const Aabb& box)
{
    // Fixed endpoint order so the test is bitwise symmetric in (a, b).
    const bool swap = std::lexicographical_compare(b_in.data(), b_in.data() + 3, a_in.data(), a_in.data() + 3);
    const Vec3& a = swap ? b_in : a_in;
    const Vec3& b = swap ? a_in : b_in;

    const Vec3 lo = box.lo();
    const Vec3 hi = box.hi();
    const Vec3 d = b - a;

    double t_enter = 0.0;
    double t_exit = 1.0;
    for (int i = 0; i < 3; ++i) {
        if (d[i] == 0.0) {
            if (!(a[i] > lo[i] && a[i] < hi[i]))
                return false;
            continue;
        }
        double t0 = (lo[i] - a[i]) / d[i];
        double t1 = (hi[i] - a[i]) / d[i];
        if (t0 > t1)
            std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (!(t_enter < t_exit))
            return false;
    }
    return t_enter < t_exit;
}

} // namespace risbeam
