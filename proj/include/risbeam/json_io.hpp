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

// JSON adapters for the Eigen-backed geometry types.

#include "json.hpp"

#include "risbeam/geometry.hpp"

namespace risbeam {

inline nlohmann::json vec3_to_json(const Vec3& v)
{
    return nlohmann::json::array({v.x(), v.y(), v.z()});
}

Vec3 vec3_from_json(const nlohmann::json& j);

nlohmann::json aabb_to_json(const Aabb& box);
Aabb aabb_from_json(const nlohmann::json& j);

/// Overwrites `out` with j[key] when the key is present.
template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end())
        out = it->template get<T>();
}

} // namespace risbeam
