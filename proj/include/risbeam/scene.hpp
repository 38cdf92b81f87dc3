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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "risbeam/geometry.hpp"

namespace risbeam {

struct IntRange {
    int min = 0;
    int max = 0;
};

struct Interval {
    double min = 0.0;
    double max = 0.0;
};

/// Pinhole camera. Yaw is measured in the ground plane from +x toward +y,
/// pitch is positive upwards. Pixels are square; the vertical field of view
/// follows from the aspect ratio.
struct CameraModel {
    Vec3 position = Vec3::Zero();
    double yaw = 0.0;
    double pitch = 0.0;
    double horizontal_fov = 0.0;
    int width = 0;
    int height = 0;

    double focal_px() const;
    Vec3 forward() const;
    Vec3 right() const;
    Vec3 up() const;
    void validate() const;
};

/// Pixel-space box: center, width and height.
struct BoundingBox {
    double x_center = 0.0;
    double y_center = 0.0;
    double width = 0.0;
    double height = 0.0;

    bool operator==(const BoundingBox&) const = default;
};

using BlockerSpec = Aabb;

/// RIS placement. The array normal points along (yaw, tilt) like a camera axis.
struct RisPose {
    Vec3 position = Vec3::Zero();
    double yaw = 0.0;
    double tilt = 0.0;
};

/// A UE category and its physical box: length along the heading, width, height.
struct UeClass {
    std::string name;
    Vec3 extents = Vec3::Ones();
    double weight = 1.0;
};

/// Single-bounce scatterer population used by channel synthesis.
struct ScatterConfig {
    int max_paths = 4; ///< L: LoS plus up to L-1 scattered paths
    Aabb region;
    double gain_db_min = -15.0;
    double gain_db_max = -6.0;
};

struct ScenarioConfig {
    RisPose ris;
    Vec3 bs_position = Vec3::Zero();
    Vec3 street_axis = Vec3::UnitX();
    IntRange ue_count{1, 5};
    Interval ue_speed{5.0, 15.0};
    Aabb ue_region;
    std::vector<UeClass> classes;
    std::vector<BlockerSpec> blockers;
    std::vector<CameraModel> cameras;
    ScatterConfig scatter;
    std::uint64_t master_seed = 0;

    int class_count() const { return static_cast<int>(classes.size()); }
    void validate() const;
};

struct Ue {
    int id = 0;
    Vec3 position = Vec3::Zero();
    int class_id = 0;
    Vec3 extents = Vec3::Ones();
    Vec3 heading = Vec3::UnitX(); ///< unit vector along the vehicle length
    double speed = 0.0;           ///< signed, along heading; informational only
};

struct Scene {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    std::vector<Ue> ues;
    std::vector<BlockerSpec> blockers;
    RisPose ris;
    Vec3 bs_position = Vec3::Zero();
    std::vector<CameraModel> cameras;
    ScatterConfig scatter;
};

/// Deterministic in (config.master_seed, scene_index) only.
Scene generate_scene(const ScenarioConfig& config, std::uint64_t scene_index);

bool los_visible(std::span<const BlockerSpec> blockers, const Vec3& a, const Vec3& b);
inline bool los_visible(const Scene& scene, const Vec3& a, const Vec3& b)
{
    return los_visible(scene.blockers, a, b);
}

/// Projects the 8 corners of the UE box and returns their clipped image hull.
std::optional<BoundingBox> project_bbox(const CameraModel& camera, const Ue& ue);

/// In frame and not hidden behind a blocker.
bool visible_in_camera(const Scene& scene, const CameraModel& camera, const Ue& ue);

void to_json(nlohmann::json& j, const Scene& scene);
void from_json(const nlohmann::json& j, Scene& scene);
void to_json(nlohmann::json& j, const ScenarioConfig& config);
void from_json(const nlohmann::json& j, ScenarioConfig& config);

/// One JSON object per line.
void write_scenes(std::ostream& os, std::span<const Scene> scenes);
std::vector<Scene> read_scenes(std::istream& is);

} // namespace risbeam
