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

#include "risbeam/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "risbeam/json_io.hpp"
#include "risbeam/random.hpp"

namespace risbeam {

namespace {

constexpr double kNearPlane = 0.05; // m

} // namespace

double CameraModel::focal_px() const
{
    return 0.5 * width / std::tan(0.5 * horizontal_fov);
}

Vec3 CameraModel::forward() const
{
    return {std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch)};
}

Vec3 CameraModel::right() const
{
    return {std::sin(yaw), -std::cos(yaw), 0.0};
}

Vec3 CameraModel::up() const
{
    return right().cross(forward());
}

void CameraModel::validate() const
{
    if (!(horizontal_fov > 0.0 && horizontal_fov < kPi))
        throw std::invalid_argument("camera: horizontal_fov must lie in (0, pi)");
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("camera: image width and height must be positive");
}

void ScenarioConfig::validate() const
{
    if (ue_count.min < 0 || ue_count.min > ue_count.max)
        throw std::invalid_argument("scenario: ue_count must satisfy 0 <= min <= max");
    if (!(ue_region.volume() > 0.0) || (ue_region.extents.array() <= 0.0).any())
        throw std::invalid_argument("scenario: ue_region has zero volume");
    if (ue_region.contains(bs_position))
        throw std::invalid_argument("scenario: ue_region contains the BS position");
    if (ue_speed.min > ue_speed.max)
        throw std::invalid_argument("scenario: ue_speed range is inverted");
    const Vec3 axis(street_axis.x(), street_axis.y(), 0.0);
    if (axis.norm() == 0.0)
        throw std::invalid_argument("scenario: street_axis needs a horizontal component");
    if (classes.empty())
        throw std::invalid_argument("scenario: at least one UE class is required");
    double weight_sum = 0.0;
    for (const auto& c : classes) {
        if ((c.extents.array() <= 0.0).any())
            throw std::invalid_argument("scenario: UE class '" + c.name + "' needs positive extents");
        if (c.weight < 0.0)
            throw std::invalid_argument("scenario: UE class weights must be non-negative");
        weight_sum += c.weight;
    }
    if (!(weight_sum > 0.0))
        throw std::invalid_argument("scenario: UE class weights sum to zero");
    for (const auto& b : blockers)
        if ((b.extents.array() <= 0.0).any())
            throw std::invalid_argument("scenario: blocker extents must be strictly positive");
    for (const auto& cam : cameras)
        cam.validate();
    if (scatter.max_paths < 1)
        throw std::invalid_argument("scenario: scatter.max_paths must be >= 1");
    if (scatter.gain_db_min > scatter.gain_db_max)
        throw std::invalid_argument("scenario: scatter gain range is inverted");
}

Scene generate_scene(const ScenarioConfig& config, std::uint64_t scene_index)
{
    config.validate();

    Scene scene;
    scene.index = scene_index;
    scene.seed = derive_seed(config.master_seed, Stream::scene, scene_index);
    scene.blockers = config.blockers;
    scene.ris = config.ris;
    scene.bs_position = config.bs_position;
    scene.cameras = config.cameras;
    scene.scatter = config.scatter;

    Rng rng(scene.seed);
    std::uniform_int_distribution<int> count_dist(config.ue_count.min, config.ue_count.max);
    std::vector<double> weights;
    for (const auto& c : config.classes)
        weights.push_back(c.weight);
    std::discrete_distribution<int> class_dist(weights.begin(), weights.end());
    std::uniform_real_distribution<double> speed_dist(config.ue_speed.min, config.ue_speed.max);
    std::bernoulli_distribution direction(0.5);

    const Vec3 lo = config.ue_region.lo();
    const Vec3 hi = config.ue_region.hi();
    const Vec3 heading = Vec3(config.street_axis.x(), config.street_axis.y(), 0.0).normalized();

    const int count = count_dist(rng);
    scene.ues.reserve(count);
    for (int i = 0; i < count; ++i) {
        Ue ue;
        ue.id = i;
        for (int a = 0; a < 3; ++a)
            ue.position[a] = std::uniform_real_distribution<double>(lo[a], hi[a])(rng);
        ue.class_id = class_dist(rng);
        ue.extents = config.classes[ue.class_id].extents;
        ue.heading = heading;
        ue.speed = speed_dist(rng) * (direction(rng) ? 1.0 : -1.0);
        scene.ues.push_back(ue);
    }
    return scene;
}

bool los_visible(std::span<const BlockerSpec> blockers, const Vec3& a, const Vec3& b)
{
    return std::none_of(blockers.begin(), blockers.end(),
                        [&](const BlockerSpec& box) { return segment_hits_box(a, b, box); });
}

std::optional<BoundingBox> project_bbox(const CameraModel& camera, const Ue& ue)
{
    const Vec3 fwd = camera.forward();
    const Vec3 right = camera.right();
    const Vec3 up = camera.up();

    if ((ue.position - camera.position).dot(fwd) <= 0.0)
        return std::nullopt;

    const Vec3 along = ue.heading.normalized();
    Vec3 side = Vec3::UnitZ().cross(along);
    if (side.norm() == 0.0)
        side = Vec3::UnitY();
    side.normalize();
    const Vec3 vert = along.cross(side);

    const double f = camera.focal_px();
    const double cx = 0.5 * camera.width;
    const double cy = 0.5 * camera.height;

    double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
    for (int corner = 0; corner < 8; ++corner) {
        const double sa = (corner & 1) ? 0.5 : -0.5;
        const double sb = (corner & 2) ? 0.5 : -0.5;
        const double sc = (corner & 4) ? 0.5 : -0.5;
        const Vec3 p = ue.position + sa * ue.extents.x() * along + sb * ue.extents.y() * side +
                       sc * ue.extents.z() * vert;
        const Vec3 d = p - camera.position;
        // Corners behind the near plane are pulled onto it.
        const double depth = std::max(d.dot(fwd), kNearPlane);
        const double x = cx + f * d.dot(right) / depth;
        const double y = cy - f * d.dot(up) / depth;
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    }

    const double w = camera.width;
    const double h = camera.height;
    if (x_max <= 0.0 || x_min >= w || y_max <= 0.0 || y_min >= h)
        return std::nullopt;

    x_min = std::clamp(x_min, 0.0, w);
    x_max = std::clamp(x_max, 0.0, w);
    y_min = std::clamp(y_min, 0.0, h);
    y_max = std::clamp(y_max, 0.0, h);
    if (!(x_max > x_min) || !(y_max > y_min))
        return std::nullopt;

    return BoundingBox{0.5 * (x_min + x_max), 0.5 * (y_min + y_max), x_max - x_min, y_max - y_min};
}

bool visible_in_camera(const Scene& scene, const CameraModel& camera, const Ue& ue)
{
    return project_bbox(camera, ue).has_value() && los_visible(scene, camera.position, ue.position);
}

// ---- serialization ----------------------------------------------------------

Vec3 vec3_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("expected a 3-element array, got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json aabb_to_json(const Aabb& box)
{
    return {{"center", vec3_to_json(box.center)}, {"extents", vec3_to_json(box.extents)}};
}

Aabb aabb_from_json(const nlohmann::json& j)
{
    if (j.contains("min") || j.contains("max"))
        return Aabb::from_bounds(vec3_from_json(j.at("min")), vec3_from_json(j.at("max")));
    return {vec3_from_json(j.at("center")), vec3_from_json(j.at("extents"))};
}

namespace {

nlohmann::json camera_to_json(const CameraModel& c)
{
    return {{"position", vec3_to_json(c.position)},
            {"yaw", c.yaw},
            {"pitch", c.pitch},
            {"horizontal_fov", c.horizontal_fov},
            {"width", c.width},
            {"height", c.height}};
}

CameraModel camera_from_json(const nlohmann::json& j)
{
    CameraModel c;
    c.position = vec3_from_json(j.at("position"));
    c.yaw = j.value("yaw", 0.0);
    c.pitch = j.value("pitch", 0.0);
    c.horizontal_fov = j.at("horizontal_fov").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    return c;
}

nlohmann::json ris_to_json(const RisPose& r)
{
    return {{"position", vec3_to_json(r.position)}, {"yaw", r.yaw}, {"tilt", r.tilt}};
}

RisPose ris_from_json(const nlohmann::json& j)
{
    RisPose r;
    r.position = vec3_from_json(j.at("position"));
    r.yaw = j.value("yaw", 0.0);
    r.tilt = j.value("tilt", 0.0);
    return r;
}

nlohmann::json scatter_to_json(const ScatterConfig& s)
{
    return {{"max_paths", s.max_paths},
            {"region", aabb_to_json(s.region)},
            {"gain_db_min", s.gain_db_min},
            {"gain_db_max", s.gain_db_max}};
}

void scatter_from_json(const nlohmann::json& j, ScatterConfig& s)
{
    read_opt(j, "max_paths", s.max_paths);
    if (j.contains("region"))
        s.region = aabb_from_json(j.at("region"));
    read_opt(j, "gain_db_min", s.gain_db_min);
    read_opt(j, "gain_db_max", s.gain_db_max);
}

template <typename T, typename F>
nlohmann::json array_of(const std::vector<T>& items, F&& fn)
{
    auto arr = nlohmann::json::array();
    for (const auto& item : items)
        arr.push_back(fn(item));
    return arr;
}

} // namespace

void to_json(nlohmann::json& j, const Scene& s)
{
    auto ues = nlohmann::json::array();
    for (const auto& u : s.ues)
        ues.push_back({{"id", u.id},
                       {"position", vec3_to_json(u.position)},
                       {"class_id", u.class_id},
                       {"extents", vec3_to_json(u.extents)},
                       {"heading", vec3_to_json(u.heading)},
                       {"speed", u.speed}});
    j = {{"index", s.index},
         {"seed", s.seed},
         {"ues", ues},
         {"blockers", array_of(s.blockers, aabb_to_json)},
         {"ris", ris_to_json(s.ris)},
         {"bs_position", vec3_to_json(s.bs_position)},
         {"cameras", array_of(s.cameras, camera_to_json)},
         {"scatter", scatter_to_json(s.scatter)}};
}

void from_json(const nlohmann::json& j, Scene& s)
{
    s = Scene{};
    s.index = j.at("index").get<std::uint64_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& u : j.at("ues")) {
        Ue ue;
        ue.id = u.at("id").get<int>();
        ue.position = vec3_from_json(u.at("position"));
        ue.class_id = u.at("class_id").get<int>();
        ue.extents = vec3_from_json(u.at("extents"));
        ue.heading = vec3_from_json(u.at("heading"));
        ue.speed = u.at("speed").get<double>();
        s.ues.push_back(ue);
    }
    for (const auto& b : j.at("blockers"))
        s.blockers.push_back(aabb_from_json(b));
    s.ris = ris_from_json(j.at("ris"));
    s.bs_position = vec3_from_json(j.at("bs_position"));
    for (const auto& c : j.at("cameras"))
        s.cameras.push_back(camera_from_json(c));
    scatter_from_json(j.at("scatter"), s.scatter);
}

void to_json(nlohmann::json& j, const ScenarioConfig& c)
{
    auto classes = nlohmann::json::array();
    for (const auto& k : c.classes)
        classes.push_back({{"name", k.name}, {"extents", vec3_to_json(k.extents)}, {"weight", k.weight}});
    j = {{"ris", ris_to_json(c.ris)},
         {"bs_position", vec3_to_json(c.bs_position)},
         {"street_axis", vec3_to_json(c.street_axis)},
         {"ue_count", {c.ue_count.min, c.ue_count.max}},
         {"ue_speed", {c.ue_speed.min, c.ue_speed.max}},
         {"ue_region", aabb_to_json(c.ue_region)},
         {"classes", classes},
         {"blockers", array_of(c.blockers, aabb_to_json)},
         {"cameras", array_of(c.cameras, camera_to_json)},
         {"scatter", scatter_to_json(c.scatter)},
         {"master_seed", c.master_seed}};
}

void from_json(const nlohmann::json& j, ScenarioConfig& c)
{
    if (j.contains("ris"))
        c.ris = ris_from_json(j.at("ris"));
    if (j.contains("bs_position"))
        c.bs_position = vec3_from_json(j.at("bs_position"));
    if (j.contains("street_axis"))
        c.street_axis = vec3_from_json(j.at("street_axis"));
    if (j.contains("ue_count")) {
        const auto& r = j.at("ue_count");
        c.ue_count = {r.at(0).get<int>(), r.at(1).get<int>()};
    }
    if (j.contains("ue_speed")) {
        const auto& r = j.at("ue_speed");
        c.ue_speed = {r.at(0).get<double>(), r.at(1).get<double>()};
    }
    if (j.contains("ue_region"))
        c.ue_region = aabb_from_json(j.at("ue_region"));
    if (j.contains("classes")) {
        c.classes.clear();
        for (const auto& k : j.at("classes"))
            c.classes.push_back({k.value("name", std::string{}), vec3_from_json(k.at("extents")),
                                 k.value("weight", 1.0)});
    }
    if (j.contains("blockers")) {
        c.blockers.clear();
        for (const auto& b : j.at("blockers"))
            c.blockers.push_back(aabb_from_json(b));
    }
    if (j.contains("cameras")) {
        c.cameras.clear();
        for (const auto& cam : j.at("cameras"))
            c.cameras.push_back(camera_from_json(cam));
    }
    if (j.contains("scatter"))
        scatter_from_json(j.at("scatter"), c.scatter);
    read_opt(j, "master_seed", c.master_seed);
}

void write_scenes(std::ostream& os, std::span<const Scene> scenes)
{
    for (const auto& s : scenes)
        os << nlohmann::json(s).dump() << '\n';
}

std::vector<Scene> read_scenes(std::istream& is)
{
    std::vector<Scene> scenes;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        scenes.push_back(nlohmann::json::parse(line).get<Scene>());
    }
    return scenes;
}

} // namespace risbeam
