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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "risbeam/pipeline.hpp"
#include "risbeam/scene.hpp"

using namespace risbeam;

namespace {

ScenarioConfig street()
{
    return default_run_config().scenario;
}

CameraModel level_camera()
{
    CameraModel c;
    c.position = Vec3::Zero();
    c.yaw = kPi / 2; // looking along +y
    c.pitch = 0.0;
    c.horizontal_fov = kPi / 2;
    c.width = 800;
    c.height = 600;
    return c;
}

Ue ue_at(const Vec3& p, const Vec3& extents)
{
    Ue u;
    u.position = p;
    u.extents = extents;
    return u;
}

bool same_scene(const Scene& a, const Scene& b)
{
    if (a.index != b.index || a.seed != b.seed || a.ues.size() != b.ues.size())
        return false;
    for (std::size_t i = 0; i < a.ues.size(); ++i) {
        const Ue& x = a.ues[i];
        const Ue& y = b.ues[i];
        if (x.id != y.id || x.position != y.position || x.class_id != y.class_id || x.extents != y.extents ||
            x.heading != y.heading || x.speed != y.speed)
            return false;
    }
    return true;
}

} // namespace

TEST(Geometry, SegmentThroughBoxHits)
{
    const Aabb box{Vec3(0, 0, 0), Vec3(2, 2, 2)};
    EXPECT_TRUE(segment_hits_box(Vec3(-5, 0, 0), Vec3(5, 0, 0), box));
    EXPECT_TRUE(segment_hits_box(Vec3(5, 0.3, 0.2), Vec3(-5, -0.1, 0.4), box));
    EXPECT_FALSE(segment_hits_box(Vec3(-5, 3, 0), Vec3(5, 3, 0), box));
    // stops short of the box
    EXPECT_FALSE(segment_hits_box(Vec3(-5, 0, 0), Vec3(-2, 0, 0), box));
}

TEST(Geometry, GrazingIsNotAHit)
{
    const Aabb box{Vec3(0, 0, 0), Vec3(2, 2, 2)};
    EXPECT_FALSE(segment_hits_box(Vec3(-5, 1, 0), Vec3(5, 1, 0), box));  // along a face
    EXPECT_FALSE(segment_hits_box(Vec3(-5, 1, 1), Vec3(5, 1, 1), box));  // along an edge
    EXPECT_FALSE(segment_hits_box(Vec3(-2, 0, 1), Vec3(0, 2, 1), box));  // touches a corner edge
}

TEST(Geometry, HitTestIsSymmetric)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-4, 4);
    const Aabb box{Vec3(0.5, -0.2, 0.1), Vec3(2, 3, 1.5)};
    for (int i = 0; i < 2000; ++i) {
        const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
        EXPECT_EQ(segment_hits_box(a, b, box), segment_hits_box(b, a, box));
    }
}

TEST(Los, NoBlockersAlwaysVisible)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int i = 0; i < 100; ++i)
        EXPECT_TRUE(los_visible(std::span<const BlockerSpec>{}, Vec3(u(rng), u(rng), u(rng)),
                                Vec3(u(rng), u(rng), u(rng))));
}

TEST(Los, BlockerOnMidpointBlocks)
{
    const Vec3 a(0, 0, 1), b(10, 4, 3);
    const std::vector<BlockerSpec> blockers{{0.5 * (a + b), Vec3(1, 1, 1)}};
    EXPECT_FALSE(los_visible(blockers, a, b));
}

TEST(Los, GrazingFaceStaysVisible)
{
    const std::vector<BlockerSpec> blockers{Aabb::from_bounds(Vec3(0, 0, 0), Vec3(4, 4, 4))};
    EXPECT_TRUE(los_visible(blockers, Vec3(-1, 0, 2), Vec3(6, 0, 2)));
}

TEST(SceneGen, Deterministic)
{
    const auto cfg = street();
    for (std::uint64_t i : {0u, 1u, 99u})
        EXPECT_TRUE(same_scene(generate_scene(cfg, i), generate_scene(cfg, i)));
    EXPECT_FALSE(same_scene(generate_scene(cfg, 3), generate_scene(cfg, 4)));
    auto other = cfg;
    other.master_seed += 1;
    EXPECT_NE(generate_scene(cfg, 3).seed, generate_scene(other, 3).seed);
}

TEST(SceneGen, ZeroUes)
{
    auto cfg = street();
    cfg.ue_count = {0, 0};
    EXPECT_TRUE(generate_scene(cfg, 5).ues.empty());
}

TEST(SceneGen, MeanUeCount)
{
    const auto cfg = street();
    double total = 0;
    for (int i = 0; i < 1000; ++i)
        total += static_cast<double>(generate_scene(cfg, i).ues.size());
    EXPECT_NEAR(total / 1000.0, 3.0, 0.2);
}

TEST(SceneGen, UesInsideRegionWithClassExtents)
{
    const auto cfg = street();
    for (int i = 0; i < 50; ++i)
        for (const auto& ue : generate_scene(cfg, i).ues) {
            EXPECT_TRUE(cfg.ue_region.contains(ue.position));
            EXPECT_EQ(ue.extents, cfg.classes.at(ue.class_id).extents);
            EXPECT_GE(std::abs(ue.speed), cfg.ue_speed.min);
            EXPECT_LE(std::abs(ue.speed), cfg.ue_speed.max);
        }
}

TEST(SceneGen, InvalidConfigsRejected)
{
    auto cfg = street();
    cfg.ue_region.extents.z() = 0.0;
    EXPECT_THROW(generate_scene(cfg, 0), std::invalid_argument);
    cfg = street();
    cfg.ue_region = Aabb{cfg.bs_position, Vec3(1, 1, 1)};
    EXPECT_THROW(generate_scene(cfg, 0), std::invalid_argument);
    cfg = street();
    cfg.ue_count = {3, 1};
    EXPECT_THROW(generate_scene(cfg, 0), std::invalid_argument);
}

TEST(Projection, BehindCameraIsAbsent)
{
    EXPECT_FALSE(project_bbox(level_camera(), ue_at(Vec3(0, -10, 0), Vec3(4, 2, 1.5))).has_value());
}

TEST(Projection, OnAxisPinhole)
{
    const CameraModel cam = level_camera();
    const double d = 20.0, width = 4.0;
    // Negligible depth so the near and far faces coincide.
    const auto box = project_bbox(cam, ue_at(Vec3(0, d, 0), Vec3(width, 1e-9, 1.0)));
    ASSERT_TRUE(box.has_value());
    const double f = 0.5 * cam.width / std::tan(0.5 * cam.horizontal_fov);
    EXPECT_NEAR(cam.focal_px(), f, 1e-12);
    EXPECT_NEAR(box->x_center, 0.5 * cam.width, 1e-9);
    EXPECT_NEAR(box->y_center, 0.5 * cam.height, 1e-9);
    EXPECT_NEAR(box->width, width * f / d, 1e-6);
    EXPECT_NEAR(box->height, 1.0 * f / d, 1e-6);
}

TEST(Projection, OutsideFovIsAbsent)
{
    // 60 degrees off-axis with a 90 degree field of view.
    const Vec3 p = 30.0 * Vec3(std::sin(kPi / 3), std::cos(kPi / 3), 0.0);
    EXPECT_FALSE(project_bbox(level_camera(), ue_at(p, Vec3(0.5, 0.5, 0.5))).has_value());
}

TEST(Projection, PartiallyVisibleIsClipped)
{
    const CameraModel cam = level_camera();
    // Straddles the right image edge.
    const auto box = project_bbox(cam, ue_at(Vec3(10, 10, 0), Vec3(6, 1e-9, 1)));
    ASSERT_TRUE(box.has_value());
    EXPECT_NEAR(box->x_center + 0.5 * box->width, cam.width, 1e-9);
    EXPECT_GT(box->width, 0.0);
}

TEST(Visibility, BlockerHidesUe)
{
    Scene s;
    s.cameras = {level_camera()};
    const Ue ue = ue_at(Vec3(0, 20, 0), Vec3(4, 2, 1.5));
    EXPECT_TRUE(visible_in_camera(s, s.cameras[0], ue));
    s.blockers = {Aabb{Vec3(0, 10, 0), Vec3(2, 2, 2)}};
    EXPECT_FALSE(visible_in_camera(s, s.cameras[0], ue));
}

TEST(SceneJson, RoundTrip)
{
    const auto cfg = street();
    std::vector<Scene> scenes;
    for (int i = 0; i < 5; ++i)
        scenes.push_back(generate_scene(cfg, i));
    std::stringstream ss;
    write_scenes(ss, scenes);
    const auto back = read_scenes(ss);
    ASSERT_EQ(back.size(), scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        EXPECT_TRUE(same_scene(back[i], scenes[i]));
        EXPECT_EQ(back[i].blockers.size(), scenes[i].blockers.size());
        EXPECT_EQ(back[i].cameras.size(), scenes[i].cameras.size());
    }
}

TEST(SceneJson, ConfigRoundTrip)
{
    const auto cfg = street();
    nlohmann::json j = cfg;
    ScenarioConfig back;
    from_json(j, back);
    EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
}
