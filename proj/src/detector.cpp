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

#include "risbeam/detector.hpp"

#include <algorithm>
#include <stdexcept>

namespace risbeam {

namespace {

// Clamps the center into the frame, then clips the box; the result always
// keeps a positive width and height.
BoundingBox clip_to_frame(BoundingBox b, double w, double h)
{
    b.x_center = std::clamp(b.x_center, 0.0, w);
    b.y_center = std::clamp(b.y_center, 0.0, h);
    const double half_w = 0.5 * std::max(b.width, 1.0);
    const double half_h = 0.5 * std::max(b.height, 1.0);
    const double x0 = std::max(b.x_center - half_w, 0.0);
    const double x1 = std::min(b.x_center + half_w, w);
    const double y0 = std::max(b.y_center - half_h, 0.0);
    const double y1 = std::min(b.y_center + half_h, h);
    return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
}

} // namespace

void DetectorNoise::validate() const
{
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(miss_prob) || !prob(class_confusion_prob))
        throw std::invalid_argument("detector: probabilities must lie in [0, 1]");
    if (bbox_jitter_std < 0.0 || false_positive_rate < 0.0)
        throw std::invalid_argument("detector: jitter and false-positive rate must be non-negative");
}

std::vector<Detection> detect(const Scene& scene, const CameraModel& camera, int class_count,
                              const DetectorNoise& noise, Rng& rng)
{
    noise.validate();
    if (class_count < 1)
        throw std::invalid_argument("detector: class_count must be >= 1");

    const double w = camera.width;
    const double h = camera.height;
    std::bernoulli_distribution miss(noise.miss_prob);
    std::bernoulli_distribution confuse(noise.class_confusion_prob);
    std::normal_distribution<double> jitter(0.0, 1.0);

    std::vector<Detection> out;
    for (const auto& ue : scene.ues) {
        const auto box = project_bbox(camera, ue);
        if (!box || !los_visible(scene, camera.position, ue.position))
            continue;
        if (noise.miss_prob > 0.0 && miss(rng))
            continue;

        Detection det{ue.class_id, *box};
        if (noise.bbox_jitter_std > 0.0) {
            BoundingBox b = *box;
            b.x_center += noise.bbox_jitter_std * jitter(rng);
            b.y_center += noise.bbox_jitter_std * jitter(rng);
            b.width += noise.bbox_jitter_std * jitter(rng);
            b.height += noise.bbox_jitter_std * jitter(rng);
            det.bbox = clip_to_frame(b, w, h);
        }
        if (class_count > 1 && noise.class_confusion_prob > 0.0 && confuse(rng)) {
            const int shift = std::uniform_int_distribution<int>(1, class_count - 1)(rng);
            det.class_id = (det.class_id + shift) % class_count;
        }
        out.push_back(det);
    }

    if (noise.false_positive_rate > 0.0) {
        const int spurious = std::poisson_distribution<int>(noise.false_positive_rate)(rng);
        std::uniform_int_distribution<int> cls(0, class_count - 1);
        std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h);
        std::uniform_real_distribution<double> size_frac(1.0 / 40.0, 1.0 / 8.0);
        for (int i = 0; i < spurious; ++i) {
            Detection det;
            det.class_id = cls(rng);
            BoundingBox b;
            b.x_center = ux(rng);
            b.y_center = uy(rng);
            b.width = size_frac(rng) * w;
            b.height = size_frac(rng) * h;
            det.bbox = clip_to_frame(b, w, h);
            out.push_back(det);
        }
    }

    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

} // namespace risbeam
