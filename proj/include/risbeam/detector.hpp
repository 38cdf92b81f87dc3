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

#include <vector>

#include "risbeam/random.hpp"
#include "risbeam/scene.hpp"

namespace risbeam {

struct Detection {
    int class_id = 0;
    BoundingBox bbox;

    bool operator==(const Detection&) const = default;
};

/// Imperfection model standing in for a learned object detector.
struct DetectorNoise {
    double bbox_jitter_std = 2.0;      ///< px, applied to center and size
    double miss_prob = 0.02;
    double false_positive_rate = 0.05; ///< mean spurious detections per image
    double class_confusion_prob = 0.0;

    void validate() const;
};

/// Geometric detections for every UE the camera sees, perturbed by `noise`,
/// plus Poisson false positives. Output order is shuffled.
std::vector<Detection> detect(const Scene& scene, const CameraModel& camera, int class_count,
                              const DetectorNoise& noise, Rng& rng);

} // namespace risbeam
