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

// Scene-level link construction and the exhaustive-search beam oracle.

#include <vector>

#include "risbeam/channel.hpp"
#include "risbeam/codebook.hpp"
#include "risbeam/rate.hpp"
#include "risbeam/scene.hpp"

namespace risbeam {

struct LinkModel {
    UpaGeometry ris;
    UpaGeometry bs{1, 1, 0.5};
    RadioConfig radio;

    void validate() const;
};

ArrayFrame ris_frame(const Scene& scene);
/// BS array boresight points at the RIS.
ArrayFrame bs_frame(const Scene& scene);

FreqChannel bs_ris_channel(const Scene& scene, const LinkModel& model);
FreqChannel ue_ris_channel(const Scene& scene, const Ue& ue, const LinkModel& model);

/// Normalized conjugate BS steering vector toward the RIS line of sight.
CVec bs_beam(const Scene& scene, const LinkModel& model);

LinkChannels ue_link(const Scene& scene, const Ue& ue, const LinkModel& model, const FreqChannel& h_t);

/// Seen by the camera and cut off from the BS.
bool is_candidate(const Scene& scene, const CameraModel& camera, const Ue& ue);

struct UeOracle {
    int ue_id = 0;
    std::vector<double> rates; ///< per codebook beam
    std::size_t best = 0;
};

/// Exhaustive search for every candidate UE that has at least one path to the RIS.
std::vector<UeOracle> candidate_oracles(const Scene& scene, const CameraModel& camera, const Codebook& cb,
                                        const LinkModel& model);

BeamSet beam_set_of(const std::vector<UeOracle>& oracles);

BeamSet scene_beam_set(const Scene& scene, const CameraModel& camera, const Codebook& cb, const LinkModel& model);

} // namespace risbeam
