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

#include "risbeam/link.hpp"

#include <atomic>
#include <iostream>
#include <stdexcept>

#include "risbeam/random.hpp"

namespace risbeam {

namespace {

constexpr std::uint64_t kBsLink = 0;
constexpr std::uint64_t kUeLink = 1;

void warn_if_truncated(const DelayChannel& dc)
{
    static std::atomic<bool> warned{false};
    if (dc.truncated && !warned.exchange(true))
        std::clog << "warning: path delays exceed D*Ts; late taps are truncated\n";
}

FreqChannel synthesize(std::vector<PathCluster> paths, const UpaGeometry& rx, const UpaGeometry& tx,
                       const RadioConfig& radio)
{
    // A common delay is a per-subcarrier phase and leaves |g_k^T psi| unchanged.
    align_delays(paths);
    const DelayChannel dc = delay_channel(paths, rx, tx, radio);
    warn_if_truncated(dc);
    return freq_channel(dc, radio.subcarriers);
}

} // namespace

void LinkModel::validate() const
{
    ris.validate();
    bs.validate();
    radio.validate();
}

ArrayFrame ris_frame(const Scene& scene)
{
    return ArrayFrame::facing(scene.ris.position, scene.ris.yaw, scene.ris.tilt);
}

ArrayFrame bs_frame(const Scene& scene)
{
    return ArrayFrame::toward(scene.bs_position, scene.ris.position);
}

FreqChannel bs_ris_channel(const Scene& scene, const LinkModel& model)
{
    Rng rng = make_rng(scene.seed, Stream::channel, kBsLink);
    auto paths = synth_paths(scene, scene.bs_position, scene.ris.position, ris_frame(scene), bs_frame(scene),
                             model.radio.wavelength(), rng);
    return synthesize(std::move(paths), model.ris, model.bs, model.radio);
}

FreqChannel ue_ris_channel(const Scene& scene, const Ue& ue, const LinkModel& model)
{
    Rng rng = make_rng(scene.seed, Stream::channel, kUeLink, static_cast<std::uint64_t>(ue.id));
    auto paths = synth_paths(scene, ue.position, scene.ris.position, ris_frame(scene), std::nullopt,
                             model.radio.wavelength(), rng);
    return synthesize(std::move(paths), model.ris, UpaGeometry{1, 1, 0.5}, model.radio);
}

CVec bs_beam(const Scene& scene, const LinkModel& model)
{
    const Angles dep = bs_frame(scene).angles_to(scene.ris.position);
    CVec f = array_response(model.bs, dep.azimuth, dep.elevation).conjugate();
    return f / f.norm();
}

LinkChannels ue_link(const Scene& scene, const Ue& ue, const LinkModel& model, const FreqChannel& h_t)
{
    LinkChannels link;
    link.h_r = ue_ris_channel(scene, ue, model);
    link.h_t = h_t;
    link.f = bs_beam(scene, model);
    link.snr = model.radio.snr();
    return link;
}

bool is_candidate(const Scene& scene, const CameraModel& camera, const Ue& ue)
{
    return visible_in_camera(scene, camera, ue) && !los_visible(scene, scene.bs_position, ue.position);
}

std::vector<UeOracle> candidate_oracles(const Scene& scene, const CameraModel& camera, const Codebook& cb,
                                        const LinkModel& model)
{
    std::vector<UeOracle> out;
    FreqChannel h_t;
    bool have_ht = false;
    for (const auto& ue : scene.ues) {
        if (!is_candidate(scene, camera, ue))
            continue;
        if (!have_ht) {
            h_t = bs_ris_channel(scene, model);
            have_ht = true;
        }
        UeOracle oracle;
        oracle.ue_id = ue.id;
        oracle.rates = beam_rates(ue_link(scene, ue, model, h_t), cb);
        oracle.best = argmax_lowest(oracle.rates);
        // No propagation path at all; the RIS cannot serve this UE.
        if (oracle.rates[oracle.best] <= 0.0)
            continue;
        out.push_back(std::move(oracle));
    }
    return out;
}

BeamSet beam_set_of(const std::vector<UeOracle>& oracles)
{
    BeamSet set;
    for (const auto& o : oracles)
        set.insert(o.best);
    return set;
}

BeamSet scene_beam_set(const Scene& scene, const CameraModel& camera, const Codebook& cb, const LinkModel& model)
{
    return beam_set_of(candidate_oracles(scene, camera, cb, model));
}

} // namespace risbeam
