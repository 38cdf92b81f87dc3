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

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "risbeam/geometry.hpp"
#include "risbeam/random.hpp"
#include "risbeam/scene.hpp"

namespace risbeam {

using cdouble = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Uniform planar array. Element (p, q) sits in column p and row q and is
/// flattened row-major: index = q * cols + p.
struct UpaGeometry {
    int cols = 32;
    int rows = 8;
    double spacing = 0.5; ///< in wavelengths

    int size() const { return cols * rows; }
    void validate() const;
};

enum class PulseShape { sinc, raised_cosine };

struct RadioConfig {
    double carrier_hz = 28e9;
    int subcarriers = 64;     ///< K
    double sample_period = 1.0 / 100e6; ///< Ts
    int delay_taps = 32;      ///< D
    double tx_power = 1.0;    ///< pt, W
    double noise_var = 1e-13; ///< sigma_n^2 per subcarrier, W
    double pathloss = 1.0;    ///< rho; free-space loss is carried by the path gains
    PulseShape pulse = PulseShape::sinc;
    double rolloff = 0.8;

    double snr() const { return tx_power / (subcarriers * noise_var); }
    double wavelength() const { return kSpeedOfLight / carrier_hz; }
    void validate() const;
};

struct Angles {
    double azimuth = 0.0;
    double elevation = 0.0;
};

/// Local frame of a planar array: `normal` is boresight, columns run along
/// `horizontal` and rows along `vertical`.
struct ArrayFrame {
    Vec3 origin = Vec3::Zero();
    Vec3 normal = Vec3::UnitY();
    Vec3 horizontal = Vec3::UnitX();
    Vec3 vertical = Vec3::UnitZ();

    static ArrayFrame facing(const Vec3& origin, double yaw, double tilt);
    static ArrayFrame toward(const Vec3& origin, const Vec3& target);

    /// Azimuth/elevation of `point` such that sin(az)cos(el) and sin(el) are
    /// the direction cosines along `horizontal` and `vertical`.
    Angles angles_to(const Vec3& point) const;
};

struct PathCluster {
    cdouble alpha{0.0, 0.0};
    double tau = 0.0; ///< s
    double azimuth = 0.0;   ///< arrival, at the receive array
    double elevation = 0.0;
    double depart_azimuth = 0.0; ///< departure, at the transmit array (if any)
    double depart_elevation = 0.0;
};

/// D taps, each rows x cols (cols == 1 for a vector channel).
struct DelayChannel {
    int rows = 0;
    int cols = 0;
    std::vector<CMat> taps;
    bool truncated = false; ///< some path delay fell beyond the last tap
};

/// K frequency bins, each rows x cols.
struct FreqChannel {
    int rows = 0;
    int cols = 0;
    std::vector<CMat> bins;

    int subcarriers() const { return static_cast<int>(bins.size()); }
};

CVec array_response(const UpaGeometry& geom, double azimuth, double elevation);

/// p(t) for the configured pulse, with t in seconds.
double pulse_value(const RadioConfig& radio, double t);

PathCluster los_path(const Vec3& tx, const Vec3& rx, const ArrayFrame& rx_frame,
                     const std::optional<ArrayFrame>& tx_frame, double wavelength);

/// Single bounce tx -> p -> rx with an extra complex reflection gain.
PathCluster single_bounce_path(const Vec3& tx, const Vec3& p, const Vec3& rx, const ArrayFrame& rx_frame,
                               const std::optional<ArrayFrame>& tx_frame, double wavelength, cdouble reflection);

/// LoS path when unobstructed plus 0..L-1 random single-bounce paths drawn
/// from the scene's scatter region. Empty when everything is blocked.
std::vector<PathCluster> synth_paths(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                     const ArrayFrame& rx_frame, const std::optional<ArrayFrame>& tx_frame,
                                     double wavelength, Rng& rng);

/// Shifts all delays so the earliest path arrives at t = 0.
void align_delays(std::vector<PathCluster>& paths);

DelayChannel delay_channel(std::span<const PathCluster> paths, const UpaGeometry& rx_geom, const RadioConfig& radio);
DelayChannel delay_channel(std::span<const PathCluster> paths, const UpaGeometry& rx_geom,
                           const UpaGeometry& tx_geom, const RadioConfig& radio);

/// Per-subcarrier channel via FFT.
FreqChannel freq_channel(const DelayChannel& dc, int subcarriers);
/// Same quantity by the direct O(K*D) sum; reference route.
FreqChannel freq_channel_direct(const DelayChannel& dc, int subcarriers);

// Binary complex-array files: "RISCPLX1", u64 dims (rows, cols, count), then
// count blocks of rows x cols little-endian f64 (re, im) pairs, row-major.
struct ComplexArray {
    int rows = 0;
    int cols = 0;
    std::vector<CMat> blocks;
};

void write_complex_array(std::ostream& os, int rows, int cols, std::span<const CMat> blocks);
ComplexArray read_complex_array(std::istream& is);

void write_channel(std::ostream& os, const FreqChannel& channel);
FreqChannel read_channel(std::istream& is);

} // namespace risbeam
