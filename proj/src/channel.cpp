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

#include "risbeam/channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include <fftw3.h>

namespace risbeam {

void UpaGeometry::validate() const
{
    if (cols < 1 || rows < 1)
        throw std::invalid_argument("UPA needs at least one row and one column");
    if (!(spacing > 0.0))
        throw std::invalid_argument("UPA element spacing must be positive");
}

void RadioConfig::validate() const
{
    if (subcarriers < 1 || delay_taps < 1)
        throw std::invalid_argument("radio: K and D must be >= 1");
    if (!(tx_power > 0.0) || !(noise_var > 0.0))
        throw std::invalid_argument("radio: tx_power and noise_var must be positive");
    if (!(sample_period > 0.0) || !(carrier_hz > 0.0) || !(pathloss > 0.0))
        throw std::invalid_argument("radio: sample_period, carrier_hz and pathloss must be positive");
    if (pulse == PulseShape::raised_cosine && !(rolloff > 0.0 && rolloff <= 1.0))
        throw std::invalid_argument("radio: raised-cosine roll-off must lie in (0, 1]");
}

ArrayFrame ArrayFrame::facing(const Vec3& origin, double yaw, double tilt)
{
    ArrayFrame f;
    f.origin = origin;
    f.normal = {std::cos(tilt) * std::cos(yaw), std::cos(tilt) * std::sin(yaw), std::sin(tilt)};
    f.horizontal = {std::sin(yaw), -std::cos(yaw), 0.0};
    f.vertical = f.horizontal.cross(f.normal);
    return f;
}

ArrayFrame ArrayFrame::toward(const Vec3& origin, const Vec3& target)
{
    const Vec3 d = target - origin;
    const double yaw = std::atan2(d.y(), d.x());
    const double tilt = std::atan2(d.z(), std::hypot(d.x(), d.y()));
    return facing(origin, yaw, tilt);
}

Angles ArrayFrame::angles_to(const Vec3& point) const
{
    const Vec3 d = (point - origin).normalized();
    return {std::atan2(d.dot(horizontal), d.dot(normal)), std::asin(std::clamp(d.dot(vertical), -1.0, 1.0))};
}

CVec array_response(const UpaGeometry& geom, double azimuth, double elevation)
{
    const double u = std::sin(azimuth) * std::cos(elevation);
    const double v = std::sin(elevation);
    const double k = 2.0 * kPi * geom.spacing;
    CVec a(geom.size());
    for (int q = 0; q < geom.rows; ++q)
        for (int p = 0; p < geom.cols; ++p)
            a[q * geom.cols + p] = std::polar(1.0, k * (p * u + q * v));
    return a;
}

namespace {

// Offsets below this many samples are treated as landing on the sample grid;
// d*Ts/Ts is rarely an exact integer in floating point.
constexpr double kGridSnap = 1e-9;

double sinc(double x)
{
    const double n = std::nearbyint(x);
    if (std::abs(x - n) < kGridSnap)
        return n == 0.0 ? 1.0 : 0.0;
    return std::sin(kPi * x) / (kPi * x);
}

double pulse_samples(const RadioConfig& radio, double x)
{
    if (radio.pulse == PulseShape::sinc)
        return sinc(x);

    const double beta = radio.rolloff;
    const double denom = 1.0 - 4.0 * beta * beta * x * x;
    if (std::abs(denom) < 1e-12)
        return 0.25 * kPi * sinc(0.5 / beta);
    return sinc(x) * std::cos(kPi * beta * x) / denom;
}

} // namespace

double pulse_value(const RadioConfig& radio, double t)
{
    return pulse_samples(radio, t / radio.sample_period);
}

namespace {

cdouble free_space_gain(double distance, double wavelength)
{
    return std::polar(wavelength / (4.0 * kPi * distance), -2.0 * kPi * distance / wavelength);
}

void set_departure(PathCluster& path, const std::optional<ArrayFrame>& tx_frame, const Vec3& toward)
{
    if (!tx_frame)
        return;
    const Angles dep = tx_frame->angles_to(toward);
    path.depart_azimuth = dep.azimuth;
    path.depart_elevation = dep.elevation;
}

} // namespace

PathCluster los_path(const Vec3& tx, const Vec3& rx, const ArrayFrame& rx_frame,
                     const std::optional<ArrayFrame>& tx_frame, double wavelength)
{
    const double dist = (rx - tx).norm();
    PathCluster path;
    path.alpha = free_space_gain(dist, wavelength);
    path.tau = dist / kSpeedOfLight;
    const Angles arr = rx_frame.angles_to(tx);
    path.azimuth = arr.azimuth;
    path.elevation = arr.elevation;
    set_departure(path, tx_frame, rx);
    return path;
}

PathCluster single_bounce_path(const Vec3& tx, const Vec3& p, const Vec3& rx, const ArrayFrame& rx_frame,
                               const std::optional<ArrayFrame>& tx_frame, double wavelength, cdouble reflection)
{
    const double dist = (p - tx).norm() + (rx - p).norm();
    PathCluster path;
    path.alpha = reflection * free_space_gain(dist, wavelength);
    path.tau = dist / kSpeedOfLight;
    const Angles arr = rx_frame.angles_to(p);
    path.azimuth = arr.azimuth;
    path.elevation = arr.elevation;
    set_departure(path, tx_frame, p);
    return path;
}

std::vector<PathCluster> synth_paths(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                     const ArrayFrame& rx_frame, const std::optional<ArrayFrame>& tx_frame,
                                     double wavelength, Rng& rng)
{
    if (tx == rx)
        throw std::invalid_argument("synth_paths: tx and rx coincide");

    std::vector<PathCluster> paths;
    if (los_visible(scene, tx, rx))
        paths.push_back(los_path(tx, rx, rx_frame, tx_frame, wavelength));

    const ScatterConfig& sc = scene.scatter;
    const int n_scatter = std::uniform_int_distribution<int>(0, sc.max_paths - 1)(rng);
    const Vec3 lo = sc.region.lo();
    const Vec3 hi = sc.region.hi();
    std::uniform_real_distribution<double> gain_db(sc.gain_db_min, sc.gain_db_max);
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    for (int i = 0; i < n_scatter; ++i) {
        Vec3 p;
        for (int a = 0; a < 3; ++a)
            p[a] = lo[a] + (hi[a] - lo[a]) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const cdouble reflection = std::polar(std::pow(10.0, gain_db(rng) / 20.0), phase(rng));
        if (p == tx || p == rx || !los_visible(scene, tx, p) || !los_visible(scene, p, rx))
            continue;
        paths.push_back(single_bounce_path(tx, p, rx, rx_frame, tx_frame, wavelength, reflection));
    }
    return paths;
}

void align_delays(std::vector<PathCluster>& paths)
{
    if (paths.empty())
        return;
    const double t0 = std::min_element(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
                          return a.tau < b.tau;
                      })->tau;
    for (auto& p : paths)
        p.tau -= t0;
}

DelayChannel delay_channel(std::span<const PathCluster> paths, const UpaGeometry& rx_geom, const RadioConfig& radio)
{
    return delay_channel(paths, rx_geom, UpaGeometry{1, 1, 0.5}, radio);
}

DelayChannel delay_channel(std::span<const PathCluster> paths, const UpaGeometry& rx_geom,
                           const UpaGeometry& tx_geom, const RadioConfig& radio)
{
    const int m = rx_geom.size();
    const int n = tx_geom.size();
    const int taps = radio.delay_taps;

    DelayChannel dc;
    dc.rows = m;
    dc.cols = n;
    dc.taps.assign(taps, CMat::Zero(m, n));

    const double scale = std::sqrt(static_cast<double>(m) / radio.pathloss);
    for (const auto& path : paths) {
        if (path.tau >= taps * radio.sample_period)
            dc.truncated = true;
        const CVec a_rx = array_response(rx_geom, path.azimuth, path.elevation);
        const CVec a_tx = array_response(tx_geom, path.depart_azimuth, path.depart_elevation);
        const CMat outer = a_rx * a_tx.transpose();
        const double delay = path.tau / radio.sample_period;
        for (int d = 0; d < taps; ++d) {
            const double p = pulse_samples(radio, d - delay);
            if (p != 0.0)
                dc.taps[d] += (scale * path.alpha * p) * outer;
        }
    }
    return dc;
}

namespace {

class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(int length, int howmany, fftw_complex* in, fftw_complex* out)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(length, howmany);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        int n[] = {length};
        fftw_plan plan = fftw_plan_many_dft(1, n, howmany, in, nullptr, 1, length, out, nullptr, 1, length,
                                            FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr)
            throw std::runtime_error("FFTW planning failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

} // namespace

FreqChannel freq_channel(const DelayChannel& dc, int subcarriers)
{
    if (subcarriers < 1)
        throw std::invalid_argument("freq_channel: K must be >= 1");

    const int entries = dc.rows * dc.cols;
    const int k_len = subcarriers;
    // Taps beyond K alias onto d mod K, matching the direct sum.
    std::vector<cdouble> in(static_cast<std::size_t>(entries) * k_len, cdouble{});
    std::vector<cdouble> out(in.size());
    for (std::size_t d = 0; d < dc.taps.size(); ++d) {
        const CMat& tap = dc.taps[d];
        const std::size_t slot = d % k_len;
        for (int r = 0; r < dc.rows; ++r)
            for (int c = 0; c < dc.cols; ++c)
                in[static_cast<std::size_t>(r * dc.cols + c) * k_len + slot] += tap(r, c);
    }

    if (entries > 0) {
        auto* fin = reinterpret_cast<fftw_complex*>(in.data());
        auto* fout = reinterpret_cast<fftw_complex*>(out.data());
        fftw_execute_dft(plan_cache().get(k_len, entries, fin, fout), fin, fout);
    }

    FreqChannel fc;
    fc.rows = dc.rows;
    fc.cols = dc.cols;
    fc.bins.assign(k_len, CMat::Zero(dc.rows, dc.cols));
    for (int k = 0; k < k_len; ++k)
        for (int r = 0; r < dc.rows; ++r)
            for (int c = 0; c < dc.cols; ++c)
                fc.bins[k](r, c) = out[static_cast<std::size_t>(r * dc.cols + c) * k_len + k];
    return fc;
}

FreqChannel freq_channel_direct(const DelayChannel& dc, int subcarriers)
{
    if (subcarriers < 1)
        throw std::invalid_argument("freq_channel: K must be >= 1");
    FreqChannel fc;
    fc.rows = dc.rows;
    fc.cols = dc.cols;
    fc.bins.assign(subcarriers, CMat::Zero(dc.rows, dc.cols));
    for (int k = 0; k < subcarriers; ++k)
        for (std::size_t d = 0; d < dc.taps.size(); ++d) {
            // Reduce k*d mod K first so the twiddle angle stays small.
            const auto kd = (static_cast<long long>(k) * static_cast<long long>(d)) % subcarriers;
            fc.bins[k] += std::polar(1.0, -2.0 * kPi * static_cast<double>(kd) / subcarriers) * dc.taps[d];
        }
    return fc;
}

// ---- binary complex arrays ----------------------------------------------------

namespace {

constexpr char kComplexMagic[8] = {'R', 'I', 'S', 'C', 'P', 'L', 'X', '1'};

template <typename T>
void put_le(std::ostream& os, T value)
{
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <typename T>
T get_le(std::istream& is)
{
    static_assert(sizeof(T) == 8);
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), 8))
        throw std::runtime_error("complex array: truncated file");
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

} // namespace

void write_complex_array(std::ostream& os, int rows, int cols, std::span<const CMat> blocks)
{
    os.write(kComplexMagic, sizeof kComplexMagic);
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(rows));
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(cols));
    put_le<std::uint64_t>(os, blocks.size());
    for (const auto& block : blocks) {
        if (block.rows() != rows || block.cols() != cols)
            throw std::invalid_argument("complex array: block shape mismatch");
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                put_le<double>(os, block(r, c).real());
                put_le<double>(os, block(r, c).imag());
            }
    }
    if (!os)
        throw std::runtime_error("complex array: write failed");
}

ComplexArray read_complex_array(std::istream& is)
{
    char magic[8] = {};
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kComplexMagic, sizeof magic) != 0)
        throw std::runtime_error("complex array: bad magic");
    const auto rows = get_le<std::uint64_t>(is);
    const auto cols = get_le<std::uint64_t>(is);
    const auto count = get_le<std::uint64_t>(is);
    if (rows > (1u << 20) || cols > (1u << 20) || count > (1u << 24))
        throw std::runtime_error("complex array: implausible dimensions");
    ComplexArray out;
    out.rows = static_cast<int>(rows);
    out.cols = static_cast<int>(cols);
    out.blocks.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        CMat block(rows, cols);
        for (std::uint64_t r = 0; r < rows; ++r)
            for (std::uint64_t c = 0; c < cols; ++c) {
                const double re = get_le<double>(is);
                const double im = get_le<double>(is);
                block(r, c) = {re, im};
            }
        out.blocks.push_back(std::move(block));
    }
    return out;
}

void write_channel(std::ostream& os, const FreqChannel& channel)
{
    write_complex_array(os, channel.rows, channel.cols, channel.bins);
}

FreqChannel read_channel(std::istream& is)
{
    ComplexArray arr = read_complex_array(is);
    FreqChannel fc;
    fc.rows = arr.rows;
    fc.cols = arr.cols;
    fc.bins = std::move(arr.blocks);
    return fc;
}

} // namespace risbeam
