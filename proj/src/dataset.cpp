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

#include "risbeam/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "risbeam/format.hpp"

namespace risbeam {

bool Sample::operator==(const Sample& other) const
{
    return scene_id == other.scene_id && camera_id == other.camera_id && t_star == other.t_star &&
           input.rows() == other.input.rows() && input.cols() == other.input.cols() && input == other.input;
}

Eigen::MatrixXd encode_input(std::span<const Detection> dets, int classes, int u_max, const CameraModel& camera)
{
    if (classes < 1 || u_max < 1)
        throw std::invalid_argument("encode_input: classes and U_max must be >= 1");

    std::vector<std::size_t> keep(dets.size());
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    if (dets.size() > static_cast<std::size_t>(u_max)) {
        std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
            return dets[a].bbox.width * dets[a].bbox.height > dets[b].bbox.width * dets[b].bbox.height;
        });
        keep.resize(u_max);
        std::sort(keep.begin(), keep.end());
    }

    const double w = camera.width;
    const double h = camera.height;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(classes + 4, u_max);
    for (std::size_t col = 0; col < keep.size(); ++col) {
        const Detection& d = dets[keep[col]];
        if (d.class_id < 0 || d.class_id >= classes)
            throw std::invalid_argument("encode_input: class id out of range");
        const auto c = static_cast<Eigen::Index>(col);
        v(d.class_id, c) = 1.0;
        v(classes + 0, c) = d.bbox.x_center / w;
        v(classes + 1, c) = d.bbox.y_center / h;
        v(classes + 2, c) = d.bbox.width / w;
        v(classes + 3, c) = d.bbox.height / h;
    }
    return v;
}

std::vector<std::uint8_t> encode_label(const BeamSet& set, std::size_t beams)
{
    std::vector<std::uint8_t> bits(beams, 0);
    for (std::size_t q : set) {
        if (q >= beams)
            throw std::invalid_argument("encode_label: beam index out of range");
        bits[q] = 1;
    }
    return bits;
}

BeamSet decode_label(std::span<const std::uint8_t> bits)
{
    BeamSet set;
    for (std::size_t q = 0; q < bits.size(); ++q)
        if (bits[q] != 0)
            set.insert(q);
    return set;
}

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must lie in (0, 1)");
    if (n < 2)
        throw std::invalid_argument("split: need at least two samples");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = make_rng(seed, Stream::split);
    std::shuffle(idx.begin(), idx.end(), rng);

    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    SplitIndices out;
    out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    return out;
}

// ---- file format --------------------------------------------------------------
//
// risbeam-dataset <version> classes=C u_max=U beams=Q width=W height=H camera=ID
//     split_seed=S train_fraction=F count=N              (one line)
// scene_id,camera_id,<V column-major, space separated>,<t* as 0/1 string>

namespace {

constexpr std::string_view kDatasetMagic = "risbeam-dataset";

template <typename T>
T parse_number(std::string_view text, const char* what)
{
    T value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw std::runtime_error(std::string("dataset: malformed ") + what + " '" + std::string(text) + "'");
    return value;
}

std::vector<std::string_view> split_on(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

void save_dataset(std::ostream& os, const Dataset& ds)
{
    const DatasetMeta& m = ds.meta;
    os << kDatasetMagic << ' ' << kDatasetVersion << " classes=" << m.classes << " u_max=" << m.u_max
       << " beams=" << m.beams << " width=" << m.image_width << " height=" << m.image_height
       << " camera=" << m.camera_id << " split_seed=" << m.split_seed
       << " train_fraction=" << format_double(m.train_fraction) << " count=" << ds.samples.size() << '\n';

    std::string line;
    for (const Sample& s : ds.samples) {
        if (s.camera_id != m.camera_id)
            throw std::invalid_argument("dataset: sample camera differs from the dataset camera");
        if (s.input.rows() != m.feature_dim() || s.input.cols() != m.u_max ||
            s.t_star.size() != static_cast<std::size_t>(m.beams))
            throw std::invalid_argument("dataset: sample shape does not match the header");
        line.clear();
        line += std::to_string(s.scene_id);
        line += ',';
        line += std::to_string(s.camera_id);
        line += ',';
        for (Eigen::Index i = 0; i < s.input.size(); ++i) {
            if (i > 0)
                line += ' ';
            line += format_double(s.input.data()[i]);
        }
        line += ',';
        for (auto bit : s.t_star)
            line += bit ? '1' : '0';
        os << line << '\n';
    }
    if (!os)
        throw std::runtime_error("dataset: write failed");
}

Dataset load_dataset(std::istream& is)
{
    std::string header;
    if (!std::getline(is, header))
        throw std::runtime_error("dataset: missing header");

    const auto tokens = split_on(header, ' ');
    if (tokens.size() < 2 || tokens[0] != kDatasetMagic)
        throw std::runtime_error("dataset: not a dataset file (bad header)");
    const int version = parse_number<int>(tokens[1], "version");
    if (version != kDatasetVersion)
        throw std::runtime_error("dataset: unsupported version " + std::to_string(version));

    std::map<std::string_view, std::string_view> fields;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error("dataset: malformed header field '" + std::string(tokens[i]) + "'");
        fields[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
    }
    auto field = [&](const char* key) {
        auto it = fields.find(key);
        if (it == fields.end())
            throw std::runtime_error(std::string("dataset: header lacks '") + key + "'");
        return it->second;
    };

    Dataset ds;
    DatasetMeta& m = ds.meta;
    m.classes = parse_number<int>(field("classes"), "classes");
    m.u_max = parse_number<int>(field("u_max"), "u_max");
    m.beams = parse_number<int>(field("beams"), "beams");
    m.image_width = parse_number<int>(field("width"), "width");
    m.image_height = parse_number<int>(field("height"), "height");
    m.camera_id = parse_number<int>(field("camera"), "camera");
    m.split_seed = parse_number<std::uint64_t>(field("split_seed"), "split_seed");
    m.train_fraction = parse_number<double>(field("train_fraction"), "train_fraction");
    const auto count = parse_number<std::size_t>(field("count"), "count");
    if (m.classes < 1 || m.u_max < 1 || m.beams < 1)
        throw std::runtime_error("dataset: header dimensions must be positive");

    const auto values = static_cast<std::size_t>(m.feature_dim()) * static_cast<std::size_t>(m.u_max);
    std::string line;
    ds.samples.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        if (!std::getline(is, line))
            throw std::runtime_error("dataset: truncated file (" + std::to_string(n) + " of " +
                                     std::to_string(count) + " records)");
        const auto parts = split_on(line, ',');
        if (parts.size() != 4)
            throw std::runtime_error("dataset: record " + std::to_string(n) + " has the wrong field count");

        Sample s;
        s.scene_id = parse_number<std::uint64_t>(parts[0], "scene id");
        s.camera_id = parse_number<int>(parts[1], "camera id");
        if (s.camera_id != m.camera_id)
            throw std::runtime_error("dataset: record camera differs from the header camera");

        const auto nums = split_on(parts[2], ' ');
        if (nums.size() != values)
            throw std::runtime_error("dataset: record " + std::to_string(n) + " has the wrong input size");
        s.input.resize(m.feature_dim(), m.u_max);
        for (std::size_t i = 0; i < values; ++i)
            s.input.data()[i] = parse_number<double>(nums[i], "input value");

        if (parts[3].size() != static_cast<std::size_t>(m.beams))
            throw std::runtime_error("dataset: record " + std::to_string(n) + " has the wrong label length");
        s.t_star.resize(m.beams);
        for (int q = 0; q < m.beams; ++q) {
            const char c = parts[3][q];
            if (c != '0' && c != '1')
                throw std::runtime_error("dataset: label bits must be 0 or 1");
            s.t_star[q] = c == '1' ? 1 : 0;
        }
        ds.samples.push_back(std::move(s));
    }
    while (std::getline(is, line))
        if (!line.empty())
            throw std::runtime_error("dataset: trailing data after the declared record count");
    return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    save_dataset(os, ds);
}

Dataset load_dataset(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open dataset '" + path.string() + "'");
    return load_dataset(is);
}

} // namespace risbeam
