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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "risbeam/detector.hpp"
#include "risbeam/random.hpp"
#include "risbeam/rate.hpp"

namespace risbeam {

/// One (image, label) pair: V is (C+4) x U_max with one column per detection
/// followed by zero padding; t_star is the multi-hot optimal beam set.
struct Sample {
    Eigen::MatrixXd input;
    std::vector<std::uint8_t> t_star;
    std::uint64_t scene_id = 0;
    int camera_id = 0;

    bool operator==(const Sample& other) const;
};

struct DatasetMeta {
    int classes = 2;
    int u_max = 8;
    int beams = 0;
    int image_width = 0;
    int image_height = 0;
    int camera_id = 0;
    std::uint64_t split_seed = 0;
    double train_fraction = 0.8;

    int feature_dim() const { return classes + 4; }
    bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
    DatasetMeta meta;
    std::vector<Sample> samples;
};

inline constexpr int kDatasetVersion = 1;

/// Keeps at most U_max detections, dropping the smallest boxes first, and
/// normalizes x/width by the image width and y/height by the image height.
Eigen::MatrixXd encode_input(std::span<const Detection> dets, int classes, int u_max, const CameraModel& camera);

std::vector<std::uint8_t> encode_label(const BeamSet& set, std::size_t beams);
BeamSet decode_label(std::span<const std::uint8_t> bits);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle, then the first round(fraction * n) indices go to train.
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(std::span<const T> items, double train_fraction, std::uint64_t seed)
{
    const SplitIndices idx = split_indices(items.size(), train_fraction, seed);
    std::pair<std::vector<T>, std::vector<T>> out;
    for (std::size_t i : idx.train)
        out.first.push_back(items[i]);
    for (std::size_t i : idx.test)
        out.second.push_back(items[i]);
    return out;
}

void save_dataset(std::ostream& os, const Dataset& ds);
Dataset load_dataset(std::istream& is);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace risbeam
