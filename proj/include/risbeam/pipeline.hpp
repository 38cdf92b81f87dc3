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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "risbeam/codebook.hpp"
#include "risbeam/dataset.hpp"
#include "risbeam/detector.hpp"
#include "risbeam/link.hpp"
#include "risbeam/metrics.hpp"
#include "risbeam/scene.hpp"
#include "risbeam/setnet.hpp"

namespace risbeam {

struct CodebookGrid {
    int n_az = 32;
    int n_el = 8;
};

struct DatasetConfig {
    int scenes = 10000;
    int u_max = 8;
    double train_fraction = 0.8;
};

/// Everything a run needs. All randomness derives from scenario.master_seed.
struct RunConfig {
    ScenarioConfig scenario;
    LinkModel link;
    CodebookGrid codebook;
    DetectorNoise detector;
    DatasetConfig dataset;
    std::vector<int> hidden{128, 128};
    TrainConfig train;

    std::uint64_t seed() const { return scenario.master_seed; }
    void set_seed(std::uint64_t seed);
    NetworkShape network_shape() const;
    void validate() const;
};

/// Street-side RIS scenario with a 32x8 array and a 256-beam codebook.
RunConfig default_run_config();

/// Missing keys keep their defaults.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

/// FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const RunConfig& cfg);

Codebook make_codebook(const RunConfig& cfg);

/// Oracle results for the candidate UEs of one stored sample, regenerated
/// from the scene index.
std::vector<UeOracle> sample_oracles(const RunConfig& cfg, const Codebook& cb, const Sample& sample);

std::filesystem::path dataset_filename(int camera_id);

struct GenSummary {
    std::vector<std::filesystem::path> datasets;
    std::filesystem::path manifest;
    std::vector<std::size_t> sample_counts;
};

/// Scenes -> channels -> exhaustive-search labels -> detections -> encoding.
/// Writes one dataset per camera, scenes.jsonl, codebook.bin and manifest.json.
GenSummary cmd_gen(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct TrainSummary {
    std::filesystem::path model;
    std::filesystem::path curve;
    LearningCurves curves;
};

TrainSummary cmd_train(const RunConfig& cfg, const std::filesystem::path& dataset_path, Variant variant,
                       const std::filesystem::path& out_dir, const EpochCallback& on_epoch = {});

using Scorer = std::function<Eigen::VectorXd(const Sample&)>;

/// Thresholded predictions against labels plus per-UE rates of sweeping Q-hat.
EvalReport evaluate(const Scorer& scorer, std::span<const Sample> test_set,
                    std::span<const std::vector<UeOracle>> oracles, double delta = 0.5);

/// Test split of a dataset (the split recorded in its header).
std::vector<Sample> test_split(const Dataset& ds);
std::vector<Sample> train_split(const Dataset& ds);

/// Throws when the model and dataset disagree on C, U_max or |Q|.
void check_compatible(const SetNetwork& net, const DatasetMeta& meta);

struct EvalSummary {
    EvalReport report;
    std::filesystem::path table;
};

EvalSummary cmd_eval(const RunConfig& cfg, const std::filesystem::path& dataset_path,
                     const std::filesystem::path& model_path, const std::filesystem::path& out_dir);

struct SweepSummary {
    std::vector<RatioPoint> curve;
    std::filesystem::path table;
};

SweepSummary cmd_sweep(const RunConfig& cfg, const std::filesystem::path& dataset_path,
                       const std::filesystem::path& model_path, std::vector<std::size_t> k_values,
                       const std::filesystem::path& out_dir);

} // namespace risbeam
