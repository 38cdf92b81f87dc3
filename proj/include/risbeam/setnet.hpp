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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "risbeam/dataset.hpp"

namespace risbeam {

enum class Variant {
    set_sum,      ///< shared stack per UE, masked sum pooling, sigmoid
    reuse_concat, ///< shared stack per UE, slot concatenation, linear + sigmoid
    vanilla_fc,   ///< plain MLP on the flattened input matrix
};

std::string_view variant_name(Variant v);
/// Throws std::invalid_argument listing the valid tags.
Variant parse_variant(std::string_view tag);

struct NetworkShape {
    int classes = 2;
    int u_max = 8;
    int beams = 64;
    std::vector<int> hidden{128, 128};

    int feature_dim() const { return classes + 4; }
    bool operator==(const NetworkShape&) const = default;
};

/// Beam-set predictor. All trainable parameters live in one flat vector;
/// weight matrices are stored row-major (out x in) followed by their bias.
class SetNetwork {
public:
    SetNetwork(Variant variant, NetworkShape shape);

    Variant variant() const { return variant_; }
    const NetworkShape& shape() const { return shape_; }

    Eigen::VectorXd& parameters() { return theta_; }
    const Eigen::VectorXd& parameters() const { return theta_; }
    Eigen::Index parameter_count() const { return theta_.size(); }

    /// He-uniform for ReLU layers, Glorot-uniform for linear outputs, zero biases.
    void initialize(std::uint64_t seed);

    /// Pre-sigmoid scores for one input matrix.
    Eigen::VectorXd logits(const Eigen::MatrixXd& input) const;
    /// Scores in (0, 1).
    Eigen::VectorXd forward(const Eigen::MatrixXd& input) const;

    /// Mean loss over the batch; adds d(loss)/d(theta) into `grad` if given.
    double loss_and_gradient(std::span<const Sample* const> batch, Eigen::VectorXd* grad) const;

    /// Backpropagates a fixed upstream gradient on the logits of one input.
    void accumulate_logit_gradient(const Eigen::MatrixXd& input, const Eigen::VectorXd& dlogits,
                                   Eigen::VectorXd& grad) const;

private:
    struct Dense {
        Eigen::Index weights = 0; ///< offset of the row-major weight block
        Eigen::Index bias = 0;
        int in = 0;
        int out = 0;
    };
    struct Batch;

    Dense add_dense(int in, int out);
    void check_input(const Eigen::MatrixXd& input) const;
    Batch gather(std::span<const Eigen::MatrixXd* const> inputs) const;
    Eigen::MatrixXd run_stack(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& acts) const;
    Eigen::MatrixXd batch_logits(Batch& batch) const;
    void backward(const Batch& batch, const Eigen::MatrixXd& dlogits, Eigen::VectorXd& grad) const;

    Variant variant_;
    NetworkShape shape_;
    std::vector<Dense> stack_;
    Dense head_;
    Eigen::VectorXd theta_;
};

/// Element-wise binary cross-entropy averaged over beams; scores are clamped
/// to [1e-12, 1 - 1e-12].
double bce_loss(const Eigen::VectorXd& scores, std::span<const std::uint8_t> t_star);

enum class Optimizer { sgd_momentum, adam };

std::string_view optimizer_name(Optimizer o);
Optimizer parse_optimizer(std::string_view tag);

struct TrainConfig {
    double learning_rate = 1e-2;
    int batch_size = 32;
    int epochs = 200;
    Optimizer optimizer = Optimizer::sgd_momentum;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LearningCurves {
    std::vector<double> train_loss;
    std::vector<double> test_loss;
};

struct TrainResult {
    SetNetwork net;
    LearningCurves curves;
};

using EpochCallback = std::function<void(int epoch, double train_loss, double test_loss)>;

/// Mini-batch training, deterministic in cfg.seed. Losses are re-evaluated on
/// the full train and test splits after every epoch.
TrainResult train(Variant variant, const NetworkShape& shape, std::span<const Sample> train_set,
                  std::span<const Sample> test_set, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

double mean_loss(const SetNetwork& net, std::span<const Sample> samples);

inline constexpr int kModelVersion = 1;

void save_model(std::ostream& os, const SetNetwork& net);
SetNetwork load_model(std::istream& is);
void save_model(const std::filesystem::path& path, const SetNetwork& net);
SetNetwork load_model(const std::filesystem::path& path);

} // namespace risbeam
