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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "risbeam/setnet.hpp"

using namespace risbeam;

namespace {

constexpr Variant kAll[] = {Variant::set_sum, Variant::reuse_concat, Variant::vanilla_fc};

NetworkShape tiny(int u_max = 3)
{
    return {2, u_max, 4, {5, 4}};
}

Eigen::MatrixXd random_input(std::mt19937_64& rng, const NetworkShape& s, int active)
{
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(s.feature_dim(), s.u_max);
    for (int c = 0; c < active; ++c) {
        v(std::uniform_int_distribution<int>(0, s.classes - 1)(rng), c) = 1.0;
        for (int r = 0; r < 4; ++r)
            v(s.classes + r, c) = u(rng);
    }
    return v;
}

Sample random_sample(std::mt19937_64& rng, const NetworkShape& s, int active)
{
    Sample out;
    out.input = random_input(rng, s, active);
    out.t_star.resize(s.beams);
    for (auto& b : out.t_star)
        b = rng() % 3 == 0;
    return out;
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& v, std::mt19937_64& rng)
{
    std::vector<int> order(v.cols());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::MatrixXd out(v.rows(), v.cols());
    for (Eigen::Index c = 0; c < v.cols(); ++c)
        out.col(c) = v.col(order[c]);
    return out;
}

double batch_loss(const SetNetwork& net, const std::vector<Sample>& batch)
{
    std::vector<const Sample*> ptrs;
    for (const auto& s : batch)
        ptrs.push_back(&s);
    return net.loss_and_gradient(ptrs, nullptr);
}

} // namespace

TEST(Bce, ClosedForms)
{
    const std::vector<std::uint8_t> t{1, 0, 1, 1, 0};
    EXPECT_NEAR(bce_loss(Eigen::VectorXd::Constant(5, 0.5), t), std::log(2.0), 1e-12);

    Eigen::VectorXd perfect(5);
    perfect << 1, 0, 1, 1, 0;
    EXPECT_LT(bce_loss(perfect, t), 1e-11);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    Eigen::VectorXd p(5);
    for (auto& x : p)
        x = u(rng);
    std::vector<std::uint8_t> flipped;
    for (auto b : t)
        flipped.push_back(1 - b);
    EXPECT_NEAR(bce_loss(p, t), bce_loss((1.0 - p.array()).matrix(), flipped), 1e-12);
}

TEST(Forward, EmptyInputGivesOneHalf)
{
    for (Variant v : {Variant::set_sum, Variant::reuse_concat}) {
        SetNetwork net(v, tiny());
        net.initialize(3);
        const Eigen::VectorXd t = net.forward(Eigen::MatrixXd::Zero(6, 3));
        for (Eigen::Index q = 0; q < t.size(); ++q)
            EXPECT_EQ(t[q], 0.5);
    }
}

TEST(Forward, SingleLayerHandComputation)
{
    // Stack is one affine layer (C+4) -> |Q| with |Q| = C+4.
    SetNetwork net(Variant::set_sum, {2, 2, 6, {}});
    ASSERT_EQ(net.parameter_count(), 6 * 6 + 6);
    auto& th = net.parameters();
    th.setZero();
    for (int i = 0; i < 6; ++i)
        th[i * 6 + i] = 2.0;          // W = 2 I, row-major
    for (int i = 0; i < 6; ++i)
        th[36 + i] = 0.1 * (i - 2);  // bias
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(6, 2);
    v.col(0) << 0, 1, 0.25, 0.5, 0.125, 0.1;
    const Eigen::VectorXd t = net.forward(v);
    for (int q = 0; q < 6; ++q) {
        const double z = 2.0 * v(q, 0) + 0.1 * (q - 2);
        EXPECT_NEAR(t[q], 1.0 / (1.0 + std::exp(-z)), 1e-12);
    }
}

TEST(Forward, OutputsInOpenUnitInterval)
{
    std::mt19937_64 rng(6);
    for (Variant v : kAll) {
        SetNetwork net(v, tiny());
        net.initialize(9);
        for (int i = 0; i < 50; ++i) {
            const Eigen::VectorXd t = net.forward(random_input(rng, tiny(), i % 4));
            ASSERT_EQ(t.size(), 4);
            EXPECT_TRUE((t.array() > 0.0).all() && (t.array() < 1.0).all());
        }
    }
}

TEST(Forward, DimensionMismatchThrows)
{
    SetNetwork net(Variant::set_sum, tiny());
    EXPECT_THROW(net.forward(Eigen::MatrixXd::Zero(5, 3)), std::invalid_argument);
    EXPECT_THROW(net.forward(Eigen::MatrixXd::Zero(6, 4)), std::invalid_argument);
}

TEST(Invariance, SetSumPermutationExact)
{
    const NetworkShape shape{3, 8, 16, {32, 32}};
    SetNetwork net(Variant::set_sum, shape);
    net.initialize(21);
    std::mt19937_64 rng(100);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::MatrixXd v = random_input(rng, shape, 1 + i % 8);
        const Eigen::VectorXd a = net.forward(v);
        const Eigen::VectorXd b = net.forward(permute_columns(v, rng));
        ASSERT_EQ(a, b) << "trial " << i;
    }
}

TEST(Invariance, SetSumPaddingExact)
{
    const NetworkShape small{2, 3, 8, {16}};
    NetworkShape large = small;
    large.u_max = 7;
    SetNetwork a(Variant::set_sum, small);
    a.initialize(4);
    SetNetwork b(Variant::set_sum, large);
    ASSERT_EQ(a.parameter_count(), b.parameter_count());
    b.parameters() = a.parameters();
    std::mt19937_64 rng(8);
    for (int i = 0; i < 200; ++i) {
        const Eigen::MatrixXd v = random_input(rng, small, i % 4);
        Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(small.feature_dim(), large.u_max);
        padded.leftCols(small.u_max) = v;
        ASSERT_EQ(a.forward(v), b.forward(permute_columns(padded, rng)));
    }
}

TEST(Invariance, VanillaIsOrderSensitive)
{
    SetNetwork net(Variant::vanilla_fc, tiny());
    net.initialize(5);
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd v = random_input(rng, tiny(), 3);
    Eigen::MatrixXd swapped = v;
    swapped.col(0).swap(swapped.col(2));
    EXPECT_GT((net.forward(v) - net.forward(swapped)).norm(), 1e-6);
}

TEST(Gradient, MatchesCentralDifferences)
{
    std::mt19937_64 rng(13);
    for (Variant v : kAll) {
        SetNetwork net(v, tiny());
        net.initialize(17);
        // Move off zero biases so no ReLU sits on its kink.
        std::normal_distribution<double> g(0.0, 0.1);
        for (auto& p : net.parameters())
            p += g(rng);
        std::vector<Sample> batch;
        for (int a : {3, 1, 2, 0})
            batch.push_back(random_sample(rng, tiny(), a));
        std::vector<const Sample*> ptrs;
        for (const auto& s : batch)
            ptrs.push_back(&s);

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameter_count());
        net.loss_and_gradient(ptrs, &grad);

        const double eps = 1e-6;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
            const double saved = net.parameters()[i];
            net.parameters()[i] = saved + eps;
            const double up = batch_loss(net, batch);
            net.parameters()[i] = saved - eps;
            const double down = batch_loss(net, batch);
            net.parameters()[i] = saved;
            const double fd = (up - down) / (2 * eps);
            worst = std::max(worst, std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd)));
        }
        EXPECT_LT(worst, 1e-4) << variant_name(v);
    }
}

TEST(Gradient, PaddedColumnsContributeNothing)
{
    const NetworkShape small{2, 2, 4, {6}};
    NetworkShape large = small;
    large.u_max = 5;
    SetNetwork a(Variant::set_sum, small);
    a.initialize(1);
    SetNetwork b(Variant::set_sum, large);
    b.parameters() = a.parameters();
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd v = random_input(rng, small, 2);
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(6, 5);
    padded.leftCols(2) = v;
    const Eigen::VectorXd up = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
    Eigen::VectorXd ga = Eigen::VectorXd::Zero(a.parameter_count());
    Eigen::VectorXd gb = Eigen::VectorXd::Zero(b.parameter_count());
    a.accumulate_logit_gradient(v, up, ga);
    b.accumulate_logit_gradient(padded, up, gb);
    EXPECT_EQ(ga, gb);

    Eigen::VectorXd gz = Eigen::VectorXd::Zero(b.parameter_count());
    b.accumulate_logit_gradient(Eigen::MatrixXd::Zero(6, 5), up, gz);
    EXPECT_EQ(gz.norm(), 0.0);
}

TEST(Gradient, DuplicateColumnDoubles)
{
    const NetworkShape shape{2, 3, 4, {6, 5}};
    SetNetwork net(Variant::set_sum, shape);
    net.initialize(2);
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd one = random_input(rng, shape, 1);
    Eigen::MatrixXd two = one;
    two.col(1) = one.col(0);
    const Eigen::VectorXd up = Eigen::VectorXd::LinSpaced(4, 0.5, -1.5);
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(net.parameter_count());
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(net.parameter_count());
    net.accumulate_logit_gradient(one, up, g1);
    net.accumulate_logit_gradient(two, up, g2);
    EXPECT_LE((g2 - 2.0 * g1).norm(), 1e-12 * g1.norm());
}

TEST(Train, OverfitsTenSamples)
{
    const NetworkShape shape{2, 4, 8, {32, 32}};
    std::mt19937_64 rng(10);
    std::vector<Sample> train_set;
    for (int i = 0; i < 10; ++i)
        train_set.push_back(random_sample(rng, shape, 1 + i % 4));
    TrainConfig cfg;
    cfg.optimizer = Optimizer::adam;
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 5;
    cfg.epochs = 600;
    cfg.seed = 1;
    const TrainResult r = train(Variant::set_sum, shape, train_set, train_set, cfg);
    EXPECT_LT(r.curves.train_loss.back(), 0.01);
    EXPECT_EQ(r.curves.train_loss.size(), 600u);
}

TEST(Train, SameSeedBitIdentical)
{
    const NetworkShape shape = tiny();
    std::mt19937_64 rng(10);
    std::vector<Sample> data;
    for (int i = 0; i < 40; ++i)
        data.push_back(random_sample(rng, shape, i % 4));
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 7;
    cfg.seed = 42;
    for (Variant v : kAll) {
        const auto a = train(v, shape, data, data, cfg);
        const auto b = train(v, shape, data, data, cfg);
        EXPECT_EQ(a.net.parameters(), b.net.parameters());
        EXPECT_EQ(a.curves.test_loss, b.curves.test_loss);
    }
    const auto base = train(Variant::set_sum, shape, data, data, cfg);
    cfg.seed = 43;
    EXPECT_NE(train(Variant::set_sum, shape, data, data, cfg).net.parameters(), base.net.parameters());
}

TEST(Train, RejectsBadConfig)
{
    std::mt19937_64 rng(1);
    std::vector<Sample> data{random_sample(rng, tiny(), 1)};
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(train(Variant::set_sum, tiny(), data, data, cfg), std::invalid_argument);
    EXPECT_THROW(train(Variant::set_sum, tiny(), {}, data, TrainConfig{}), std::invalid_argument);
}

TEST(Train, DivergenceAborts)
{
    std::mt19937_64 rng(1);
    std::vector<Sample> data;
    for (int i = 0; i < 8; ++i)
        data.push_back(random_sample(rng, tiny(), 3));
    TrainConfig cfg;
    cfg.learning_rate = 1e300;
    cfg.epochs = 50;
    EXPECT_THROW(train(Variant::vanilla_fc, tiny(), data, data, cfg), std::runtime_error);
}

TEST(Checkpoint, RoundTripBitExact)
{
    for (Variant v : kAll) {
        SetNetwork net(v, tiny(3));
        net.initialize(77);
        std::stringstream ss;
        save_model(ss, net);
        const SetNetwork back = load_model(ss);
        EXPECT_EQ(back.variant(), v);
        EXPECT_EQ(back.shape(), net.shape());
        EXPECT_EQ(back.parameters(), net.parameters());
    }
}

TEST(Checkpoint, CorruptionIsAnError)
{
    SetNetwork net(Variant::set_sum, tiny());
    net.initialize(1);
    std::stringstream ss;
    save_model(ss, net);
    const std::string bytes = ss.str();
    auto load = [](const std::string& s) {
        std::stringstream in(s);
        return load_model(in);
    };
    EXPECT_THROW(load("nonsense"), std::runtime_error);
    EXPECT_THROW(load(bytes.substr(0, bytes.size() - 8)), std::runtime_error);
    std::string bad = bytes;
    bad.replace(bad.find("variant=set_sum"), 15, "variant=set_sux");
    EXPECT_THROW(load(bad), std::exception);
}

TEST(Variants, ParseNames)
{
    for (Variant v : kAll)
        EXPECT_EQ(parse_variant(variant_name(v)), v);
    try {
        parse_variant("deep_set");
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("set_sum, reuse_concat, vanilla_fc"), std::string::npos);
    }
}
