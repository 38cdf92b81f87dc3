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

#include "risbeam/setnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "risbeam/random.hpp"

namespace risbeam {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kProbClamp = 1e-12;

double sigmoid(double z)
{
    return 1.0 / (1.0 + std::exp(-z));
}

bool column_is_zero(const Eigen::MatrixXd& m, Eigen::Index c)
{
    return (m.col(c).array() == 0.0).all();
}

bool column_less(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b)
{
    const double* pa = m.col(a).data();
    const double* pb = m.col(b).data();
    return std::lexicographical_compare(pa, pa + m.rows(), pb, pb + m.rows());
}

} // namespace

std::string_view variant_name(Variant v)
{
    switch (v) {
    case Variant::set_sum:
        return "set_sum";
    case Variant::reuse_concat:
        return "reuse_concat";
    case Variant::vanilla_fc:
        return "vanilla_fc";
    }
    return "unknown";
}

Variant parse_variant(std::string_view tag)
{
    for (Variant v : {Variant::set_sum, Variant::reuse_concat, Variant::vanilla_fc})
        if (tag == variant_name(v))
            return v;
    throw std::invalid_argument("unknown variant '" + std::string(tag) +
                                "'; valid tags: set_sum, reuse_concat, vanilla_fc");
}

std::string_view optimizer_name(Optimizer o)
{
    return o == Optimizer::adam ? "adam" : "sgd_momentum";
}

Optimizer parse_optimizer(std::string_view tag)
{
    if (tag == "sgd_momentum")
        return Optimizer::sgd_momentum;
    if (tag == "adam")
        return Optimizer::adam;
    throw std::invalid_argument("unknown optimizer '" + std::string(tag) + "'; valid: sgd_momentum, adam");
}

// ---- network ------------------------------------------------------------------

struct SetNetwork::Batch {
    Eigen::Index size = 0;
    Eigen::MatrixXd x;
    std::vector<Eigen::Index> owner; ///< sample of each stack column
    std::vector<Eigen::Index> slot;  ///< input column of each stack column
    std::vector<Eigen::MatrixXd> acts;
    Eigen::MatrixXd concat;
};

SetNetwork::SetNetwork(Variant variant, NetworkShape shape) : variant_(variant), shape_(std::move(shape))
{
    if (shape_.classes < 1 || shape_.u_max < 1 || shape_.beams < 1)
        throw std::invalid_argument("network: classes, U_max and |Q| must be >= 1");
    for (int h : shape_.hidden)
        if (h < 1)
            throw std::invalid_argument("network: hidden widths must be >= 1");

    int width = variant_ == Variant::vanilla_fc ? shape_.feature_dim() * shape_.u_max : shape_.feature_dim();
    for (int h : shape_.hidden) {
        stack_.push_back(add_dense(width, h));
        width = h;
    }
    stack_.push_back(add_dense(width, shape_.beams));
    if (variant_ == Variant::reuse_concat)
        head_ = add_dense(shape_.u_max * shape_.beams, shape_.beams);
    theta_ = Eigen::VectorXd::Zero(theta_.size());
}

SetNetwork::Dense SetNetwork::add_dense(int in, int out)
{
    Dense d;
    d.in = in;
    d.out = out;
    d.weights = theta_.size();
    d.bias = d.weights + static_cast<Eigen::Index>(in) * out;
    theta_.conservativeResize(d.bias + out);
    return d;
}

void SetNetwork::initialize(std::uint64_t seed)
{
    Rng rng = make_rng(seed, Stream::init);
    auto fill = [&](const Dense& d, bool relu_follows) {
        const double limit = relu_follows ? std::sqrt(6.0 / d.in) : std::sqrt(6.0 / (d.in + d.out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d.in) * d.out; ++i)
            theta_[d.weights + i] = dist(rng);
        theta_.segment(d.bias, d.out).setZero();
    };
    for (std::size_t l = 0; l < stack_.size(); ++l)
        fill(stack_[l], l + 1 < stack_.size());
    if (variant_ == Variant::reuse_concat)
        fill(head_, false);
}

void SetNetwork::check_input(const Eigen::MatrixXd& input) const
{
    if (input.rows() != shape_.feature_dim() || input.cols() != shape_.u_max)
        throw std::invalid_argument("network: input is " + std::to_string(input.rows()) + "x" +
                                    std::to_string(input.cols()) + ", expected " +
                                    std::to_string(shape_.feature_dim()) + "x" + std::to_string(shape_.u_max));
}

SetNetwork::Batch SetNetwork::gather(std::span<const Eigen::MatrixXd* const> inputs) const
{
    Batch batch;
    batch.size = static_cast<Eigen::Index>(inputs.size());
    for (const auto* in : inputs)
        check_input(*in);

    if (variant_ == Variant::vanilla_fc) {
        const Eigen::Index flat = static_cast<Eigen::Index>(shape_.feature_dim()) * shape_.u_max;
        batch.x.resize(flat, batch.size);
        for (Eigen::Index b = 0; b < batch.size; ++b)
            batch.x.col(b) = Eigen::Map<const Eigen::VectorXd>(inputs[b]->data(), flat);
        return batch;
    }

    std::vector<std::pair<const Eigen::MatrixXd*, Eigen::Index>> cols;
    for (Eigen::Index b = 0; b < batch.size; ++b) {
        const Eigen::MatrixXd& v = *inputs[b];
        std::vector<Eigen::Index> active;
        for (Eigen::Index c = 0; c < v.cols(); ++c)
            if (!column_is_zero(v, c))
                active.push_back(c);
        // Canonical order makes the pooled sum independent of input order.
        if (variant_ == Variant::set_sum)
            std::stable_sort(active.begin(), active.end(),
                             [&](Eigen::Index a, Eigen::Index c) { return column_less(v, a, c); });
        for (Eigen::Index c : active) {
            cols.emplace_back(&v, c);
            batch.owner.push_back(b);
            batch.slot.push_back(c);
        }
    }
    batch.x.resize(shape_.feature_dim(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        batch.x.col(static_cast<Eigen::Index>(i)) = cols[i].first->col(cols[i].second);
    return batch;
}

Eigen::MatrixXd SetNetwork::run_stack(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& acts) const
{
    acts.clear();
    acts.push_back(x);
    for (std::size_t l = 0; l < stack_.size(); ++l) {
        const Dense& d = stack_[l];
        Eigen::Map<const RowMat> w(theta_.data() + d.weights, d.out, d.in);
        Eigen::Map<const Eigen::VectorXd> bias(theta_.data() + d.bias, d.out);
        Eigen::MatrixXd z = w * acts.back();
        z.colwise() += bias;
        if (l + 1 < stack_.size())
            z = z.cwiseMax(0.0);
        acts.push_back(std::move(z));
    }
    return acts.back();
}

Eigen::MatrixXd SetNetwork::batch_logits(Batch& batch) const
{
    const Eigen::MatrixXd y = run_stack(batch.x, batch.acts);
    const int q = shape_.beams;

    switch (variant_) {
    case Variant::vanilla_fc:
        return y;
    case Variant::set_sum: {
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(q, batch.size);
        for (Eigen::Index c = 0; c < y.cols(); ++c)
            z.col(batch.owner[c]) += y.col(c);
        return z;
    }
    case Variant::reuse_concat: {
        batch.concat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(shape_.u_max) * q, batch.size);
        for (Eigen::Index c = 0; c < y.cols(); ++c)
            batch.concat.block(batch.slot[c] * q, batch.owner[c], q, 1) = y.col(c);
        Eigen::Map<const RowMat> w(theta_.data() + head_.weights, head_.out, head_.in);
        Eigen::Map<const Eigen::VectorXd> bias(theta_.data() + head_.bias, head_.out);
        Eigen::MatrixXd z = w * batch.concat;
        z.colwise() += bias;
        return z;
    }
    }
    throw std::logic_error("unhandled variant");
}

void SetNetwork::backward(const Batch& batch, const Eigen::MatrixXd& dlogits, Eigen::VectorXd& grad) const
{
    if (grad.size() != theta_.size())
        throw std::invalid_argument("network: gradient buffer has the wrong size");
    const int q = shape_.beams;

    Eigen::MatrixXd dy(q, batch.x.cols());
    switch (variant_) {
    case Variant::vanilla_fc:
        dy = dlogits;
        break;
    case Variant::set_sum:
        for (Eigen::Index c = 0; c < dy.cols(); ++c)
            dy.col(c) = dlogits.col(batch.owner[c]);
        break;
    case Variant::reuse_concat: {
        Eigen::Map<const RowMat> w(theta_.data() + head_.weights, head_.out, head_.in);
        Eigen::Map<RowMat> gw(grad.data() + head_.weights, head_.out, head_.in);
        gw.noalias() += dlogits * batch.concat.transpose();
        grad.segment(head_.bias, head_.out) += dlogits.rowwise().sum();
        const Eigen::MatrixXd dconcat = w.transpose() * dlogits;
        for (Eigen::Index c = 0; c < dy.cols(); ++c)
            dy.col(c) = dconcat.block(batch.slot[c] * q, batch.owner[c], q, 1);
        break;
    }
    }

    Eigen::MatrixXd da = std::move(dy);
    for (std::size_t l = stack_.size(); l-- > 0;) {
        const Dense& d = stack_[l];
        if (l + 1 < stack_.size())
            da = da.cwiseProduct((batch.acts[l + 1].array() > 0.0).cast<double>().matrix());
        Eigen::Map<RowMat> gw(grad.data() + d.weights, d.out, d.in);
        gw.noalias() += da * batch.acts[l].transpose();
        grad.segment(d.bias, d.out) += da.rowwise().sum();
        if (l > 0) {
            Eigen::Map<const RowMat> w(theta_.data() + d.weights, d.out, d.in);
            da = w.transpose() * da;
        }
    }
}

Eigen::VectorXd SetNetwork::logits(const Eigen::MatrixXd& input) const
{
    const Eigen::MatrixXd* one[] = {&input};
    Batch batch = gather(one);
    return batch_logits(batch).col(0);
}

Eigen::VectorXd SetNetwork::forward(const Eigen::MatrixXd& input) const
{
    return logits(input).unaryExpr(&sigmoid);
}

double SetNetwork::loss_and_gradient(std::span<const Sample* const> samples, Eigen::VectorXd* grad) const
{
    if (samples.empty())
        throw std::invalid_argument("network: empty batch");
    std::vector<const Eigen::MatrixXd*> inputs;
    inputs.reserve(samples.size());
    for (const auto* s : samples) {
        if (s->t_star.size() != static_cast<std::size_t>(shape_.beams))
            throw std::invalid_argument("network: label length does not match |Q|");
        inputs.push_back(&s->input);
    }

    Batch batch = gather(inputs);
    const Eigen::MatrixXd z = batch_logits(batch);
    const auto n = static_cast<double>(samples.size());
    const double scale = 1.0 / (n * shape_.beams);

    double loss = 0.0;
    Eigen::MatrixXd dz(z.rows(), z.cols());
    for (Eigen::Index b = 0; b < z.cols(); ++b) {
        const Eigen::VectorXd t = z.col(b).unaryExpr(&sigmoid);
        loss += bce_loss(t, samples[b]->t_star);
        for (Eigen::Index k = 0; k < z.rows(); ++k)
            dz(k, b) = (t[k] - samples[b]->t_star[k]) * scale;
    }
    if (grad != nullptr)
        backward(batch, dz, *grad);
    return loss / n;
}

void SetNetwork::accumulate_logit_gradient(const Eigen::MatrixXd& input, const Eigen::VectorXd& dlogits,
                                           Eigen::VectorXd& grad) const
{
    const Eigen::MatrixXd* one[] = {&input};
    Batch batch = gather(one);
    batch_logits(batch);
    backward(batch, dlogits, grad);
}

double bce_loss(const Eigen::VectorXd& scores, std::span<const std::uint8_t> t_star)
{
    if (static_cast<std::size_t>(scores.size()) != t_star.size() || t_star.empty())
        throw std::invalid_argument("bce_loss: score and label lengths differ");
    double sum = 0.0;
    for (Eigen::Index q = 0; q < scores.size(); ++q) {
        const double t = std::clamp(scores[q], kProbClamp, 1.0 - kProbClamp);
        sum += t_star[q] ? std::log(t) : std::log(1.0 - t);
    }
    return -sum / static_cast<double>(scores.size());
}

// ---- training -----------------------------------------------------------------

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("train: learning rate must be positive");
    if (batch_size < 1 || epochs < 1)
        throw std::invalid_argument("train: batch size and epochs must be >= 1");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("train: momentum must lie in [0, 1)");
}

double mean_loss(const SetNetwork& net, std::span<const Sample> samples)
{
    constexpr std::size_t kChunk = 256;
    if (samples.empty())
        throw std::invalid_argument("mean_loss: no samples");
    double total = 0.0;
    std::vector<const Sample*> chunk;
    for (std::size_t start = 0; start < samples.size(); start += kChunk) {
        chunk.clear();
        for (std::size_t i = start; i < std::min(samples.size(), start + kChunk); ++i)
            chunk.push_back(&samples[i]);
        total += net.loss_and_gradient(chunk, nullptr) * static_cast<double>(chunk.size());
    }
    return total / static_cast<double>(samples.size());
}

TrainResult train(Variant variant, const NetworkShape& shape, std::span<const Sample> train_set,
                  std::span<const Sample> test_set, const TrainConfig& cfg, const EpochCallback& on_epoch)
{
    cfg.validate();
    if (train_set.empty() || test_set.empty())
        throw std::invalid_argument("train: train and test splits must be non-empty");

    TrainResult result{SetNetwork(variant, shape), {}};
    SetNetwork& net = result.net;
    net.initialize(cfg.seed);

    const Eigen::Index n_params = net.parameter_count();
    Eigen::VectorXd grad(n_params);
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(n_params);
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(n_params);
    long long step = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<const Sample*> batch;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng = make_rng(cfg.seed, Stream::shuffle, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            batch.clear();
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i)
                batch.push_back(&train_set[order[i]]);

            grad.setZero();
            const double loss = net.loss_and_gradient(batch, &grad);
            if (!std::isfinite(loss) || !grad.allFinite())
                throw std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                         ", batch starting at " + std::to_string(start) +
                                         " (lower the learning rate)");

            ++step;
            if (cfg.optimizer == Optimizer::sgd_momentum) {
                m1 = cfg.momentum * m1 - cfg.learning_rate * grad;
                net.parameters() += m1;
            } else {
                m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
                m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseAbs2();
                const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
                net.parameters().array() -=
                    cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.epsilon);
            }
        }

        const double train_loss = mean_loss(net, train_set);
        const double test_loss = mean_loss(net, test_set);
        if (!std::isfinite(train_loss) || !std::isfinite(test_loss))
            throw std::runtime_error("training diverged: non-finite epoch loss at epoch " + std::to_string(epoch));
        result.curves.train_loss.push_back(train_loss);
        result.curves.test_loss.push_back(test_loss);
        if (on_epoch)
            on_epoch(epoch, train_loss, test_loss);
    }
    return result;
}

// ---- checkpoints --------------------------------------------------------------
//
// risbeam-model <version> variant=<tag> classes=C u_max=U beams=Q hidden=h1,h2 params=P
// followed by P little-endian f64 values in parameter order.

namespace {

constexpr std::string_view kModelMagic = "risbeam-model";

} // namespace

void save_model(std::ostream& os, const SetNetwork& net)
{
    const NetworkShape& s = net.shape();
    os << kModelMagic << ' ' << kModelVersion << " variant=" << variant_name(net.variant())
       << " classes=" << s.classes << " u_max=" << s.u_max << " beams=" << s.beams << " hidden=";
    for (std::size_t i = 0; i < s.hidden.size(); ++i)
        os << (i ? "," : "") << s.hidden[i];
    os << " params=" << net.parameter_count() << '\n';
    for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
        std::uint64_t bits;
        const double v = net.parameters()[i];
        std::memcpy(&bits, &v, 8);
        if constexpr (std::endian::native == std::endian::big)
            bits = __builtin_bswap64(bits);
        os.write(reinterpret_cast<const char*>(&bits), 8);
    }
    if (!os)
        throw std::runtime_error("model: write failed");
}

SetNetwork load_model(std::istream& is)
{
    std::string header;
    if (!std::getline(is, header))
        throw std::runtime_error("model: missing header");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != kModelMagic)
        throw std::runtime_error("model: not a checkpoint file (bad header)");
    if (version != kModelVersion)
        throw std::runtime_error("model: unsupported version " + std::to_string(version));

    std::map<std::string, std::string> fields;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("model: malformed header field '" + tok + "'");
        fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto field = [&](const char* key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end())
            throw std::runtime_error(std::string("model: header lacks '") + key + "'");
        return it->second;
    };

    NetworkShape shape;
    try {
        shape.classes = std::stoi(field("classes"));
        shape.u_max = std::stoi(field("u_max"));
        shape.beams = std::stoi(field("beams"));
        shape.hidden.clear();
        std::istringstream hidden(field("hidden"));
        for (std::string w; std::getline(hidden, w, ',');)
            if (!w.empty())
                shape.hidden.push_back(std::stoi(w));
    } catch (const std::logic_error&) {
        throw std::runtime_error("model: malformed numeric header field");
    }
    SetNetwork net(parse_variant(field("variant")), shape);
    if (std::stoll(field("params")) != net.parameter_count())
        throw std::runtime_error("model: parameter count does not match the declared architecture");

    for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
        std::uint64_t bits = 0;
        if (!is.read(reinterpret_cast<char*>(&bits), 8))
            throw std::runtime_error("model: truncated parameter block");
        if constexpr (std::endian::native == std::endian::big)
            bits = __builtin_bswap64(bits);
        double v;
        std::memcpy(&v, &bits, 8);
        net.parameters()[i] = v;
    }
    return net;
}

void save_model(const std::filesystem::path& path, const SetNetwork& net)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    save_model(os, net);
}

SetNetwork load_model(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open model '" + path.string() + "'");
    return load_model(is);
}

} // namespace risbeam
