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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "risbeam/pipeline.hpp"

using namespace risbeam;
namespace fs = std::filesystem;

namespace {

struct Report {
    int failures = 0;

    void line(const std::string& id, bool pass, const std::string& detail, double seconds)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1fs", seconds);
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << "  " << detail << "  (" << buf << ")" << std::endl;
        failures += !pass;
    }
};

class Timer {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

CVec gaussian(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> g;
    CVec v(n);
    for (auto& x : v)
        x = cdouble(g(rng), g(rng));
    return v;
}

LinkChannels random_link(std::mt19937_64& rng, int m, int k)
{
    LinkChannels link;
    link.h_r = {m, 1, {}};
    link.h_t = {m, 1, {}};
    for (int i = 0; i < k; ++i) {
        link.h_r.bins.emplace_back(gaussian(rng, m));
        link.h_t.bins.emplace_back(gaussian(rng, m));
    }
    link.f = CVec::Ones(1);
    link.snr = 0.05;
    return link;
}

double diag_form_rate(const LinkChannels& link, const CVec& psi)
{
    const CMat d = psi.asDiagonal();
    double sum = 0.0;
    for (std::size_t k = 0; k < link.h_r.bins.size(); ++k) {
        const cdouble y = (link.h_r.bins[k].col(0).transpose() * d * link.h_t.bins[k] * link.f)(0, 0);
        sum += std::log2(1.0 + link.snr * std::norm(y));
    }
    return sum / static_cast<double>(link.h_r.bins.size());
}

// ---- AC1 ----------------------------------------------------------------------

void ac1(Report& rep)
{
    Timer t;
    std::mt19937_64 rng(101);
    const Codebook cb(UpaGeometry{8, 8, 0.5}, 8, 8);
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    double worst = 0.0;
    int agree = 0;
    for (int i = 0; i < 100; ++i) {
        const LinkChannels link = random_link(rng, 64, 8);
        CVec psi(64);
        for (auto& x : psi)
            x = std::polar(1.0, phase(rng));
        const double a = achievable_rate(link, psi);
        const double b = diag_form_rate(link, psi);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));

        std::size_t arg = 0;
        double top = -1.0;
        for (std::size_t q = 0; q < cb.size(); ++q) {
            const double r = diag_form_rate(link, cb.beam(q));
            if (r > top) {
                top = r;
                arg = q;
            }
        }
        agree += best_beam(link, cb) == arg;
    }
    rep.line("AC1 oracle/identity", worst <= 1e-12 && agree == 100,
             "hadamard-vs-diag max rel err " + fmt(worst) + " (<=1e-12), best_beam agreement " +
                 std::to_string(agree) + "/100",
             t.seconds());
}

// ---- AC2 ----------------------------------------------------------------------

void ac2(Report& rep, const RunConfig& bench)
{
    Timer t;
    // Parseval and FFT-vs-direct on benchmark UE channels.
    double parseval = 0.0, route = 0.0;
    int channels = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const Scene s = generate_scene(bench.scenario, i);
        for (const auto& ue : s.ues) {
            Rng rng = make_rng(s.seed, Stream::channel, 1, static_cast<std::uint64_t>(ue.id));
            auto paths = synth_paths(s, ue.position, s.ris.position, ris_frame(s), std::nullopt,
                                     bench.link.radio.wavelength(), rng);
            align_delays(paths);
            const DelayChannel dc = delay_channel(paths, bench.link.ris, bench.link.radio);
            const int k = bench.link.radio.subcarriers;
            const FreqChannel fast = freq_channel(dc, k);
            const FreqChannel slow = freq_channel_direct(dc, k);
            double et = 0.0, ef = 0.0;
            for (const auto& tap : dc.taps)
                et += tap.squaredNorm();
            for (std::size_t b = 0; b < fast.bins.size(); ++b) {
                ef += fast.bins[b].squaredNorm();
                route = std::max(route, (fast.bins[b] - slow.bins[b]).norm() / std::max(slow.bins[b].norm(), 1e-300));
            }
            if (et > 0.0)
                parseval = std::max(parseval, std::abs(ef - k * et) / (k * et));
            ++channels;
        }
    }

    // Single path, integer delay, sinc pulse, rho = M.
    const UpaGeometry g = bench.link.ris;
    RadioConfig r = bench.link.radio;
    r.pathloss = g.size();
    PathCluster p;
    p.alpha = 1.0;
    p.tau = 3 * r.sample_period;
    p.azimuth = 0.4;
    p.elevation = -0.2;
    const DelayChannel dc = delay_channel(std::vector{p}, g, r);
    const CVec a = array_response(g, p.azimuth, p.elevation);
    bool exact = (dc.taps[3].col(0) - a).norm() <= 1e-12;
    for (int d = 0; d < r.delay_taps; ++d)
        if (d != 3)
            exact = exact && dc.taps[d].norm() == 0.0;

    // Matched codebook beams.
    const Codebook cb = make_codebook(bench);
    double matched = 0.0;
    for (std::size_t q = 0; q < cb.size(); ++q) {
        const Angles dir = cb.direction(q);
        const cdouble y = (array_response(g, dir.azimuth, dir.elevation).array() * cb.beam(q).array()).sum();
        matched = std::max(matched, std::abs(std::abs(y) - g.size()));
    }

    rep.line("AC2 channel", parseval < 1e-9 && route <= 1e-10 && exact && matched <= 1e-9,
             "parseval rel err " + fmt(parseval) + " (<1e-9) over " + std::to_string(channels) +
                 " channels, fft-vs-direct " + fmt(route) + " (<=1e-10), integer-delay sinc " +
                 (exact ? "exact" : "NOT exact") + ", matched |a^T psi| - M max " + fmt(matched) + " (<=1e-9)",
             t.seconds());
}

// ---- AC3 ----------------------------------------------------------------------

Eigen::MatrixXd random_input(std::mt19937_64& rng, const NetworkShape& s, int active)
{
    std::uniform_real_distribution<double> u(0.01, 1.0);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(s.feature_dim(), s.u_max);
    for (int c = 0; c < active; ++c) {
        v(std::uniform_int_distribution<int>(0, s.classes - 1)(rng), c) = 1.0;
        for (int i = 0; i < 4; ++i)
            v(s.classes + i, c) = u(rng);
    }
    return v;
}

void ac3(Report& rep)
{
    Timer t;
    std::mt19937_64 rng(303);

    const NetworkShape shape{2, 8, 64, {128, 128}};
    SetNetwork net(Variant::set_sum, shape);
    net.initialize(5);
    int perm_ok = 0;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::MatrixXd v = random_input(rng, shape, 1 + i % shape.u_max);
        std::vector<int> order(shape.u_max);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Eigen::MatrixXd w(v.rows(), v.cols());
        for (int c = 0; c < shape.u_max; ++c)
            w.col(c) = v.col(order[c]);
        perm_ok += net.forward(v) == net.forward(w);
    }

    NetworkShape wide = shape;
    wide.u_max = 16;
    SetNetwork padded(Variant::set_sum, wide);
    padded.parameters() = net.parameters();
    int pad_ok = 0;
    for (int i = 0; i < 200; ++i) {
        const Eigen::MatrixXd v = random_input(rng, shape, i % (shape.u_max + 1));
        Eigen::MatrixXd big = Eigen::MatrixXd::Zero(shape.feature_dim(), wide.u_max);
        big.leftCols(shape.u_max) = v;
        pad_ok += net.forward(v) == padded.forward(big);
    }

    double worst_grad = 0.0;
    const NetworkShape tiny{2, 3, 5, {6, 4}};
    for (Variant variant : {Variant::set_sum, Variant::reuse_concat, Variant::vanilla_fc}) {
        SetNetwork small(variant, tiny);
        small.initialize(8);
        std::normal_distribution<double> jig(0.0, 0.1);
        for (auto& p : small.parameters())
            p += jig(rng);
        std::vector<Sample> batch(4);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            batch[b].input = random_input(rng, tiny, static_cast<int>(b % 4));
            batch[b].t_star.resize(tiny.beams);
            for (auto& x : batch[b].t_star)
                x = rng() % 2;
        }
        std::vector<const Sample*> ptrs;
        for (const auto& s : batch)
            ptrs.push_back(&s);
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(small.parameter_count());
        small.loss_and_gradient(ptrs, &grad);
        for (Eigen::Index i = 0; i < small.parameter_count(); ++i) {
            const double keep = small.parameters()[i];
            small.parameters()[i] = keep + 1e-6;
            const double up = small.loss_and_gradient(ptrs, nullptr);
            small.parameters()[i] = keep - 1e-6;
            const double down = small.loss_and_gradient(ptrs, nullptr);
            small.parameters()[i] = keep;
            const double fd = (up - down) / 2e-6;
            worst_grad = std::max(worst_grad, std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd)));
        }
    }

    const std::vector<std::uint8_t> target{1, 0, 0, 1, 1, 0, 1, 0};
    const double ln2_err = std::abs(bce_loss(Eigen::VectorXd::Constant(8, 0.5), target) - std::log(2.0));

    rep.line("AC3 network", perm_ok == 1000 && pad_ok == 200 && worst_grad < 1e-4 && ln2_err <= 1e-12,
             "permutation exact " + std::to_string(perm_ok) + "/1000, padding exact " + std::to_string(pad_ok) +
                 "/200, gradient max rel err " + fmt(worst_grad) + " (<1e-4), |loss(0.5)-ln2| " + fmt(ln2_err),
             t.seconds());
}

// ---- AC4 / AC5 ----------------------------------------------------------------

void ac4_ac5(Report& rep, const RunConfig& bench, const fs::path& work)
{
    Timer t;
    const fs::path dir = work / "benchmark";
    fs::remove_all(dir);
    const GenSummary gen = cmd_gen(bench, dir);
    const fs::path data = gen.datasets.at(0);
    std::cout << "  benchmark: " << gen.sample_counts[0] << " samples on camera 0" << std::endl;

    struct Result {
        double test_loss;
        EvalReport report;
        fs::path model;
    };
    std::map<Variant, Result> res;
    for (Variant v : {Variant::set_sum, Variant::reuse_concat, Variant::vanilla_fc}) {
        const TrainSummary ts = cmd_train(bench, data, v, dir);
        const EvalSummary es = cmd_eval(bench, data, ts.model, dir);
        res[v] = {ts.curves.test_loss.back(), es.report, ts.model};
        std::cout << "  " << variant_name(v) << ": final test loss " << fmt(res[v].test_loss) << ", accuracy "
                  << fmt(es.report.accuracy) << ", recall " << fmt(es.report.recall) << std::endl;
    }
    const Result& s = res[Variant::set_sum];
    const Result& r = res[Variant::reuse_concat];
    const Result& f = res[Variant::vanilla_fc];
    const double acc_gap = s.report.accuracy - f.report.accuracy;
    const double rec_gap = s.report.recall - f.report.recall;
    rep.line("AC4 learning-curve ordering", s.test_loss <= r.test_loss && r.test_loss <= f.test_loss &&
                                                acc_gap >= 0.10 && rec_gap >= 0.10,
             "test loss set_sum " + fmt(s.test_loss) + " <= reuse_concat " + fmt(r.test_loss) + " <= vanilla_fc " +
                 fmt(f.test_loss) + "; accuracy gap " + fmt(100 * acc_gap) + " pts, recall gap " +
                 fmt(100 * rec_gap) + " pts (>=10)",
             t.seconds());

    Timer t5;
    const Codebook cb = make_codebook(bench);
    std::vector<std::size_t> ks(cb.size());
    std::iota(ks.begin(), ks.end(), std::size_t{1});
    const SweepSummary sweep = cmd_sweep(bench, data, s.model, ks, dir);
    bool monotone = true;
    for (std::size_t i = 1; i < sweep.curve.size(); ++i)
        monotone = monotone && sweep.curve[i].ratio >= sweep.curve[i - 1].ratio;
    const double at_full = sweep.curve.back().ratio;
    const double at8 = sweep.curve.at(7).ratio;

    // Oracle scores t = t*, and uniformly random scores for contrast.
    const Dataset ds = load_dataset(data);
    const auto test = test_split(ds);
    std::vector<std::vector<UeOracle>> oracles;
    std::vector<Eigen::VectorXd> perfect, noise;
    std::size_t max_q = 0;
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u;
    for (const auto& smp : test) {
        oracles.push_back(sample_oracles(bench, cb, smp));
        Eigen::VectorXd p(static_cast<Eigen::Index>(cb.size())), z(p.size());
        for (Eigen::Index q = 0; q < p.size(); ++q) {
            p[q] = smp.t_star[static_cast<std::size_t>(q)];
            z[q] = u(rng);
        }
        max_q = std::max(max_q, decode_label(smp.t_star).size());
        perfect.push_back(p);
        noise.push_back(z);
    }
    std::vector<std::size_t> oracle_ks;
    for (std::size_t k = max_q; k <= cb.size(); ++k)
        oracle_ks.push_back(k);
    bool oracle_one = true;
    for (const auto& p : rate_ratio_curve(perfect, oracles, oracle_ks))
        oracle_one = oracle_one && p.ratio == 1.0;
    const double random_k1 = rate_ratio_curve(noise, oracles, {1}).front().ratio;
    const double trained_k1 = sweep.curve.front().ratio;

    rep.line("AC5 top-k rate ratio",
             monotone && at_full == 1.0 && at8 >= 0.95 && oracle_one && random_k1 < trained_k1,
             std::string("monotone ") + (monotone ? "yes" : "NO") + ", ratio(k=" + std::to_string(cb.size()) +
                 ") " + fmt(at_full) + ", ratio(k=8) " + fmt(at8) + " (>=0.95), oracle ratio 1 for k>=" +
                 std::to_string(max_q) + " " + (oracle_one ? "yes" : "NO") + ", k=1 trained " + fmt(trained_k1) +
                 " > random " + fmt(random_k1),
             t5.seconds());
}

// ---- AC6 ----------------------------------------------------------------------

void ac6(Report& rep)
{
    Timer t;
    const std::vector<PredictionPair> hand{{{0, 1}, {0}}};
    Eigen::VectorXd mixed(3);
    mixed << 0.6, 0.4, 0.5;
    const bool ok = accuracy(hand) == 1.0 && recall(hand) == 0.5 && threshold(mixed) == BeamSet{0} &&
                    threshold(Eigen::VectorXd::Constant(6, 0.9)).size() == 6 &&
                    threshold(Eigen::VectorXd::Constant(6, 0.1)).empty() &&
                    threshold(Eigen::VectorXd::Constant(6, 0.5)).empty();
    rep.line("AC6 metrics", ok,
             "precision " + fmt(accuracy(hand)) + " (1.0), recall " + fmt(recall(hand)) +
                 " (0.5), threshold cases " + (ok ? "exact" : "mismatch"),
             t.seconds());
}

// ---- AC7 ----------------------------------------------------------------------

void ac7(Report& rep, const fs::path& work)
{
    Timer t;
    RunConfig cfg = load_run_config(fs::path(RISBEAM_SOURCE_DIR) / "configs" / "small.json");
    cfg.dataset.scenes = 150;
    cfg.train.epochs = 20;
    std::vector<fs::path> dirs{work / "repro_a", work / "repro_b"};
    for (const auto& d : dirs) {
        fs::remove_all(d);
        const GenSummary g = cmd_gen(cfg, d);
        for (const auto& data : g.datasets)
            for (Variant v : {Variant::set_sum, Variant::vanilla_fc}) {
                const TrainSummary ts = cmd_train(cfg, data, v, d);
                cmd_eval(cfg, data, ts.model, d);
                cmd_sweep(cfg, data, ts.model, {1, 2, 4, 8, 16}, d);
            }
    }
    std::size_t files = 0, same = 0;
    std::string first_diff;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        ++files;
        const fs::path other = dirs[1] / entry.path().filename();
        if (fs::exists(other) && slurp(entry.path()) == slurp(other))
            ++same;
        else if (first_diff.empty())
            first_diff = entry.path().filename().string();
    }
    const std::size_t other_files = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{});
    rep.line("AC7 reproducibility", files > 0 && same == files && other_files == files,
             std::to_string(same) + "/" + std::to_string(files) + " output files byte-identical" +
                 (first_diff.empty() ? "" : " (first difference: " + first_diff + ")"),
             t.seconds());
}

} // namespace

int main(int argc, char** argv)
{
    fs::path work = fs::temp_directory_path() / "risbeam_acceptance";
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--work")
            work = argv[i + 1];
    fs::create_directories(work);

    Report rep;
    try {
        const RunConfig bench = load_run_config(fs::path(RISBEAM_SOURCE_DIR) / "configs" / "benchmark.json");
        ac1(rep);
        ac2(rep, bench);
        ac3(rep);
        ac6(rep);
        ac7(rep, work);
        ac4_ac5(rep, bench, work);
    } catch (const std::exception& e) {
        std::cout << "[FAIL] acceptance run aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << (rep.failures == 0 ? "all criteria passed" : std::to_string(rep.failures) + " criteria failed")
              << std::endl;
    return rep.failures == 0 ? 0 : 1;
}
