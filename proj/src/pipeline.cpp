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

#include "risbeam/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "risbeam/json_io.hpp"
#include "risbeam/random.hpp"

namespace risbeam {

namespace fs = std::filesystem;

// ---- configuration ------------------------------------------------------------

void RunConfig::set_seed(std::uint64_t seed)
{
    scenario.master_seed = seed;
    train.seed = seed;
}

NetworkShape RunConfig::network_shape() const
{
    NetworkShape s;
    s.classes = scenario.class_count();
    s.u_max = dataset.u_max;
    s.beams = codebook.n_az * codebook.n_el;
    s.hidden = hidden;
    return s;
}

void RunConfig::validate() const
{
    scenario.validate();
    link.validate();
    detector.validate();
    train.validate();
    if (scenario.cameras.empty())
        throw std::invalid_argument("config: at least one camera is required");
    if (codebook.n_az < 1 || codebook.n_el < 1)
        throw std::invalid_argument("config: codebook grid must be at least 1x1");
    if (dataset.scenes < 1)
        throw std::invalid_argument("config: dataset.scenes must be >= 1");
    if (dataset.u_max < 1)
        throw std::invalid_argument("config: dataset.u_max must be >= 1");
    if (scenario.ue_count.max > dataset.u_max)
        throw std::invalid_argument("config: ue_count max exceeds U_max");
    if (!(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0))
        throw std::invalid_argument("config: train_fraction must lie in (0, 1)");
    for (int h : hidden)
        if (h < 1)
            throw std::invalid_argument("config: hidden widths must be >= 1");
}

RunConfig default_run_config()
{
    RunConfig cfg;
    ScenarioConfig& s = cfg.scenario;

    // RIS on the roadside at 6 m, facing across the street (+y).
    s.ris = {Vec3(0.0, 0.0, 6.0), 0.5 * kPi, 0.0};
    // BS up a side street, visible to the RIS through the gap between buildings.
    s.bs_position = Vec3(0.0, 60.0, 12.0);
    s.street_axis = Vec3::UnitX();
    s.ue_count = {1, 5};
    s.ue_speed = {5.0, 15.0};
    s.ue_region = Aabb::from_bounds(Vec3(-25.0, 5.0, 0.7), Vec3(25.0, 19.0, 1.6));
    s.classes = {{"car", Vec3(4.5, 1.8, 1.5), 0.7}, {"truck", Vec3(8.0, 2.5, 3.2), 0.3}};
    s.blockers = {Aabb::from_bounds(Vec3(-80.0, 24.0, 0.0), Vec3(-3.0, 44.0, 25.0)),
                  Aabb::from_bounds(Vec3(3.0, 24.0, 0.0), Vec3(80.0, 44.0, 25.0))};

    CameraModel center;
    center.position = s.ris.position;
    center.yaw = 0.5 * kPi;
    center.pitch = -0.45;
    center.horizontal_fov = 110.0 * kPi / 180.0;
    center.width = 1280;
    center.height = 720;

    CameraModel side = center;
    side.yaw = 0.5 * kPi + 0.9;
    side.horizontal_fov = 75.0 * kPi / 180.0;
    s.cameras = {center, side};

    s.scatter.max_paths = 4;
    s.scatter.region = Aabb::from_bounds(Vec3(-40.0, -3.0, 0.0), Vec3(40.0, 45.0, 15.0));
    s.scatter.gain_db_min = -15.0;
    s.scatter.gain_db_max = -6.0;
    s.master_seed = 1;

    cfg.link.ris = {32, 8, 0.5};
    cfg.link.bs = {1, 1, 0.5};
    cfg.codebook = {32, 8};
    cfg.train.seed = s.master_seed;
    return cfg;
}

namespace {

nlohmann::json upa_to_json(const UpaGeometry& g)
{
    return {{"cols", g.cols}, {"rows", g.rows}, {"spacing", g.spacing}};
}

void upa_from_json(const nlohmann::json& j, UpaGeometry& g)
{
    read_opt(j, "cols", g.cols);
    read_opt(j, "rows", g.rows);
    read_opt(j, "spacing", g.spacing);
}

} // namespace

RunConfig parse_run_config(const nlohmann::json& j)
{
    RunConfig cfg = default_run_config();
    if (!j.is_object())
        throw std::invalid_argument("config: top level must be a JSON object");

    if (j.contains("scenario"))
        from_json(j.at("scenario"), cfg.scenario);
    if (j.contains("ris_array"))
        upa_from_json(j.at("ris_array"), cfg.link.ris);
    if (j.contains("bs_array"))
        upa_from_json(j.at("bs_array"), cfg.link.bs);
    if (j.contains("radio")) {
        const auto& r = j.at("radio");
        RadioConfig& radio = cfg.link.radio;
        read_opt(r, "carrier_hz", radio.carrier_hz);
        read_opt(r, "subcarriers", radio.subcarriers);
        read_opt(r, "sample_period", radio.sample_period);
        read_opt(r, "delay_taps", radio.delay_taps);
        read_opt(r, "tx_power", radio.tx_power);
        read_opt(r, "noise_var", radio.noise_var);
        read_opt(r, "pathloss", radio.pathloss);
        read_opt(r, "rolloff", radio.rolloff);
        if (r.contains("pulse")) {
            const auto tag = r.at("pulse").get<std::string>();
            if (tag == "sinc")
                radio.pulse = PulseShape::sinc;
            else if (tag == "raised_cosine")
                radio.pulse = PulseShape::raised_cosine;
            else
                throw std::invalid_argument("config: unknown pulse '" + tag + "' (sinc, raised_cosine)");
        }
    }
    if (j.contains("codebook")) {
        read_opt(j.at("codebook"), "n_az", cfg.codebook.n_az);
        read_opt(j.at("codebook"), "n_el", cfg.codebook.n_el);
    }
    if (j.contains("detector")) {
        const auto& d = j.at("detector");
        read_opt(d, "bbox_jitter_std", cfg.detector.bbox_jitter_std);
        read_opt(d, "miss_prob", cfg.detector.miss_prob);
        read_opt(d, "false_positive_rate", cfg.detector.false_positive_rate);
        read_opt(d, "class_confusion_prob", cfg.detector.class_confusion_prob);
    }
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        read_opt(d, "scenes", cfg.dataset.scenes);
        read_opt(d, "u_max", cfg.dataset.u_max);
        read_opt(d, "train_fraction", cfg.dataset.train_fraction);
    }
    if (j.contains("network"))
        read_opt(j.at("network"), "hidden", cfg.hidden);
    if (j.contains("train")) {
        const auto& t = j.at("train");
        read_opt(t, "learning_rate", cfg.train.learning_rate);
        read_opt(t, "batch_size", cfg.train.batch_size);
        read_opt(t, "epochs", cfg.train.epochs);
        read_opt(t, "momentum", cfg.train.momentum);
        if (t.contains("optimizer"))
            cfg.train.optimizer = parse_optimizer(t.at("optimizer").get<std::string>());
    }
    cfg.set_seed(cfg.scenario.master_seed);
    return cfg;
}

RunConfig load_run_config(const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& cfg)
{
    const RadioConfig& r = cfg.link.radio;
    return {{"scenario", nlohmann::json(cfg.scenario)},
            {"ris_array", upa_to_json(cfg.link.ris)},
            {"bs_array", upa_to_json(cfg.link.bs)},
            {"radio",
             {{"carrier_hz", r.carrier_hz},
              {"subcarriers", r.subcarriers},
              {"sample_period", r.sample_period},
              {"delay_taps", r.delay_taps},
              {"tx_power", r.tx_power},
              {"noise_var", r.noise_var},
              {"pathloss", r.pathloss},
              {"pulse", r.pulse == PulseShape::sinc ? "sinc" : "raised_cosine"},
              {"rolloff", r.rolloff}}},
            {"codebook", {{"n_az", cfg.codebook.n_az}, {"n_el", cfg.codebook.n_el}}},
            {"detector",
             {{"bbox_jitter_std", cfg.detector.bbox_jitter_std},
              {"miss_prob", cfg.detector.miss_prob},
              {"false_positive_rate", cfg.detector.false_positive_rate},
              {"class_confusion_prob", cfg.detector.class_confusion_prob}}},
            {"dataset",
             {{"scenes", cfg.dataset.scenes},
              {"u_max", cfg.dataset.u_max},
              {"train_fraction", cfg.dataset.train_fraction}}},
            {"network", {{"hidden", cfg.hidden}}},
            {"train",
             {{"learning_rate", cfg.train.learning_rate},
              {"batch_size", cfg.train.batch_size},
              {"epochs", cfg.train.epochs},
              {"momentum", cfg.train.momentum},
              {"optimizer", optimizer_name(cfg.train.optimizer)}}}};
}

std::uint64_t config_hash(const RunConfig& cfg)
{
    const std::string text = run_config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Codebook make_codebook(const RunConfig& cfg)
{
    return build_codebook(cfg.link.ris, cfg.codebook.n_az, cfg.codebook.n_el);
}

std::vector<UeOracle> sample_oracles(const RunConfig& cfg, const Codebook& cb, const Sample& sample)
{
    if (sample.camera_id < 0 || static_cast<std::size_t>(sample.camera_id) >= cfg.scenario.cameras.size())
        throw std::invalid_argument("sample refers to a camera the config does not define");
    const Scene scene = generate_scene(cfg.scenario, sample.scene_id);
    auto oracles = candidate_oracles(scene, scene.cameras[sample.camera_id], cb, cfg.link);
    if (encode_label(beam_set_of(oracles), cb.size()) != sample.t_star)
        throw std::runtime_error("scene " + std::to_string(sample.scene_id) +
                                 " does not reproduce its stored label; config and dataset disagree");
    return oracles;
}

fs::path dataset_filename(int camera_id)
{
    return "dataset_cam" + std::to_string(camera_id) + ".txt";
}

// ---- gen ----------------------------------------------------------------------

namespace {

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return os;
}

/// Runs fn(i) for i in [0, n) on a small worker pool; results are written by
/// index so the output does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace

GenSummary cmd_gen(const RunConfig& cfg, const fs::path& out_dir)
{
    cfg.validate();
    ensure_dir(out_dir);

    const Codebook cb = make_codebook(cfg);
    const int classes = cfg.scenario.class_count();
    const std::size_t n_cams = cfg.scenario.cameras.size();
    const auto n_scenes = static_cast<std::size_t>(cfg.dataset.scenes);

    std::vector<Scene> scenes(n_scenes);
    std::vector<std::vector<std::optional<Sample>>> samples(n_scenes, std::vector<std::optional<Sample>>(n_cams));

    parallel_for(n_scenes, [&](std::size_t i) {
        scenes[i] = generate_scene(cfg.scenario, i);
        const Scene& scene = scenes[i];
        for (std::size_t c = 0; c < n_cams; ++c) {
            const CameraModel& cam = scene.cameras[c];
            const BeamSet best = scene_beam_set(scene, cam, cb, cfg.link);
            // Only images with at least one RIS-served candidate UE are kept.
            if (best.empty())
                continue;
            Rng rng = make_rng(cfg.seed(), Stream::detector, i, c);
            const auto dets = detect(scene, cam, classes, cfg.detector, rng);
            Sample s;
            s.input = encode_input(dets, classes, cfg.dataset.u_max, cam);
            s.t_star = encode_label(best, cb.size());
            s.scene_id = i;
            s.camera_id = static_cast<int>(c);
            samples[i][c] = std::move(s);
        }
    });

    GenSummary summary;
    auto manifest_sets = nlohmann::json::array();
    for (std::size_t c = 0; c < n_cams; ++c) {
        Dataset ds;
        ds.meta.classes = classes;
        ds.meta.u_max = cfg.dataset.u_max;
        ds.meta.beams = static_cast<int>(cb.size());
        ds.meta.image_width = cfg.scenario.cameras[c].width;
        ds.meta.image_height = cfg.scenario.cameras[c].height;
        ds.meta.camera_id = static_cast<int>(c);
        ds.meta.split_seed = cfg.seed();
        ds.meta.train_fraction = cfg.dataset.train_fraction;
        for (std::size_t i = 0; i < n_scenes; ++i)
            if (samples[i][c])
                ds.samples.push_back(std::move(*samples[i][c]));

        const fs::path path = out_dir / dataset_filename(static_cast<int>(c));
        save_dataset(path, ds);
        summary.datasets.push_back(path);
        summary.sample_counts.push_back(ds.samples.size());
        manifest_sets.push_back({{"camera", c}, {"file", path.filename().string()}, {"samples", ds.samples.size()}});
    }

    {
        auto os = open_out(out_dir / "scenes.jsonl");
        write_scenes(os, scenes);
    }
    {
        auto os = open_out(out_dir / "codebook.bin");
        write_codebook(os, cb);
    }

    std::vector<std::uint64_t> ids(n_scenes);
    for (std::size_t i = 0; i < n_scenes; ++i)
        ids[i] = scenes[i].index;
    const nlohmann::json manifest = {{"seed", cfg.seed()},
                                     {"config_hash", hex64(config_hash(cfg))},
                                     {"scene_count", n_scenes},
                                     {"scene_ids", ids},
                                     {"datasets", manifest_sets},
                                     {"config", run_config_to_json(cfg)}};
    summary.manifest = out_dir / "manifest.json";
    auto os = open_out(summary.manifest);
    os << manifest.dump(2) << '\n';
    return summary;
}

// ---- train / eval / sweep -----------------------------------------------------

namespace {

std::string artifact_suffix(Variant v, int camera_id)
{
    return std::string(variant_name(v)) + "_cam" + std::to_string(camera_id);
}

Dataset load_checked(const fs::path& dataset_path)
{
    if (!fs::exists(dataset_path))
        throw std::runtime_error("dataset '" + dataset_path.string() + "' does not exist");
    return load_dataset(dataset_path);
}

void check_against_config(const RunConfig& cfg, const DatasetMeta& meta)
{
    const NetworkShape s = cfg.network_shape();
    if (meta.classes != s.classes || meta.u_max != s.u_max || meta.beams != s.beams)
        throw std::runtime_error("dataset shape (C=" + std::to_string(meta.classes) + ", U_max=" +
                                 std::to_string(meta.u_max) + ", |Q|=" + std::to_string(meta.beams) +
                                 ") does not match the config");
}

} // namespace

std::vector<Sample> test_split(const Dataset& ds)
{
    const auto idx = split_indices(ds.samples.size(), ds.meta.train_fraction, ds.meta.split_seed);
    std::vector<Sample> out;
    for (std::size_t i : idx.test)
        out.push_back(ds.samples[i]);
    return out;
}

std::vector<Sample> train_split(const Dataset& ds)
{
    const auto idx = split_indices(ds.samples.size(), ds.meta.train_fraction, ds.meta.split_seed);
    std::vector<Sample> out;
    for (std::size_t i : idx.train)
        out.push_back(ds.samples[i]);
    return out;
}

void check_compatible(const SetNetwork& net, const DatasetMeta& meta)
{
    const NetworkShape& s = net.shape();
    if (s.classes != meta.classes || s.u_max != meta.u_max || s.beams != meta.beams)
        throw std::runtime_error("model (C=" + std::to_string(s.classes) + ", U_max=" + std::to_string(s.u_max) +
                                 ", |Q|=" + std::to_string(s.beams) + ") does not match dataset (C=" +
                                 std::to_string(meta.classes) + ", U_max=" + std::to_string(meta.u_max) +
                                 ", |Q|=" + std::to_string(meta.beams) + ")");
}

TrainSummary cmd_train(const RunConfig& cfg, const fs::path& dataset_path, Variant variant, const fs::path& out_dir,
                       const EpochCallback& on_epoch)
{
    cfg.validate();
    const Dataset ds = load_checked(dataset_path);
    check_against_config(cfg, ds.meta);
    ensure_dir(out_dir);

    const auto train_set = train_split(ds);
    const auto test_set = test_split(ds);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed();
    TrainResult result = train(variant, cfg.network_shape(), train_set, test_set, tc, on_epoch);

    TrainSummary summary;
    const std::string suffix = artifact_suffix(variant, ds.meta.camera_id);
    summary.model = out_dir / ("model_" + suffix + ".bin");
    summary.curve = out_dir / ("curve_" + suffix + ".csv");
    save_model(summary.model, result.net);
    auto os = open_out(summary.curve);
    write_learning_curve_csv(os, result.curves);
    summary.curves = std::move(result.curves);
    return summary;
}

EvalReport evaluate(const Scorer& scorer, std::span<const Sample> test_set,
                    std::span<const std::vector<UeOracle>> oracles, double delta)
{
    if (test_set.size() != oracles.size())
        throw std::invalid_argument("evaluate: samples and oracles differ in length");
    EvalReport report;
    report.n_test = test_set.size();
    std::vector<PredictionPair> pairs;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const Sample& s = test_set[i];
        SampleRecord rec;
        rec.scene_id = s.scene_id;
        rec.truth = decode_label(s.t_star);
        rec.predicted = threshold(scorer(s), delta);
        for (const auto& ue : oracles[i]) {
            rec.exhaustive_rates.push_back(ue.rates[ue.best]);
            double achieved = 0.0;
            for (std::size_t q : rec.predicted)
                achieved = std::max(achieved, ue.rates.at(q));
            rec.achieved_rates.push_back(achieved);
        }
        pairs.push_back({rec.truth, rec.predicted});
        report.records.push_back(std::move(rec));
    }
    report.accuracy = accuracy(pairs);
    report.recall = recall(pairs);
    return report;
}

EvalSummary cmd_eval(const RunConfig& cfg, const fs::path& dataset_path, const fs::path& model_path,
                     const fs::path& out_dir)
{
    cfg.validate();
    const Dataset ds = load_checked(dataset_path);
    check_against_config(cfg, ds.meta);
    const SetNetwork net = load_model(model_path);
    check_compatible(net, ds.meta);
    ensure_dir(out_dir);

    const Codebook cb = make_codebook(cfg);
    const auto test_set = test_split(ds);
    std::vector<std::vector<UeOracle>> oracles(test_set.size());
    parallel_for(test_set.size(), [&](std::size_t i) { oracles[i] = sample_oracles(cfg, cb, test_set[i]); });

    EvalSummary summary;
    summary.report = evaluate([&](const Sample& s) { return net.forward(s.input); }, test_set, oracles);
    const std::string suffix = artifact_suffix(net.variant(), ds.meta.camera_id);
    summary.table = out_dir / ("eval_" + suffix + ".csv");
    {
        auto os = open_out(summary.table);
        write_eval_csv(os, summary.report);
    }
    auto os = open_out(out_dir / ("eval_records_" + suffix + ".csv"));
    write_eval_records_csv(os, summary.report);
    return summary;
}

SweepSummary cmd_sweep(const RunConfig& cfg, const fs::path& dataset_path, const fs::path& model_path,
                       std::vector<std::size_t> k_values, const fs::path& out_dir)
{
    cfg.validate();
    const Dataset ds = load_checked(dataset_path);
    check_against_config(cfg, ds.meta);
    const SetNetwork net = load_model(model_path);
    check_compatible(net, ds.meta);
    if (k_values.empty())
        throw std::invalid_argument("sweep: no k values given");
    for (std::size_t k : k_values)
        if (k < 1 || k > static_cast<std::size_t>(ds.meta.beams))
            throw std::invalid_argument("sweep: k=" + std::to_string(k) + " outside [1, " +
                                        std::to_string(ds.meta.beams) + "]");
    ensure_dir(out_dir);

    const Codebook cb = make_codebook(cfg);
    const auto test_set = test_split(ds);
    std::vector<std::vector<UeOracle>> oracles(test_set.size());
    parallel_for(test_set.size(), [&](std::size_t i) { oracles[i] = sample_oracles(cfg, cb, test_set[i]); });
    std::vector<Eigen::VectorXd> scores;
    scores.reserve(test_set.size());
    for (const auto& s : test_set)
        scores.push_back(net.forward(s.input));

    SweepSummary summary;
    summary.curve = rate_ratio_curve(scores, oracles, std::move(k_values));
    summary.table = out_dir / ("sweep_" + artifact_suffix(net.variant(), ds.meta.camera_id) + ".csv");
    auto os = open_out(summary.table);
    write_ratio_csv(os, summary.curve);
    return summary;
}

} // namespace risbeam
