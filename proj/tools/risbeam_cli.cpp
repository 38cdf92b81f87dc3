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

#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "risbeam/pipeline.hpp"

namespace {

std::vector<std::size_t> parse_k_list(const std::string& text)
{
    std::vector<std::size_t> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || v < 1)
            throw std::invalid_argument("--k: '" + item + "' is not a positive integer");
        ks.push_back(static_cast<std::size_t>(v));
    }
    if (ks.empty())
        throw std::invalid_argument("--k: empty list");
    return ks;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Vision-aided RIS beam selection: data generation, training and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string dataset_path, model_path, variant_tag = "set_sum", k_text = "1,2,4,8,16,32,64";
    bool quiet = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override scenario.master_seed");
        sub->add_option("--out", out_dir, "output directory");
    };

    auto* gen = app.add_subcommand("gen", "generate scenes, labels and per-camera datasets");
    add_common(gen);

    auto* tr = app.add_subcommand("train", "train a set network on one dataset");
    add_common(tr);
    tr->add_option("--dataset", dataset_path)->required();
    tr->add_option("--variant", variant_tag, "set_sum | reuse_concat | vanilla_fc");
    tr->add_flag("--quiet", quiet, "no per-epoch progress");

    auto* ev = app.add_subcommand("eval", "accuracy and recall on the test split");
    add_common(ev);
    ev->add_option("--dataset", dataset_path)->required();
    ev->add_option("--model", model_path)->required();

    auto* sw = app.add_subcommand("sweep", "rate ratio of the top-k trained beams");
    add_common(sw);
    sw->add_option("--dataset", dataset_path)->required();
    sw->add_option("--model", model_path)->required();
    sw->add_option("--k", k_text, "comma-separated k values");

    CLI11_PARSE(app, argc, argv);

    try {
        risbeam::RunConfig cfg = risbeam::load_run_config(config_path);
        if (seed)
            cfg.set_seed(*seed);

        if (gen->parsed()) {
            const auto s = risbeam::cmd_gen(cfg, out_dir);
            for (std::size_t c = 0; c < s.datasets.size(); ++c)
                std::cout << s.datasets[c].string() << ": " << s.sample_counts[c] << " samples\n";
        } else if (tr->parsed()) {
            const auto variant = risbeam::parse_variant(variant_tag);
            risbeam::EpochCallback cb;
            if (!quiet)
                cb = [](int epoch, double train_loss, double test_loss) {
                    std::cerr << "epoch " << epoch + 1 << " train " << train_loss << " test " << test_loss << '\n';
                };
            const auto s = risbeam::cmd_train(cfg, dataset_path, variant, out_dir, cb);
            std::cout << s.model.string() << '\n' << s.curve.string() << '\n';
        } else if (ev->parsed()) {
            const auto s = risbeam::cmd_eval(cfg, dataset_path, model_path, out_dir);
            std::cout << "n_test=" << s.report.n_test << " accuracy=" << s.report.accuracy
                      << " recall=" << s.report.recall << '\n';
        } else if (sw->parsed()) {
            const auto s = risbeam::cmd_sweep(cfg, dataset_path, model_path, parse_k_list(k_text), out_dir);
            for (const auto& p : s.curve)
                std::cout << "k=" << p.k << " ratio=" << p.ratio << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
