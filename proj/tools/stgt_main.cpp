// Command-line front end: train/eval/ablate/gradcheck/synth/report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stgt/config.hpp"
#include "stgt/gradcheck.hpp"
#include "stgt/graph.hpp"
#include "stgt/model.hpp"
#include "stgt/splits.hpp"
#include "stgt/synth.hpp"
#include "stgt/train.hpp"

namespace fs = std::filesystem;

namespace {

stgt::DatasetSplit resolve_splits(const stgt::ExampleStore& data, const std::string& splits_dir,
                                  std::uint64_t seed) {
    if (!splits_dir.empty()) return stgt::load_split_files(splits_dir, data.size());
    return stgt::split_dataset(data.size(), {0.8, 0.1, 0.1}, seed);
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& splits_dir, const std::string& out_dir,
              const std::string& variant_override) {
    stgt::TrainConfig config = stgt::TrainConfig::from_file(config_path);
    if (!variant_override.empty()) {
        config.variant = stgt::variant_from_string(variant_override);
        config.validate();
    }
    stgt::ExampleStore data = stgt::load_jsonl(data_path);
    stgt::DatasetSplit splits = resolve_splits(data, splits_dir, config.seed);
    stgt::RunRecord record = stgt::run_training(config, data, splits, out_dir);
    std::cout << "selected_epoch " << record.selected_epoch << " "
              << record.metric_name << " " << record.final_test_metric << "\n";
    std::cout << "outputs written to " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_dir, const std::string& data_path,
             const std::string& split_name, const std::string& splits_dir) {
    nlohmann::json manifest = stgt::ParameterStore::load_manifest(checkpoint_dir);
    stgt::TrainConfig config = stgt::TrainConfig::from_json(manifest.at("config"));
    stgt::ParameterStore store;
    stgt::Model model(config, store);  // build shapes, then overwrite values
    store.load(checkpoint_dir);

    stgt::ExampleStore data = stgt::load_jsonl(data_path);
    stgt::DatasetSplit splits = resolve_splits(data, splits_dir, config.seed);
    const std::vector<std::size_t>* split = nullptr;
    if (split_name == "train") split = &splits.train;
    else if (split_name == "valid") split = &splits.valid;
    else if (split_name == "test") split = &splits.test;
    else throw stgt::ConfigError("unknown split: " + split_name);

    double value = stgt::evaluate_metric(model, data, *split);
    nlohmann::json line = {{"metric", config.task == stgt::Task::Regression ? "mae" : "auc"},
                           {"value", value},
                           {"split", split_name},
                           {"seed", config.seed}};
    std::cout << line.dump() << "\n";
    return 0;
}

int cmd_gradcheck(const std::string& module) {
    auto results = stgt::run_gradcheck(module);
    bool ok = true;
    for (const auto& r : results) {
        bool pass = r.max_rel_err < 1e-4;
        ok = ok && pass;
        std::cout << "gradcheck " << r.name << ": max relative error " << r.max_rel_err
                  << (pass ? " PASS" : " FAIL") << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_synth(const std::string& task, std::size_t count, std::uint64_t seed,
              std::size_t min_nodes, std::size_t max_nodes, const std::string& out_path) {
    stgt::ExampleStore store = stgt::generate_synthetic(stgt::synth_task_from_string(task),
                                                        count, min_nodes, max_nodes, seed);
    stgt::save_jsonl(store, out_path);
    std::cout << "wrote " << store.size() << " examples to " << out_path << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs) {
    std::vector<stgt::RunRecord> records;
    for (const auto& dir : run_dirs) {
        std::ifstream in(fs::path(dir) / "run.json");
        if (!in) throw stgt::ParseError("cannot open " + dir + "/run.json");
        nlohmann::json j;
        in >> j;
        records.push_back(stgt::RunRecord::from_json(j));
    }
    stgt::Aggregate agg = stgt::report(records);
    std::cout << records[0].metric_name << " " << stgt::format_aggregate(agg) << " over "
              << agg.n << " seed(s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serialized-token graph transformer: training and evaluation"};
    app.require_subcommand(1);

    std::string config_path, data_path, splits_dir, out_dir, variant;
    auto* train = app.add_subcommand("train", "Train a model");
    train->add_option("--config", config_path, "JSON config file")->required();
    train->add_option("--data", data_path, "JSON-Lines dataset")->required();
    train->add_option("--splits", splits_dir, "Directory with train.idx/valid.idx/test.idx");
    train->add_option("--out", out_dir, "Output directory")->required();

    auto* ablate = app.add_subcommand("ablate", "Train an ablation variant");
    ablate->add_option("--config", config_path)->required();
    ablate->add_option("--data", data_path)->required();
    ablate->add_option("--splits", splits_dir);
    ablate->add_option("--out", out_dir)->required();
    ablate->add_option("--variant", variant, "full|no-serialization|no-attention|sum-pool")
        ->required();

    std::string checkpoint_dir, split_name = "test";
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("--checkpoint", checkpoint_dir)->required();
    eval->add_option("--data", data_path)->required();
    eval->add_option("--split", split_name, "train|valid|test");
    eval->add_option("--splits", splits_dir);

    std::string module = "all";
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    gradcheck->add_option("--module", module, "all|mp|serializer|attn|head");

    std::string task = "triangle-count", synth_out;
    std::size_t count = 100, min_nodes = 5, max_nodes = 12;
    std::uint64_t seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth->add_option("--task", task, "triangle-count|degree-parity");
    synth->add_option("--count", count)->required();
    synth->add_option("--seed", seed);
    synth->add_option("--min-nodes", min_nodes);
    synth->add_option("--max-nodes", max_nodes);
    synth->add_option("--out", synth_out)->required();

    std::vector<std::string> run_dirs;
    auto* report = app.add_subcommand("report", "Aggregate run records across seeds");
    report->add_option("--runs", run_dirs, "Run output directories")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(config_path, data_path, splits_dir, out_dir, "");
        if (*ablate) return cmd_train(config_path, data_path, splits_dir, out_dir, variant);
        if (*eval) return cmd_eval(checkpoint_dir, data_path, split_name, splits_dir);
        if (*gradcheck) return cmd_gradcheck(module);
        if (*synth) return cmd_synth(task, count, seed, min_nodes, max_nodes, synth_out);
        if (*report) return cmd_report(run_dirs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
