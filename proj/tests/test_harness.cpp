#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "stgt/model.hpp"
#include "stgt/synth.hpp"
#include "stgt/train.hpp"

using namespace stgt;
namespace fs = std::filesystem;

namespace {

TrainConfig small_config(Variant variant = Variant::Full) {
    TrainConfig cfg;
    cfg.d = 8;
    cfg.mp_layers = 1;
    cfg.m = 4;
    cfg.attn_layers = 1;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.lr = 3e-3;
    cfg.node_vocab = 32;
    cfg.edge_vocab = 8;
    cfg.variant = variant;
    return cfg;
}

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("stgt_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("build_model: head width is M*d for the full model") {
    TrainConfig cfg = small_config();
    cfg.m = 8;
    cfg.d = 16;
    ParameterStore store;
    Model model(cfg, store);
    CHECK(model.head().in_width == 128);
}

TEST_CASE("build_model: unknown variant string rejected") {
    CHECK_THROWS_AS(variant_from_string("bogus"), ConfigError);
}

TEST_CASE("sum-pool output is bit-for-bit permutation invariant") {
    TrainConfig cfg = small_config(Variant::SumPool);
    ParameterStore store;
    Model model(cfg, store);
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 5, 4, 10, 61);
    Rng rng(67);
    for (const auto& ex : data) {
        double base = model.predict_value(ex.graph);
        for (int p = 0; p < 5; ++p) {
            std::vector<std::size_t> perm(ex.graph.num_nodes());
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            CHECK(model.predict_value(ex.graph.permuted(perm)) == base);
        }
    }
}

TEST_CASE("no-serialization variant handles variable graph sizes") {
    TrainConfig cfg = small_config(Variant::NoSerialization);
    ParameterStore store;
    Model model(cfg, store);
    for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{12}}) {
        Graph g;
        for (std::size_t i = 0; i < n; ++i) g.node_labels.push_back({1});
        for (std::size_t i = 0; i + 1 < n; ++i) {
            g.edges.push_back({i, i + 1, {0}});
            g.edges.push_back({i + 1, i, {0}});
        }
        CHECK_NOTHROW(model.predict_value(g));
    }
}

TEST_CASE("training halves the train MAE on 200 triangle-count examples") {
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 200, 5, 10, 3);
    DatasetSplit splits = split_dataset(data.size(), {0.8, 0.1, 0.1}, 3);
    TrainConfig cfg = small_config();
    cfg.epochs = 50;
    TrainResult result = train(cfg, data, splits);
    double initial = result.record.epochs.front().train_loss;
    double final_loss = result.record.epochs.back().train_loss;
    CHECK(final_loss < 0.5 * initial);
}

TEST_CASE("identical config and seed reproduce the run record byte-for-byte") {
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 60, 4, 8, 5);
    DatasetSplit splits = split_dataset(data.size(), {0.8, 0.1, 0.1}, 5);
    TrainConfig cfg = small_config();
    cfg.epochs = 3;
    std::ostringstream log1, log2;
    RunRecord r1 = train(cfg, data, splits, &log1).record;
    RunRecord r2 = train(cfg, data, splits, &log2).record;
    CHECK(log1.str() == log2.str());
    CHECK(r1.to_json().dump() == r2.to_json().dump());
}

TEST_CASE("lr = 0 leaves every parameter untouched") {
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 30, 4, 8, 7);
    DatasetSplit splits = split_dataset(data.size(), {0.8, 0.1, 0.1}, 7);
    TrainConfig cfg = small_config();
    cfg.lr = 0.0;
    cfg.epochs = 2;
    TrainResult result = train(cfg, data, splits);
    ParameterStore fresh;
    Model reference(cfg, fresh);
    CHECK(result.best_params.flatten() == fresh.flatten());
}

TEST_CASE("selected_epoch is the argbest validation epoch, earliest on ties") {
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 80, 4, 9, 9);
    DatasetSplit splits = split_dataset(data.size(), {0.8, 0.1, 0.1}, 9);
    TrainConfig cfg = small_config();
    cfg.epochs = 8;
    RunRecord r = train(cfg, data, splits).record;
    double best = r.epochs[r.selected_epoch].val_metric;
    for (const auto& e : r.epochs) {
        CHECK(best <= e.val_metric);
        if (e.val_metric == best) {
            CHECK(r.selected_epoch <= e.epoch);
            break;
        }
    }
}

TEST_CASE("checkpoint round-trip: save, load, bit-identical evaluation") {
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 50, 4, 8, 11);
    DatasetSplit splits = split_dataset(data.size(), {0.8, 0.1, 0.1}, 11);
    TrainConfig cfg = small_config();
    cfg.epochs = 3;
    fs::path dir = temp_dir("ckpt");
    RunRecord record = run_training(cfg, data, splits, dir);

    ParameterStore loaded;
    Model model(cfg, loaded);
    loaded.load(dir / "checkpoint");

    // evaluating the selected-epoch checkpoint reproduces the logged metric exactly
    double val = evaluate_metric(model, data, splits.valid);
    CHECK(val == record.epochs[record.selected_epoch].val_metric);
    // eval is deterministic
    CHECK(evaluate_metric(model, data, splits.test) == evaluate_metric(model, data, splits.test));
    fs::remove_all(dir);
}

TEST_CASE("checkpoint load rejects mismatched shapes listing the parameters") {
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 30, 4, 8, 13);
    DatasetSplit splits = split_dataset(data.size(), {0.8, 0.1, 0.1}, 13);
    TrainConfig cfg = small_config();
    cfg.epochs = 1;
    fs::path dir = temp_dir("ckpt_mismatch");
    run_training(cfg, data, splits, dir);

    TrainConfig other = cfg;
    other.d = 12;  // different shapes everywhere
    ParameterStore store;
    Model model(other, store);
    CHECK_THROWS_WITH_AS(store.load(dir / "checkpoint"),
                         doctest::Contains("mismatched parameters"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("evaluate: empty split is an error") {
    TrainConfig cfg = small_config();
    ParameterStore store;
    Model model(cfg, store);
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 5, 4, 6, 15);
    CHECK_THROWS_AS(evaluate_metric(model, data, {}), ConfigError);
}

TEST_CASE("report: single record has zero std") {
    RunRecord r;
    r.config = small_config();
    r.final_test_metric = 0.42;
    r.metric_name = "mae";
    Aggregate a = report({r});
    CHECK(a.mean == 0.42);
    CHECK(a.std_dev == 0.0);
}

TEST_CASE("report: two-point statistics") {
    Aggregate a = aggregate_metrics({0.05, 0.06});
    CHECK(a.mean == doctest::Approx(0.055).epsilon(1e-12));
    CHECK(a.std_dev == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("report: four-record aggregation matches an independent recomputation") {
    std::vector<double> vals = {0.31, 0.29, 0.35, 0.27};
    Aggregate a = aggregate_metrics(vals);
    double mean = (0.31 + 0.29 + 0.35 + 0.27) / 4.0;
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    CHECK(a.mean == doctest::Approx(mean).epsilon(1e-15));
    CHECK(a.std_dev == doctest::Approx(std::sqrt(ss / 4.0)).epsilon(1e-15));
}

TEST_CASE("report: mixed configs rejected") {
    RunRecord r1, r2;
    r1.config = small_config();
    r2.config = small_config();
    r2.config.d = 12;
    r1.metric_name = r2.metric_name = "mae";
    CHECK_THROWS_AS(report({r1, r2}), ConfigError);
}

TEST_CASE("training aborts with a diagnostic naming the offending example") {
    ExampleStore data = generate_synthetic(SynthTask::TriangleCount, 30, 4, 8, 17);
    DatasetSplit splits = split_dataset(data.size(), {0.8, 0.1, 0.1}, 17);
    data[splits.train[0]].target = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg = small_config();
    cfg.epochs = 2;
    CHECK_THROWS_WITH_AS(train(cfg, data, splits), doctest::Contains("diverged"), NumericError);
}
