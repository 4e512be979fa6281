#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "stgt/config.hpp"
#include "stgt/graph.hpp"
#include "stgt/model.hpp"
#include "stgt/params.hpp"
#include "stgt/predictor.hpp"
#include "stgt/splits.hpp"

namespace stgt {

// Adam over a ParameterStore; state keyed like the store, swept in
// name-sorted order.
class AdamOptimizer {
public:
    AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ParameterStore& store) {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (auto& [name, slot] : store.slots()) {
            State& st = state_[name];
            if (st.m.size() != slot.value.size()) {
                st.m.assign(slot.value.size(), 0.0);
                st.v.assign(slot.value.size(), 0.0);
            }
            for (std::size_t i = 0; i < slot.value.size(); ++i) {
                double g = slot.grad.data[i];
                st.m[i] = beta1_ * st.m[i] + (1.0 - beta1_) * g;
                st.v[i] = beta2_ * st.v[i] + (1.0 - beta2_) * g * g;
                double mhat = st.m[i] / bc1;
                double vhat = st.v[i] / bc2;
                slot.value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

private:
    struct State {
        std::vector<double> m, v;
    };
    double lr_, beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::map<std::string, State> state_;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_metric = 0.0;
    double test_metric = 0.0;
};

struct RunRecord {
    TrainConfig config;
    std::vector<EpochRecord> epochs;
    std::size_t selected_epoch = 0;
    double final_test_metric = 0.0;
    std::string metric_name;  // "mae" or "auc"

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config"] = config.to_json();
        j["seed"] = config.seed;
        j["metric"] = metric_name;
        nlohmann::json eps = nlohmann::json::array();
        for (const auto& e : epochs) {
            eps.push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"val_metric", e.val_metric},
                           {"test_metric", e.test_metric}});
        }
        j["epochs"] = eps;
        j["selected_epoch"] = selected_epoch;
        j["final_test_metric"] = final_test_metric;
        return j;
    }

    static RunRecord from_json(const nlohmann::json& j) {
        RunRecord r;
        r.config = TrainConfig::from_json(j.at("config"));
        r.metric_name = j.at("metric");
        for (const auto& e : j.at("epochs")) {
            r.epochs.push_back({e.at("epoch"), e.at("train_loss"), e.at("val_metric"),
                                e.at("test_metric")});
        }
        r.selected_epoch = j.at("selected_epoch");
        r.final_test_metric = j.at("final_test_metric");
        return r;
    }
};

// Evaluation: serializer noise forced off, deterministic.
inline double evaluate_metric(const Model& model, const ExampleStore& store,
                              const std::vector<std::size_t>& split) {
    if (split.empty()) throw ConfigError("evaluate: empty split");
    std::vector<double> preds, targets;
    preds.reserve(split.size());
    targets.reserve(split.size());
    for (std::size_t i : split) {
        preds.push_back(model.predict_value(store[i].graph));
        targets.push_back(store[i].target);
    }
    if (model.config().task == Task::Regression) return mae_metric(preds, targets);
    return metric_auc(preds, targets);
}

struct TrainResult {
    RunRecord record;
    ParameterStore best_params;  // values at the selected epoch
};

inline bool metric_improves(Task task, double candidate, double incumbent) {
    return task == Task::Regression ? candidate < incumbent : candidate > incumbent;
}

// Mini-batch Adam with per-graph gradient accumulation in deterministic
// example order; per-epoch validation; best-validation checkpoint retained.
// log_out, when given, receives one JSON line per epoch.
inline TrainResult train(const TrainConfig& config, const ExampleStore& data,
                         const DatasetSplit& splits, std::ostream* log_out = nullptr) {
    config.validate();
    if (splits.train.empty() || splits.valid.empty() || splits.test.empty())
        throw ConfigError("train: every split must be non-empty");

    ParameterStore store;
    Model model(config, store);
    AdamOptimizer opt(config.lr);

    TrainResult result;
    result.record.config = config;
    result.record.metric_name = config.task == Task::Regression ? "mae" : "auc";

    double best_val = config.task == Task::Regression
                          ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(splits.train);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(config.seed, 0x65706f6368ULL, epoch));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t end = std::min(order.size(), start + config.batch_size);
            double inv_batch = 1.0 / static_cast<double>(end - start);
            store.zero_grads();
            for (std::size_t k = start; k < end; ++k) {
                std::size_t ex_id = order[k];
                Rng noise_rng(mix_seed(config.seed, ex_id, epoch));
                Tape tape;
                try {
                    Var l = model.example_loss(tape, data[ex_id], config.noise, &noise_rng);
                    epoch_loss += tape.val(l).data[0];
                    ++seen;
                    Var scaled = tape.caffine(l, inv_batch, 0.0);
                    tape.backward(scaled);
                } catch (const NumericError& e) {
                    throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                       ", batch starting at example " + std::to_string(start) +
                                       " (example id " + std::to_string(ex_id) + "): " + e.what());
                }
            }
            opt.step(store);
        }

        EpochRecord er;
        er.epoch = epoch;
        er.train_loss = epoch_loss / static_cast<double>(seen);
        er.val_metric = evaluate_metric(model, data, splits.valid);
        er.test_metric = evaluate_metric(model, data, splits.test);
        result.record.epochs.push_back(er);

        // ties keep the earliest epoch
        if (metric_improves(config.task, er.val_metric, best_val)) {
            best_val = er.val_metric;
            result.record.selected_epoch = epoch;
            result.best_params = store;  // deep copy of the current values
        }

        if (log_out) {
            nlohmann::json line = {{"epoch", er.epoch},
                                   {"train_loss", er.train_loss},
                                   {"val_metric", er.val_metric},
                                   {"test_metric", er.test_metric}};
            (*log_out) << line.dump() << "\n";
        }
    }

    result.record.final_test_metric =
        result.record.epochs[result.record.selected_epoch].test_metric;
    return result;
}

// Full run: train, then persist checkpoint + run record + epoch log under out_dir.
inline RunRecord run_training(const TrainConfig& config, const ExampleStore& data,
                              const DatasetSplit& splits, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream log(out_dir / "log.jsonl");
    TrainResult tr = train(config, data, splits, &log);
    tr.best_params.save(out_dir / "checkpoint", config.to_json(), config.hash());
    std::ofstream run(out_dir / "run.json");
    run << tr.record.to_json().dump(2) << "\n";
    return tr.record;
}

// ---- multi-seed aggregation (mean +/- population std) ----

struct Aggregate {
    double mean = 0.0;
    double std_dev = 0.0;
    std::size_t n = 0;
};

inline Aggregate aggregate_metrics(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("aggregate: no values");
    Aggregate a;
    a.n = values.size();
    a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(a.n);
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std_dev = std::sqrt(ss / static_cast<double>(a.n));
    return a;
}

inline std::string format_aggregate(const Aggregate& a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f ± %.6f", a.mean, a.std_dev);
    return std::string(buf);
}

// Records must share config except for the seed.
inline Aggregate report(const std::vector<RunRecord>& records) {
    if (records.empty()) throw ConfigError("report: no run records");
    std::string expected = records[0].config.hash();
    std::vector<double> values;
    for (const auto& r : records) {
        if (r.config.hash() != expected)
            throw ConfigError("report: run records have mixed configs");
        values.push_back(r.final_test_metric);
    }
    return aggregate_metrics(values);
}

}  // namespace stgt
