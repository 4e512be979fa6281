#include <doctest.h>

#include <cmath>

#include "stgt/gradcheck.hpp"
#include "stgt/predictor.hpp"

using namespace stgt;

TEST_CASE("flatten layout: row-major, g'[0..d) is token 1") {
    Tape t;
    Tensor g(2, 3);
    for (std::size_t i = 0; i < 6; ++i) g.data[i] = static_cast<double>(i + 1);
    Var flat = t.reshape(t.constant(g), 1, 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(t.val(flat).data[i] == static_cast<double>(i + 1));
}

TEST_CASE("flatten_predict: zero weights and biases give 0") {
    ParameterStore store;
    Rng rng(3);
    PredictionHead head;
    head.init(store, rng, 6);
    for (auto& [name, slot] : store.slots())
        std::fill(slot.value.data.begin(), slot.value.data.end(), 0.0);
    Tape t;
    Tensor g(2, 3);
    for (double& v : g.data) v = 1.7;
    Var y = flatten_predict(t, store, t.constant(g), head, Nonlinearity::Softplus);
    CHECK(t.val(y).data[0] == 0.0);
}

TEST_CASE("flatten_predict: swapping token rows changes the prediction") {
    ParameterStore store;
    Rng rng(5);
    PredictionHead head;
    head.init(store, rng, 6);
    Tensor g = gauss_init(rng, 2, 3, 1.0);
    Tensor swapped(2, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        swapped.at(0, j) = g.at(1, j);
        swapped.at(1, j) = g.at(0, j);
    }
    Tape t1, t2;
    double y1 = t1.val(flatten_predict(t1, store, t1.constant(g), head, Nonlinearity::Softplus)).data[0];
    double y2 = t2.val(flatten_predict(t2, store, t2.constant(swapped), head, Nonlinearity::Softplus)).data[0];
    CHECK(y1 != y2);
}

TEST_CASE("flatten_predict: shape mismatch is a config error") {
    ParameterStore store;
    Rng rng(7);
    PredictionHead head;
    head.init(store, rng, 6);
    Tape t;
    CHECK_THROWS_AS(
        flatten_predict(t, store, t.constant(Tensor::zeros(2, 4)), head, Nonlinearity::Softplus),
        ConfigError);
}

TEST_CASE("loss: exact fit gives zero MAE") {
    Tape t;
    Var l = loss(t, t.constant(Tensor::scalar(2.5)), 2.5, Task::Regression);
    CHECK(t.val(l).data[0] == 0.0);
}

TEST_CASE("loss: zero logit against label 1 is ln 2") {
    Tape t;
    Var l = loss(t, t.constant(Tensor::scalar(0.0)), 1.0, Task::Classification);
    CHECK(t.val(l).data[0] == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("batch MAE of [1,3] vs [2,2] is 1.0") {
    CHECK(mae_metric({1.0, 3.0}, {2.0, 2.0}) == 1.0);
}

TEST_CASE("MAE metric equals the L1 training loss on identical inputs") {
    Rng rng(11);
    std::vector<double> preds, targets;
    double loss_sum = 0.0;
    for (int i = 0; i < 16; ++i) {
        preds.push_back(rng.gauss());
        targets.push_back(rng.gauss());
        Tape t;
        loss_sum += t.val(loss(t, t.constant(Tensor::scalar(preds.back())), targets.back(),
                               Task::Regression)).data[0];
    }
    CHECK(mae_metric(preds, targets) == doctest::Approx(loss_sum / 16.0).epsilon(1e-12));
}

TEST_CASE("metric_auc: separation, ties, hand-counted pairs") {
    CHECK(metric_auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
    CHECK(metric_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
    // labels [1,0,1], scores [0.9,0.8,0.3]: one concordant, one discordant of 2 pairs
    CHECK(metric_auc({0.9, 0.8, 0.3}, {1, 0, 1}) == 0.5);
}

TEST_CASE("metric_auc: single-class input is an undefined-metric error") {
    CHECK_THROWS_AS(metric_auc({0.1, 0.9}, {1, 1}), ConfigError);
}

TEST_CASE("metric_auc: invariant under strictly increasing transforms") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores, labels;
        for (int i = 0; i < 20; ++i) {
            scores.push_back(rng.gauss());
            labels.push_back(i < 10 ? 1.0 : 0.0);
        }
        double base = metric_auc(scores, labels);
        double a = rng.uniform(0.1, 5.0), b = rng.uniform(-3.0, 3.0);
        std::vector<double> mapped;
        for (double s : scores) {
            double v = a * s + b;
            if (trial % 2 == 0) v = std::tanh(v) + 0.001 * v;  // nonlinear monotone map
            mapped.push_back(v);
        }
        CHECK(metric_auc(mapped, labels) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("prediction head gradient passes the finite-difference oracle") {
    CHECK(gradcheck_head().max_rel_err < 1e-4);
}
