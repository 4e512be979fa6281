#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stgt/config.hpp"
#include "stgt/ffn.hpp"
#include "stgt/params.hpp"
#include "stgt/tape.hpp"

namespace stgt {

// FFN head on the row-major flattening of the token matrix. Regression emits
// the raw value, classification a logit.
struct PredictionHead {
    Ffn ffn;
    std::size_t in_width = 0;

    void init(ParameterStore& store, Rng& rng, std::size_t input_width) {
        in_width = input_width;
        std::size_t hidden = (input_width + 1) / 2;
        hidden = std::max<std::size_t>(hidden, 4);
        ffn.init(store, rng, "head", input_width, hidden, 1);
    }
};

inline Var flatten_predict(Tape& tape, ParameterStore& store, Var g, const PredictionHead& head,
                           Nonlinearity nl) {
    const Tensor& gv = tape.val(g);
    if (gv.size() != head.in_width)
        throw ConfigError("flatten_predict: input " + gv.shape_str() + " does not match head width " +
                          std::to_string(head.in_width));
    Var flat = tape.reshape(g, 1, head.in_width);
    return head.ffn.apply(tape, store, flat, nl);
}

// Regression: L1 (matches the MAE metric). Classification: BCE on the logit,
// composed as softplus(z) - y*z.
inline Var loss(Tape& tape, Var y_pred, double target, Task task) {
    if (task == Task::Regression) {
        return tape.abs_val(tape.caffine(y_pred, 1.0, -target));
    }
    Var sp = tape.softplus(y_pred);
    return tape.add(sp, tape.caffine(y_pred, -target, 0.0));
}

inline double mae_metric(const std::vector<double>& preds, const std::vector<double>& targets) {
    if (preds.empty() || preds.size() != targets.size())
        throw ConfigError("mae_metric: size mismatch or empty");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) acc += std::fabs(preds[i] - targets[i]);
    return acc / static_cast<double>(preds.size());
}

// Rank-based (Mann-Whitney) AUC; ties count 0.5.
inline double metric_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ConfigError("metric_auc: size mismatch or empty");
    std::size_t pos = 0, neg = 0;
    for (double l : labels) {
        if (l == 1.0) ++pos;
        else if (l == 0.0) ++neg;
        else throw ConfigError("metric_auc: labels must be 0 or 1");
    }
    if (pos == 0 || neg == 0)
        throw ConfigError("metric_auc: undefined, both classes must be present");
    double concordant = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0.0) continue;
            if (scores[i] > scores[j]) concordant += 1.0;
            else if (scores[i] == scores[j]) concordant += 0.5;
        }
    }
    return concordant / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace stgt
