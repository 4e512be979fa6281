#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stgt/fd_check.hpp"
#include "stgt/model.hpp"
#include "stgt/train.hpp"

namespace stgt {

// Checks the analytic gradient of a scalar loss over every parameter in the
// store against central differences.
inline double check_store_gradient(
    ParameterStore& store, const std::function<Var(Tape&, ParameterStore&)>& build_loss,
    double epsilon = 1e-5) {
    store.zero_grads();
    Tape tape;
    Var l = build_loss(tape, store);
    tape.backward(l);
    std::vector<double> point = store.flatten();
    std::vector<double> grads = store.flatten_grads();
    auto value_fn = [&](std::span<const double> x) {
        store.unflatten(x);
        Tape t;
        return t.val(build_loss(t, store)).data[0];
    };
    double err = finite_difference_check(value_fn, point, grads, epsilon);
    store.unflatten(point);
    return err;
}

namespace detail {

inline Graph gradcheck_graph() {
    // fixed 5-node graph with a triangle and a pendant path
    Graph g;
    g.node_labels = {{1}, {2}, {0}, {3}, {1}};
    auto undirected = [&](std::size_t a, std::size_t b, int lbl) {
        g.edges.push_back({a, b, {lbl}});
        g.edges.push_back({b, a, {lbl}});
    };
    undirected(0, 1, 0);
    undirected(1, 2, 1);
    undirected(0, 2, 0);
    undirected(2, 3, 1);
    undirected(3, 4, 0);
    return g;
}

inline TrainConfig gradcheck_config(Variant variant = Variant::Full) {
    TrainConfig cfg;
    cfg.d = 4;
    cfg.m = 3;
    cfg.mp_layers = 2;
    cfg.attn_layers = 2;
    cfg.node_vocab = 8;
    cfg.edge_vocab = 4;
    cfg.noise = NoiseMode::Off;
    cfg.variant = variant;
    cfg.seed = 17;
    return cfg;
}

}  // namespace detail

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};

inline GradCheckEntry gradcheck_mp() {
    TrainConfig cfg = detail::gradcheck_config();
    ParameterStore store;
    Model model(cfg, store);
    Graph g = detail::gradcheck_graph();
    double err = check_store_gradient(store, [&](Tape& tape, ParameterStore& s) {
        Var h = run_local_mp(tape, s, g, model.tables(), model.mp_layers(), cfg.nonlinearity);
        return tape.sum_all(h);
    });
    return {"mp", err};
}

inline GradCheckEntry gradcheck_serializer() {
    TrainConfig cfg = detail::gradcheck_config();
    ParameterStore store;
    Rng rng(mix_seed(cfg.seed, 0xfd));
    store.add("test.h", gauss_init(rng, 5, cfg.d, 1.0));
    init_basis(store, rng, cfg.m, cfg.d);
    double err = check_store_gradient(store, [&](Tape& tape, ParameterStore& s) {
        auto& hs = s.slot("test.h");
        Var h = tape.param(hs.value, &hs.grad);
        SerializerOutput out = serialize(tape, s, h, cfg.tau, NoiseMode::Off, nullptr);
        // square the tokens so the loss is curved in every parameter
        return tape.sum_all(tape.mul(out.tokens, out.tokens));
    });
    return {"serializer", err};
}

inline GradCheckEntry gradcheck_attn() {
    TrainConfig cfg = detail::gradcheck_config();
    ParameterStore store;
    Rng rng(mix_seed(cfg.seed, 0xa77));
    store.add("test.g0", gauss_init(rng, cfg.m, cfg.d, 1.0));
    std::vector<AttentionLayer> layers(cfg.attn_layers);
    for (std::size_t l = 0; l < layers.size(); ++l)
        layers[l].init(store, rng, l, cfg.d, cfg.d, 1, cfg.ln_eps);
    // weighted linear readout: sum(gf * W) stays well-conditioned through the
    // final layer norm (a quadratic in a normalized output is nearly constant)
    Tensor w = gauss_init(rng, cfg.m, cfg.d, 1.0);
    double err = check_store_gradient(store, [&](Tape& tape, ParameterStore& s) {
        auto& gs = s.slot("test.g0");
        Var g0 = tape.param(gs.value, &gs.grad);
        Var gf = encode(tape, s, g0, layers, cfg.nonlinearity);
        return tape.sum_all(tape.mul(gf, tape.constant(w)));
    });
    return {"attn", err};
}

inline GradCheckEntry gradcheck_head() {
    TrainConfig cfg = detail::gradcheck_config();
    ParameterStore store;
    Rng rng(mix_seed(cfg.seed, 0x4ead));
    store.add("test.g", gauss_init(rng, cfg.m, cfg.d, 1.0));
    PredictionHead head;
    head.init(store, rng, cfg.m * cfg.d);
    double err = check_store_gradient(store, [&](Tape& tape, ParameterStore& s) {
        auto& gs = s.slot("test.g");
        Var g = tape.param(gs.value, &gs.grad);
        Var pred = flatten_predict(tape, s, g, head, cfg.nonlinearity);
        return loss(tape, pred, 0.73, Task::Regression);
    });
    return {"head", err};
}

// Full composite loss: 5-node graph, M=3, d=4.
inline GradCheckEntry gradcheck_composite() {
    TrainConfig cfg = detail::gradcheck_config();
    ParameterStore store;
    Model model(cfg, store);
    Graph g = detail::gradcheck_graph();
    LabeledExample ex{g, 1.25};
    double err = check_store_gradient(store, [&](Tape& tape, ParameterStore& s) {
        (void)s;
        return model.example_loss(tape, ex, NoiseMode::Off, nullptr);
    });
    return {"composite", err};
}

inline std::vector<GradCheckEntry> run_gradcheck(const std::string& module) {
    std::vector<GradCheckEntry> out;
    bool all = module == "all";
    if (all || module == "mp") out.push_back(gradcheck_mp());
    if (all || module == "serializer") out.push_back(gradcheck_serializer());
    if (all || module == "attn") out.push_back(gradcheck_attn());
    if (all || module == "head") out.push_back(gradcheck_head());
    if (all) out.push_back(gradcheck_composite());
    if (out.empty()) throw ConfigError("gradcheck: unknown module " + module +
                                       " (expected all|mp|serializer|attn|head)");
    return out;
}

}  // namespace stgt
