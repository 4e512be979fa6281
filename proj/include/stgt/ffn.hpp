#pragma once

#include <string>

#include "stgt/config.hpp"
#include "stgt/params.hpp"
#include "stgt/tape.hpp"

namespace stgt {

inline Var apply_nonlinearity(Tape& tape, Var x, Nonlinearity nl) {
    switch (nl) {
        case Nonlinearity::Softplus: return tape.softplus(x);
        case Nonlinearity::Tanh: return tape.tanh_act(x);
        case Nonlinearity::Relu: return tape.relu(x);
    }
    throw ConfigError("bad nonlinearity");
}

// Two-layer feed-forward block: X -> nonlin(X W1 + b1) W2 + b2, applied row-wise.
struct Ffn {
    std::string prefix;
    std::size_t in = 0, hidden = 0, out = 0;

    void init(ParameterStore& store, Rng& rng, const std::string& name, std::size_t in_w,
              std::size_t hidden_w, std::size_t out_w) {
        prefix = name;
        in = in_w;
        hidden = hidden_w;
        out = out_w;
        store.add(prefix + ".w1", xavier_init(rng, in_w, hidden_w));
        store.add(prefix + ".b1", Tensor::zeros(1, hidden_w));
        store.add(prefix + ".w2", xavier_init(rng, hidden_w, out_w));
        store.add(prefix + ".b2", Tensor::zeros(1, out_w));
    }

    void attach(ParameterStore& store, const std::string& name) {
        prefix = name;
        in = store.slot(name + ".w1").value.rows;
        hidden = store.slot(name + ".w1").value.cols;
        out = store.slot(name + ".w2").value.cols;
    }

    Var apply(Tape& tape, ParameterStore& store, Var x, Nonlinearity nl) const {
        auto p = [&](const std::string& s) {
            auto& slot = store.slot(prefix + s);
            return tape.param(slot.value, &slot.grad);
        };
        Var h = tape.add_row(tape.matmul(x, p(".w1")), p(".b1"));
        h = apply_nonlinearity(tape, h, nl);
        return tape.add_row(tape.matmul(h, p(".w2")), p(".b2"));
    }
};

}  // namespace stgt
