#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stgt/config.hpp"
#include "stgt/ffn.hpp"
#include "stgt/params.hpp"
#include "stgt/tape.hpp"

namespace stgt {

// Sinusoidal PE, transformer convention, 0-based positions:
// entry 2k = sin(pos / base^{2k/d}), entry 2k+1 = cos(pos / base^{2k/d}).
inline Tensor sinusoidal_pe(std::size_t pos, std::size_t d, double base = 10000.0) {
    if (d % 2 != 0) throw ConfigError("sinusoidal_pe: d must be even");
    Tensor out(1, d);
    for (std::size_t k = 0; 2 * k < d; ++k) {
        double freq = std::pow(base, -(2.0 * static_cast<double>(k)) / static_cast<double>(d));
        double angle = static_cast<double>(pos) * freq;
        out.at(0, 2 * k) = std::sin(angle);
        out.at(0, 2 * k + 1) = std::cos(angle);
    }
    return out;
}

inline Tensor sinusoidal_pe_matrix(std::size_t m, std::size_t d, double base = 10000.0) {
    Tensor out(m, d);
    for (std::size_t pos = 0; pos < m; ++pos) {
        Tensor row = sinusoidal_pe(pos, d, base);
        for (std::size_t j = 0; j < d; ++j) out.at(pos, j) = row.at(0, j);
    }
    return out;
}

// Eq. 6: g0_pos = (1-lambda) g_pos + lambda b_pos + SPE(pos)
// lambda_param is optional; when valid it overrides the fixed lambda.
inline Var inject_positional(Tape& tape, Var g, Var basis, double lambda, double spe_base,
                             Var lambda_param = {}) {
    const Tensor& gv = tape.val(g);
    const Tensor& bv = tape.val(basis);
    if (gv.rows != bv.rows || gv.cols != bv.cols)
        throw ConfigError("inject_positional: token/basis shape mismatch");
    Var spe = tape.constant(sinusoidal_pe_matrix(gv.rows, gv.cols, spe_base));
    if (lambda_param.valid()) {
        Var one_minus = tape.caffine(lambda_param, -1.0, 1.0);
        Var mixed = tape.add(tape.scale_by(g, one_minus), tape.scale_by(basis, lambda_param));
        return tape.add(mixed, spe);
    }
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("inject_positional: lambda outside [0,1]");
    Var mixed = tape.add(tape.caffine(g, 1.0 - lambda, 0.0), tape.caffine(basis, lambda, 0.0));
    return tape.add(mixed, spe);
}

struct AttentionLayer {
    std::size_t index = 0;
    std::size_t dk = 0;
    std::size_t heads = 1;
    Ffn ffn;
    bool ln_passthrough = false;  // test hook
    double ln_eps = 1e-5;

    void init(ParameterStore& store, Rng& rng, std::size_t l, std::size_t d, std::size_t dk_w,
              std::size_t n_heads, double eps) {
        index = l;
        dk = dk_w;
        heads = n_heads;
        ln_eps = eps;
        std::string base = "attn." + std::to_string(l);
        store.add(base + ".wq", xavier_init(rng, d, dk_w));
        store.add(base + ".wk", xavier_init(rng, d, dk_w));
        store.add(base + ".wv", xavier_init(rng, d, dk_w));
        ffn.init(store, rng, base + ".ffn", d, 2 * d, d);
        store.add(base + ".ln1.gain", ones_row(d));
        store.add(base + ".ln1.bias", Tensor::zeros(1, d));
        store.add(base + ".ln2.gain", ones_row(d));
        store.add(base + ".ln2.bias", Tensor::zeros(1, d));
    }
};

// Eq. 7 + Eq. 8. The value projection applies to the layer input, exactly as
// written: Z = softmax(G Wq (G Wk)^T / sqrt(dk)) G Wv. When an inspection
// pointer is supplied, the attention-weight matrices are copied out.
inline Var attention_layer(Tape& tape, ParameterStore& store, Var g_in,
                           const AttentionLayer& layer, Nonlinearity nl,
                           std::vector<Tensor>* weights_out = nullptr) {
    std::string base = "attn." + std::to_string(layer.index);
    auto p = [&](const std::string& s) {
        auto& slot = store.slot(base + s);
        return tape.param(slot.value, &slot.grad);
    };
    Var q = tape.matmul(g_in, p(".wq"));
    Var k = tape.matmul(g_in, p(".wk"));
    Var v = tape.matmul(g_in, p(".wv"));

    std::size_t head_dim = layer.dk / layer.heads;
    double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
    Var z;
    for (std::size_t h = 0; h < layer.heads; ++h) {
        std::size_t lo = h * head_dim, hi = (h + 1) * head_dim;
        Var qh = layer.heads == 1 ? q : tape.slice_cols(q, lo, hi);
        Var kh = layer.heads == 1 ? k : tape.slice_cols(k, lo, hi);
        Var vh = layer.heads == 1 ? v : tape.slice_cols(v, lo, hi);
        Var scores = tape.caffine(tape.matmul(qh, tape.transpose(kh)), inv_sqrt, 0.0);
        Var weights = tape.softmax_rows(scores);
        if (weights_out) weights_out->push_back(tape.val(weights));
        Var zh = tape.matmul(weights, vh);
        z = z.valid() ? tape.concat_cols(z, zh) : zh;
    }

    Var inner = tape.layer_norm_rows(tape.add(g_in, z), p(".ln1.gain"), p(".ln1.bias"),
                                     layer.ln_eps, layer.ln_passthrough);
    Var ffn_out = layer.ffn.apply(tape, store, inner, nl);
    return tape.layer_norm_rows(tape.add(g_in, ffn_out), p(".ln2.gain"), p(".ln2.bias"),
                                layer.ln_eps, layer.ln_passthrough);
}

inline Var encode(Tape& tape, ParameterStore& store, Var g0,
                  const std::vector<AttentionLayer>& layers, Nonlinearity nl,
                  std::vector<Tensor>* weights_out = nullptr) {
    Var g = g0;
    for (const AttentionLayer& layer : layers)
        g = attention_layer(tape, store, g, layer, nl, weights_out);
    return g;
}

}  // namespace stgt
