#pragma once

#include <cstddef>

#include "stgt/config.hpp"
#include "stgt/params.hpp"
#include "stgt/rng.hpp"
#include "stgt/tape.hpp"

namespace stgt {

// Eq. 3: s'_ij = 1 / (1 + ||h_i - b_j||^2)
inline Var similarity_scores(Tape& tape, Var h, Var basis) {
    return tape.student_t_scores(h, basis);
}

// Eq. 4: row-wise softmax of (s' + t) / tau; t is standard Gumbel noise when
// on, zero when off. rng == nullptr means noise off.
inline Var gumbel_normalize(Tape& tape, Var s_raw, double tau, NoiseMode mode, Rng* rng) {
    if (tau <= 0.0) throw ConfigError("gumbel_normalize: tau must be > 0");
    Var scaled = s_raw;
    if (mode == NoiseMode::Gumbel && rng != nullptr) {
        const Tensor& s = tape.val(s_raw);
        Tensor noise(s.rows, s.cols);
        for (double& v : noise.data) v = rng->gumbel();
        scaled = tape.add(s_raw, tape.constant(std::move(noise)));
    }
    scaled = tape.caffine(scaled, 1.0 / tau, 0.0);
    return tape.softmax_rows(scaled);
}

// Eq. 5: g_j = sum_i s_ij h_i
inline Var aggregate_tokens(Tape& tape, Var assignment, Var h) {
    return tape.aggregate_tokens(assignment, h);
}

struct SerializerOutput {
    Var tokens;  // M x d
    Var basis;   // M x d, doubles as the learnable PE
};

inline SerializerOutput serialize(Tape& tape, ParameterStore& store, Var h, double tau,
                                  NoiseMode mode, Rng* rng) {
    auto& basis_slot = store.slot("serializer.basis");
    Var basis = tape.param(basis_slot.value, &basis_slot.grad);
    Var s_raw = similarity_scores(tape, h, basis);
    Var s = gumbel_normalize(tape, s_raw, tau, mode, rng);
    Var g = aggregate_tokens(tape, s, h);
    return {g, basis};
}

inline void init_basis(ParameterStore& store, Rng& rng, std::size_t m, std::size_t d) {
    // zero-mean Gaussian with variance 1/d keeps initial distances O(1)
    store.add("serializer.basis", gauss_init(rng, m, d, std::sqrt(1.0 / static_cast<double>(d))));
}

}  // namespace stgt
