#pragma once

#include <string>
#include <vector>

#include "stgt/config.hpp"
#include "stgt/ffn.hpp"
#include "stgt/graph.hpp"
#include "stgt/params.hpp"
#include "stgt/tape.hpp"

namespace stgt {

// Test hooks: swap the update / fuse functions for closed-form variants so
// unit tests can assert exact values.
enum class MpUpdateHook { None, Identity };
enum class MpFuseHook { None, FirstArg, HalvedSum };

struct MpHooks {
    MpUpdateHook f = MpUpdateHook::None;
    MpFuseHook phi = MpFuseHook::None;
};

// Per-field categorical embedding tables; multi-field tuples embed by
// summing the per-field rows.
struct EmbeddingTables {
    std::size_t node_fields = 0, edge_fields = 0;
    std::size_t node_vocab = 0, edge_vocab = 0;

    void init(ParameterStore& store, Rng& rng, std::size_t nf, std::size_t ef,
              std::size_t nv, std::size_t ev, std::size_t d) {
        node_fields = nf;
        edge_fields = ef;
        node_vocab = nv;
        edge_vocab = ev;
        for (std::size_t f = 0; f < nf; ++f)
            store.add("embed.node." + std::to_string(f), gauss_init(rng, nv, d, 0.1));
        for (std::size_t f = 0; f < ef; ++f)
            store.add("embed.edge." + std::to_string(f), gauss_init(rng, ev, d, 0.1));
    }
};

// Eq. 1: per-field lookup, summed over fields.
inline std::pair<Var, Var> embed_labels(Tape& tape, ParameterStore& store, const Graph& graph,
                                        const EmbeddingTables& tables) {
    auto embed = [&](const char* kind, std::size_t fields, std::size_t vocab,
                     auto&& label_of, std::size_t count) -> Var {
        Var acc;
        for (std::size_t f = 0; f < fields; ++f) {
            std::vector<std::size_t> idx(count);
            for (std::size_t i = 0; i < count; ++i) {
                int lbl = label_of(i, f);
                if (lbl < 0 || static_cast<std::size_t>(lbl) >= vocab)
                    throw ConfigError(std::string("embed_labels: ") + kind + " " +
                                      std::to_string(i) + " field " + std::to_string(f) +
                                      " label " + std::to_string(lbl) + " out of vocab " +
                                      std::to_string(vocab));
                idx[i] = static_cast<std::size_t>(lbl);
            }
            auto& slot = store.slot(std::string("embed.") + kind + "." + std::to_string(f));
            Var rows = tape.gather_rows(tape.param(slot.value, &slot.grad), std::move(idx));
            acc = acc.valid() ? tape.add(acc, rows) : rows;
        }
        return acc;
    };

    std::size_t n = graph.num_nodes();
    Var h0 = embed("node", tables.node_fields, tables.node_vocab,
                   [&](std::size_t i, std::size_t f) { return graph.node_labels[i][f]; }, n);

    Var e0;
    if (!graph.edges.empty()) {
        e0 = embed("edge", tables.edge_fields, tables.edge_vocab,
                   [&](std::size_t i, std::size_t f) { return graph.edges[i].label[f]; },
                   graph.edges.size());
    }
    return {h0, e0};
}

struct MpLayer {
    std::size_t index = 0;
    Ffn update_ffn;       // f^l
    Ffn fuse_ffn;         // phi^l for messages
    Ffn edge_fuse_ffn;    // phi for the edge refresh (may alias fuse_ffn)
    bool phi_shared = true;

    void init(ParameterStore& store, Rng& rng, std::size_t l, std::size_t d, bool shared) {
        index = l;
        phi_shared = shared;
        std::string base = "mp." + std::to_string(l);
        store.add(base + ".epsilon", Tensor::scalar(0.0));
        update_ffn.init(store, rng, base + ".f", d, 2 * d, d);
        fuse_ffn.init(store, rng, base + ".phi", 2 * d, 2 * d, d);
        if (shared) {
            edge_fuse_ffn = fuse_ffn;
        } else {
            edge_fuse_ffn.init(store, rng, base + ".phi_edge", 2 * d, 2 * d, d);
        }
    }
};

inline Var apply_fuse(Tape& tape, ParameterStore& store, const Ffn& phi, Var left, Var right,
                      Nonlinearity nl, MpFuseHook hook) {
    switch (hook) {
        case MpFuseHook::FirstArg:
            return left;
        case MpFuseHook::HalvedSum:
            return tape.caffine(tape.add(left, right), 0.5, 0.0);
        case MpFuseHook::None:
            return phi.apply(tape, store, tape.concat_cols(left, right), nl);
    }
    throw ConfigError("bad fuse hook");
}

// Eq. 2: h_i' = f(eps * h_i + sum_{j in N(i)} phi(h_j, e_ij))
inline Var mp_layer(Tape& tape, ParameterStore& store, Var h, Var e, const Graph& graph,
                    const MpLayer& layer, Nonlinearity nl, MpHooks hooks = {}) {
    std::size_t n = graph.num_nodes();
    auto& eps_slot = store.slot("mp." + std::to_string(layer.index) + ".epsilon");
    Var eps = tape.param(eps_slot.value, &eps_slot.grad);
    Var self = tape.scale_by(h, eps);

    Var pre = self;
    if (!graph.edges.empty()) {
        std::vector<std::size_t> srcs, dsts;
        srcs.reserve(graph.edges.size());
        dsts.reserve(graph.edges.size());
        // edge (i,j) carries the message phi(h_j, e_ij) into node i = src
        for (const auto& edge : graph.edges) {
            srcs.push_back(edge.src);
            dsts.push_back(edge.dst);
        }
        Var h_neighbors = tape.gather_rows(h, dsts);
        Var messages = apply_fuse(tape, store, layer.fuse_ffn, h_neighbors, e, nl, hooks.phi);
        Var aggregated = tape.segment_sum(messages, srcs, n);
        pre = tape.add(self, aggregated);
    }
    if (hooks.f == MpUpdateHook::Identity) return pre;
    return layer.update_ffn.apply(tape, store, pre, nl);
}

// e_ij' = phi(h_i, h_j), ordered concatenation
inline Var edge_update(Tape& tape, ParameterStore& store, Var h, const Graph& graph,
                       const MpLayer& layer, Nonlinearity nl, MpHooks hooks = {}) {
    if (graph.edges.empty()) return Var{};
    std::vector<std::size_t> srcs, dsts;
    for (const auto& edge : graph.edges) {
        srcs.push_back(edge.src);
        dsts.push_back(edge.dst);
    }
    Var h_src = tape.gather_rows(h, srcs);
    Var h_dst = tape.gather_rows(h, dsts);
    return apply_fuse(tape, store, layer.edge_fuse_ffn, h_src, h_dst, nl, hooks.phi);
}

// Embedding followed by mp_layers x (mp_layer; edge_update). L=0 returns H0.
inline Var run_local_mp(Tape& tape, ParameterStore& store, const Graph& graph,
                        const EmbeddingTables& tables, const std::vector<MpLayer>& layers,
                        Nonlinearity nl, MpHooks hooks = {}) {
    auto [h, e] = embed_labels(tape, store, graph, tables);
    for (const MpLayer& layer : layers) {
        h = mp_layer(tape, store, h, e, graph, layer, nl, hooks);
        e = edge_update(tape, store, h, graph, layer, nl, hooks);
    }
    return h;
}

}  // namespace stgt
