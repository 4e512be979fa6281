#pragma once

#include <cstddef>
#include <vector>

#include "stgt/attention.hpp"
#include "stgt/config.hpp"
#include "stgt/graph.hpp"
#include "stgt/local_mp.hpp"
#include "stgt/predictor.hpp"
#include "stgt/serializer.hpp"

namespace stgt {

// One STGT model instance (any variant) bound to a ParameterStore.
// Forward composition per variant:
//   full:             MP -> serialize -> inject PE -> encode -> flatten -> head
//   no-serialization: MP -> prepend learnable graph token -> encode -> token 0 -> head
//   no-attention:     MP -> serialize -> flatten -> head
//   sum-pool:         MP -> sum node features -> head
class Model {
public:
    Model(TrainConfig config, ParameterStore& store, bool initialize = true)
        : cfg_(std::move(config)), store_(&store) {
        cfg_.validate();
        if (initialize) init_params();
        else attach_params();
    }

    const TrainConfig& config() const { return cfg_; }
    ParameterStore& store() { return *store_; }

    struct ForwardResult {
        Var prediction;                       // 1x1
        Var tokens;                           // serializer output (when present)
        std::vector<Tensor> assignment;       // Eq. 4 matrices (inspection)
        std::vector<Tensor> attention_weights;  // Eq. 7 row-stochastic matrices
    };

    // rng drives Gumbel noise; nullptr or NoiseMode::Off disables it.
    ForwardResult forward(Tape& tape, const Graph& graph, NoiseMode noise, Rng* rng,
                          bool inspect = false) const {
        ForwardResult result;
        ParameterStore& store = *store_;
        Var h = run_local_mp(tape, store, graph, tables_, mp_layers_, cfg_.nonlinearity);

        switch (cfg_.variant) {
            case Variant::Full: {
                auto& basis_slot = store.slot("serializer.basis");
                Var basis = tape.param(basis_slot.value, &basis_slot.grad);
                Var s_raw = similarity_scores(tape, h, basis);
                Var s = gumbel_normalize(tape, s_raw, cfg_.tau, noise, rng);
                if (inspect) result.assignment.push_back(tape.val(s));
                Var g = aggregate_tokens(tape, s, h);
                result.tokens = g;
                Var lambda_param;
                if (cfg_.lambda_learnable) {
                    auto& ls = store.slot("attn.lambda");
                    lambda_param = tape.param(ls.value, &ls.grad);
                }
                Var g0 = inject_positional(tape, g, basis, cfg_.lambda, cfg_.spe_base,
                                           lambda_param);
                Var gf = encode(tape, store, g0, attn_layers_, cfg_.nonlinearity,
                                inspect ? &result.attention_weights : nullptr);
                result.prediction = flatten_predict(tape, store, gf, head_, cfg_.nonlinearity);
                break;
            }
            case Variant::NoSerialization: {
                auto& gt = store.slot("graph_token");
                Var token = tape.param(gt.value, &gt.grad);
                Var seq = tape.concat_rows(token, h);  // N+1 tokens
                Var gf = encode(tape, store, seq, attn_layers_, cfg_.nonlinearity,
                                inspect ? &result.attention_weights : nullptr);
                Var pooled = tape.gather_rows(gf, {0});
                result.prediction = flatten_predict(tape, store, pooled, head_, cfg_.nonlinearity);
                break;
            }
            case Variant::NoAttention: {
                auto& basis_slot = store.slot("serializer.basis");
                Var basis = tape.param(basis_slot.value, &basis_slot.grad);
                Var s = gumbel_normalize(tape, similarity_scores(tape, h, basis), cfg_.tau,
                                         noise, rng);
                if (inspect) result.assignment.push_back(tape.val(s));
                Var g = aggregate_tokens(tape, s, h);
                result.tokens = g;
                result.prediction = flatten_predict(tape, store, g, head_, cfg_.nonlinearity);
                break;
            }
            case Variant::SumPool: {
                std::vector<std::size_t> seg(graph.num_nodes(), 0);
                Var pooled = tape.segment_sum(h, std::move(seg), 1);
                result.prediction = flatten_predict(tape, store, pooled, head_, cfg_.nonlinearity);
                break;
            }
        }
        return result;
    }

    // Scalar loss for one example (1x1 Var).
    Var example_loss(Tape& tape, const LabeledExample& ex, NoiseMode noise, Rng* rng) const {
        ForwardResult r = forward(tape, ex.graph, noise, rng);
        return loss(tape, r.prediction, ex.target, cfg_.task);
    }

    double predict_value(const Graph& graph) const {
        Tape tape;
        ForwardResult r = forward(tape, graph, NoiseMode::Off, nullptr);
        return tape.val(r.prediction).data[0];
    }

    const std::vector<MpLayer>& mp_layers() const { return mp_layers_; }
    const std::vector<AttentionLayer>& attn_layers() const { return attn_layers_; }
    std::vector<AttentionLayer>& attn_layers() { return attn_layers_; }
    const EmbeddingTables& tables() const { return tables_; }
    const PredictionHead& head() const { return head_; }

private:
    TrainConfig cfg_;
    ParameterStore* store_;
    EmbeddingTables tables_;
    std::vector<MpLayer> mp_layers_;
    std::vector<AttentionLayer> attn_layers_;
    PredictionHead head_;

    std::size_t head_width() const {
        switch (cfg_.variant) {
            case Variant::Full:
            case Variant::NoAttention: return cfg_.m * cfg_.d;
            case Variant::NoSerialization:
            case Variant::SumPool: return cfg_.d;
        }
        return 0;
    }

    bool uses_serializer() const {
        return cfg_.variant == Variant::Full || cfg_.variant == Variant::NoAttention;
    }

    bool uses_attention() const {
        return cfg_.variant == Variant::Full || cfg_.variant == Variant::NoSerialization;
    }

    void init_params() {
        Rng rng(mix_seed(cfg_.seed, 0x696e6974ULL));
        ParameterStore& store = *store_;
        tables_.init(store, rng, 1, 1, cfg_.node_vocab, cfg_.edge_vocab, cfg_.d);
        mp_layers_.resize(cfg_.mp_layers);
        for (std::size_t l = 0; l < cfg_.mp_layers; ++l)
            mp_layers_[l].init(store, rng, l, cfg_.d, cfg_.phi_shared);
        if (uses_serializer()) init_basis(store, rng, cfg_.m, cfg_.d);
        if (uses_attention()) {
            attn_layers_.resize(cfg_.attn_layers);
            for (std::size_t l = 0; l < cfg_.attn_layers; ++l)
                attn_layers_[l].init(store, rng, l, cfg_.d, cfg_.effective_dk(), cfg_.heads,
                                     cfg_.ln_eps);
        }
        if (cfg_.variant == Variant::Full && cfg_.lambda_learnable)
            store.add("attn.lambda", Tensor::scalar(cfg_.lambda));
        if (cfg_.variant == Variant::NoSerialization)
            store.add("graph_token", gauss_init(rng, 1, cfg_.d,
                                                std::sqrt(1.0 / static_cast<double>(cfg_.d))));
        head_.init(store, rng, head_width());
    }

    // Bind to an already-populated store (checkpoint load path).
    void attach_params() {
        ParameterStore& store = *store_;
        tables_.node_fields = 1;
        tables_.edge_fields = 1;
        tables_.node_vocab = cfg_.node_vocab;
        tables_.edge_vocab = cfg_.edge_vocab;
        mp_layers_.resize(cfg_.mp_layers);
        for (std::size_t l = 0; l < cfg_.mp_layers; ++l) {
            MpLayer& layer = mp_layers_[l];
            layer.index = l;
            layer.phi_shared = cfg_.phi_shared;
            std::string base = "mp." + std::to_string(l);
            layer.update_ffn.attach(store, base + ".f");
            layer.fuse_ffn.attach(store, base + ".phi");
            if (cfg_.phi_shared) layer.edge_fuse_ffn = layer.fuse_ffn;
            else layer.edge_fuse_ffn.attach(store, base + ".phi_edge");
        }
        if (uses_attention()) {
            attn_layers_.resize(cfg_.attn_layers);
            for (std::size_t l = 0; l < cfg_.attn_layers; ++l) {
                AttentionLayer& layer = attn_layers_[l];
                layer.index = l;
                layer.dk = cfg_.effective_dk();
                layer.heads = cfg_.heads;
                layer.ln_eps = cfg_.ln_eps;
                layer.ffn.attach(store, "attn." + std::to_string(l) + ".ffn");
            }
        }
        head_.in_width = head_width();
        head_.ffn.attach(store, "head");
    }
};

}  // namespace stgt
