#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "stgt/params.hpp"
#include "stgt/tensor.hpp"

namespace stgt {

enum class Variant { Full, NoSerialization, NoAttention, SumPool };
enum class Task { Regression, Classification };
enum class Nonlinearity { Softplus, Tanh, Relu };
enum class NoiseMode { Gumbel, Off };

inline Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no-serialization") return Variant::NoSerialization;
    if (s == "no-attention") return Variant::NoAttention;
    if (s == "sum-pool") return Variant::SumPool;
    throw ConfigError("unknown variant: " + s);
}

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoSerialization: return "no-serialization";
        case Variant::NoAttention: return "no-attention";
        case Variant::SumPool: return "sum-pool";
    }
    return "?";
}

struct TrainConfig {
    std::size_t d = 16;
    std::size_t mp_layers = 2;
    std::size_t m = 8;            // serializer.m
    double tau = 0.1;             // serializer.tau
    NoiseMode noise = NoiseMode::Gumbel;
    std::size_t attn_layers = 2;
    std::size_t dk = 0;           // 0 = same as d
    std::size_t heads = 1;
    double lambda = 0.5;
    bool lambda_learnable = false;
    double spe_base = 10000.0;
    double lr = 1e-3;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    Task task = Task::Regression;
    Variant variant = Variant::Full;
    Nonlinearity nonlinearity = Nonlinearity::Softplus;
    bool phi_shared = true;       // edge_update shares phi with the node update
    std::size_t node_vocab = 32;
    std::size_t edge_vocab = 8;
    double ln_eps = 1e-5;

    std::size_t effective_dk() const { return dk == 0 ? d : dk; }

    void validate() const {
        if (d == 0 || m == 0 || batch_size == 0 || epochs == 0)
            throw ConfigError("d, serializer.m, batch_size, epochs must be positive");
        if (tau <= 0.0) throw ConfigError("serializer.tau must be > 0");
        if (lambda < 0.0 || lambda > 1.0) throw ConfigError("attn.lambda must be in [0,1]");
        if (d % 2 != 0) throw ConfigError("d must be even (sinusoidal PE)");
        if (effective_dk() != d)
            throw ConfigError("attn.dk must equal d: the residual in the attention layer "
                              "adds the dk-wide attention output to the d-wide input");
        if (heads == 0 || effective_dk() % heads != 0)
            throw ConfigError("attn.heads must divide attn.dk");
        if (lr < 0.0) throw ConfigError("lr must be >= 0");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["d"] = d;
        j["mp_layers"] = mp_layers;
        j["serializer.m"] = m;
        j["serializer.tau"] = tau;
        j["serializer.noise"] = noise == NoiseMode::Gumbel ? "gumbel" : "off";
        j["attn.layers"] = attn_layers;
        j["attn.dk"] = effective_dk();
        j["attn.heads"] = heads;
        j["attn.lambda"] = lambda;
        j["attn.lambda_learnable"] = lambda_learnable;
        j["attn.spe_base"] = spe_base;
        j["lr"] = lr;
        j["epochs"] = epochs;
        j["batch_size"] = batch_size;
        j["seed"] = seed;
        j["task"] = task == Task::Regression ? "regression" : "classification";
        j["variant"] = to_string(variant);
        j["nonlinearity"] = nonlinearity == Nonlinearity::Softplus
                                ? "softplus"
                                : (nonlinearity == Nonlinearity::Tanh ? "tanh" : "relu");
        j["phi_shared"] = phi_shared;
        j["node_vocab"] = node_vocab;
        j["edge_vocab"] = edge_vocab;
        j["ln_eps"] = ln_eps;
        return j;
    }

    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        c.d = j.value("d", c.d);
        c.mp_layers = j.value("mp_layers", c.mp_layers);
        c.m = j.value("serializer.m", c.m);
        c.tau = j.value("serializer.tau", c.tau);
        std::string noise = j.value("serializer.noise", std::string("gumbel"));
        if (noise == "gumbel") c.noise = NoiseMode::Gumbel;
        else if (noise == "off") c.noise = NoiseMode::Off;
        else throw ConfigError("serializer.noise must be 'gumbel' or 'off'");
        c.attn_layers = j.value("attn.layers", c.attn_layers);
        c.dk = j.value("attn.dk", c.dk);
        c.heads = j.value("attn.heads", c.heads);
        c.lambda = j.value("attn.lambda", c.lambda);
        c.lambda_learnable = j.value("attn.lambda_learnable", c.lambda_learnable);
        c.spe_base = j.value("attn.spe_base", c.spe_base);
        c.lr = j.value("lr", c.lr);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.seed = j.value("seed", c.seed);
        std::string task = j.value("task", std::string("regression"));
        if (task == "regression") c.task = Task::Regression;
        else if (task == "classification") c.task = Task::Classification;
        else throw ConfigError("task must be 'regression' or 'classification'");
        c.variant = variant_from_string(j.value("variant", std::string("full")));
        std::string nl = j.value("nonlinearity", std::string("softplus"));
        if (nl == "softplus") c.nonlinearity = Nonlinearity::Softplus;
        else if (nl == "tanh") c.nonlinearity = Nonlinearity::Tanh;
        else if (nl == "relu") c.nonlinearity = Nonlinearity::Relu;
        else throw ConfigError("nonlinearity must be softplus|tanh|relu");
        c.phi_shared = j.value("phi_shared", c.phi_shared);
        c.node_vocab = j.value("node_vocab", c.node_vocab);
        c.edge_vocab = j.value("edge_vocab", c.edge_vocab);
        c.ln_eps = j.value("ln_eps", c.ln_eps);
        c.validate();
        return c;
    }

    static TrainConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open config " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("config " + path + ": " + e.what());
        }
        return from_json(j);
    }

    std::string hash() const {
        // seed excluded so multi-seed runs share a hash modulo the seed field
        nlohmann::json j = to_json();
        j.erase("seed");
        return fnv1a_hex(j.dump());
    }
};

}  // namespace stgt
