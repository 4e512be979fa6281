#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stgt/graph.hpp"
#include "stgt/rng.hpp"
#include "stgt/tensor.hpp"

namespace stgt {

inline std::size_t count_triangles(const Graph& g) {
    std::size_t n = g.num_nodes();
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (const auto& e : g.edges) adj[e.src][e.dst] = true;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!adj[i][j]) continue;
            for (std::size_t k = j + 1; k < n; ++k)
                if (adj[i][k] && adj[j][k]) ++count;
        }
    return count;
}

inline std::size_t max_degree(const Graph& g) {
    std::size_t mx = 0;
    for (std::size_t d : g.degrees()) mx = std::max(mx, d);
    return mx;
}

enum class SynthTask { TriangleCount, DegreeParity };

inline SynthTask synth_task_from_string(const std::string& s) {
    if (s == "triangle-count") return SynthTask::TriangleCount;
    if (s == "degree-parity") return SynthTask::DegreeParity;
    throw ConfigError("unknown synthetic task: " + s);
}

// Erdos-Renyi style graphs with degree node labels and a single edge label.
// Deterministic in seed.
inline ExampleStore generate_synthetic(SynthTask task, std::size_t count,
                                       std::size_t min_nodes, std::size_t max_nodes,
                                       std::uint64_t seed) {
    if (count < 1) throw ConfigError("generate_synthetic: count must be >= 1");
    if (min_nodes < 1 || min_nodes > max_nodes || max_nodes > 20)
        throw ConfigError("generate_synthetic: node range must satisfy 1 <= min <= max <= 20");
    Rng rng(mix_seed(seed, 0x5374675453796eULL));
    ExampleStore store;
    store.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        std::size_t n = min_nodes + rng.below(max_nodes - min_nodes + 1);
        double p = rng.uniform(0.25, 0.65);
        Graph g;
        g.node_labels.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.uniform() < p) {
                    g.edges.push_back({i, j, {0}});
                    g.edges.push_back({j, i, {0}});
                }
        // degree as the single node-label field, capped to the vocab
        auto deg = g.degrees();
        for (std::size_t i = 0; i < n; ++i)
            g.node_labels[i] = {static_cast<int>(std::min<std::size_t>(deg[i], 19))};
        LabeledExample ex;
        ex.graph = std::move(g);
        ex.target = task == SynthTask::TriangleCount
                        ? static_cast<double>(count_triangles(ex.graph))
                        : static_cast<double>(max_degree(ex.graph) % 2);
        store.push_back(std::move(ex));
    }
    return store;
}

}  // namespace stgt
