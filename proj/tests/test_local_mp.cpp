#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "stgt/gradcheck.hpp"
#include "stgt/local_mp.hpp"
#include "stgt/synth.hpp"

using namespace stgt;

namespace {

struct Fixture {
    ParameterStore store;
    EmbeddingTables tables;
    std::vector<MpLayer> layers;
    Nonlinearity nl = Nonlinearity::Softplus;

    explicit Fixture(std::size_t d = 4, std::size_t n_layers = 2, std::uint64_t seed = 5) {
        Rng rng(seed);
        tables.init(store, rng, 1, 1, 8, 4, d);
        layers.resize(n_layers);
        for (std::size_t l = 0; l < n_layers; ++l) layers[l].init(store, rng, l, d, true);
    }
};

Graph single_node(int label) {
    Graph g;
    g.node_labels = {{label}};
    return g;
}

// star: node 0 is the center, nodes 1..k leaves with the given label
Graph star(std::size_t leaves, int center_label, int leaf_label) {
    Graph g;
    g.node_labels.push_back({center_label});
    for (std::size_t i = 1; i <= leaves; ++i) {
        g.node_labels.push_back({leaf_label});
        g.edges.push_back({0, i, {0}});
        g.edges.push_back({i, 0, {0}});
    }
    return g;
}

std::vector<std::vector<double>> sorted_rows(const Tensor& t) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < t.rows; ++i) {
        std::vector<double> r(t.data.begin() + i * t.cols, t.data.begin() + (i + 1) * t.cols);
        rows.push_back(std::move(r));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

TEST_CASE("embed_labels: identical tuples give identical rows") {
    Fixture f;
    Graph g = star(2, 3, 3);  // all three nodes share label 3
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, g, f.tables);
    const Tensor& h = t.val(h0);
    for (std::size_t j = 0; j < h.cols; ++j) {
        CHECK(h.at(0, j) == h.at(1, j));
        CHECK(h.at(1, j) == h.at(2, j));
    }
}

TEST_CASE("embed_labels: zero tables give zero embeddings") {
    Fixture f;
    auto& table = f.store.slot("embed.node.0").value;
    std::fill(table.data.begin(), table.data.end(), 0.0);
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, single_node(2), f.tables);
    for (double v : t.val(h0).data) CHECK(v == 0.0);
}

TEST_CASE("embed_labels: single-field label equals the table row") {
    Fixture f;
    const Tensor& table = f.store.slot("embed.node.0").value;
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, single_node(5), f.tables);
    for (std::size_t j = 0; j < table.cols; ++j) CHECK(t.val(h0).at(0, j) == table.at(5, j));
}

TEST_CASE("embed_labels: out-of-vocab id names the offender") {
    Fixture f;
    CHECK_THROWS_WITH_AS(
        [&] {
            Tape t;
            embed_labels(t, f.store, single_node(100), f.tables);
        }(),
        doctest::Contains("out of vocab"), ConfigError);
}

TEST_CASE("mp_layer: isolated node with identity update gives eps*h") {
    Fixture f;
    f.store.slot("mp.0.epsilon").value.data[0] = 0.5;
    Graph g = single_node(2);
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, g, f.tables);
    MpHooks hooks{MpUpdateHook::Identity, MpFuseHook::None};
    Var h1 = mp_layer(t, f.store, h0, e0, g, f.layers[0], f.nl, hooks);
    for (std::size_t j = 0; j < t.val(h0).cols; ++j)
        CHECK(t.val(h1).at(0, j) == doctest::Approx(0.5 * t.val(h0).at(0, j)).epsilon(1e-14));
}

TEST_CASE("mp_layer: star center sums equal leaf contributions") {
    Fixture f;
    f.store.slot("mp.0.epsilon").value.data[0] = 0.25;
    Graph g = star(3, 1, 6);
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, g, f.tables);
    MpHooks hooks{MpUpdateHook::Identity, MpFuseHook::FirstArg};  // phi(h_j, e) = h_j
    Var h1 = mp_layer(t, f.store, h0, e0, g, f.layers[0], f.nl, hooks);
    const Tensor& h0v = t.val(h0);
    for (std::size_t j = 0; j < h0v.cols; ++j) {
        double expected = 0.25 * h0v.at(0, j) + 3.0 * h0v.at(1, j);
        CHECK(t.val(h1).at(0, j) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("mp_layer: additivity of the pre-update neighbor sum") {
    // with phi = first-arg and f = identity, doubling a neighbor's feature
    // doubles its term in the pre-update sum
    Fixture f;
    f.store.slot("mp.0.epsilon").value.data[0] = 0.0;
    Graph g = star(1, 1, 6);
    MpHooks hooks{MpUpdateHook::Identity, MpFuseHook::FirstArg};

    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, g, f.tables);
    Var h1 = mp_layer(t, f.store, h0, e0, g, f.layers[0], f.nl, hooks);
    Var h0_doubled = t.caffine(h0, 2.0, 0.0);
    Var h1_doubled = mp_layer(t, f.store, h0_doubled, e0, g, f.layers[0], f.nl, hooks);
    for (std::size_t j = 0; j < t.val(h1).cols; ++j)
        CHECK(t.val(h1_doubled).at(0, j) == doctest::Approx(2.0 * t.val(h1).at(0, j)));
}

TEST_CASE("edge_update: halved-sum hook is symmetric for equal endpoints") {
    Fixture f;
    Graph g = star(1, 6, 6);  // both endpoints share label 6, so h_i = h_j
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, g, f.tables);
    MpHooks hooks{MpUpdateHook::None, MpFuseHook::HalvedSum};
    Var e1 = edge_update(t, f.store, h0, g, f.layers[0], f.nl, hooks);
    for (std::size_t j = 0; j < t.val(h0).cols; ++j) {
        CHECK(t.val(e1).at(0, j) == doctest::Approx(t.val(h0).at(0, j)).epsilon(1e-14));
    }
}

TEST_CASE("edge_update: e_ij and e_ji differ for distinct endpoints") {
    Fixture f;
    Graph g = star(1, 1, 6);  // edge (0,1) then (1,0)
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, g, f.tables);
    Var e1 = edge_update(t, f.store, h0, g, f.layers[0], f.nl);
    const Tensor& ev = t.val(e1);
    bool differ = false;
    for (std::size_t j = 0; j < ev.cols; ++j) differ = differ || ev.at(0, j) != ev.at(1, j);
    CHECK(differ);
}

TEST_CASE("run_local_mp: zero layers returns the embedding") {
    Fixture f(4, 0);
    Graph g = star(2, 1, 3);
    Tape t;
    auto [h0, e0] = embed_labels(t, f.store, g, f.tables);
    Var h = run_local_mp(t, f.store, g, f.tables, f.layers, f.nl);
    CHECK(t.val(h).data == t.val(h0).data);
}

TEST_CASE("permutation equivariance is exact") {
    Fixture f;
    ExampleStore store = generate_synthetic(SynthTask::TriangleCount, 5, 6, 6, 11);
    Rng rng(23);
    for (const auto& ex : store) {
        Tape t;
        Var h = run_local_mp(t, f.store, ex.graph, f.tables, f.layers, f.nl);
        const Tensor& hv = t.val(h);
        for (int p = 0; p < 20; ++p) {
            std::vector<std::size_t> perm(ex.graph.num_nodes());
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            Graph pg = ex.graph.permuted(perm);
            Tape t2;
            Var h2 = run_local_mp(t2, f.store, pg, f.tables, f.layers, f.nl);
            const Tensor& hv2 = t2.val(h2);
            for (std::size_t i = 0; i < hv.rows; ++i)
                for (std::size_t j = 0; j < hv.cols; ++j)
                    CHECK(hv.at(i, j) == hv2.at(perm[i], j));  // bit-exact
        }
    }
}

TEST_CASE("edge_update permutes consistently with node relabeling") {
    Fixture f;
    ExampleStore store = generate_synthetic(SynthTask::TriangleCount, 3, 6, 6, 13);
    Rng rng(29);
    for (const auto& ex : store) {
        if (ex.graph.edges.empty()) continue;
        std::vector<std::size_t> perm(ex.graph.num_nodes());
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        Graph pg = ex.graph.permuted(perm);

        Tape t;
        auto [h0, e0] = embed_labels(t, f.store, ex.graph, f.tables);
        Var e1 = edge_update(t, f.store, h0, ex.graph, f.layers[0], f.nl);
        Tape t2;
        auto [h0p, e0p] = embed_labels(t2, f.store, pg, f.tables);
        Var e1p = edge_update(t2, f.store, h0p, pg, f.layers[0], f.nl);
        // edge order is preserved by permuted(), so rows line up directly
        CHECK(t.val(e1).data == t2.val(e1p).data);
    }
}

TEST_CASE("isomorphic graphs give equal multisets of node features") {
    Fixture f;
    ExampleStore store = generate_synthetic(SynthTask::TriangleCount, 5, 4, 6, 37);
    Rng rng(41);
    for (const auto& ex : store) {
        std::vector<std::size_t> perm(ex.graph.num_nodes());
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        Graph iso = ex.graph.permuted(perm);
        Tape t1, t2;
        Var h1 = run_local_mp(t1, f.store, ex.graph, f.tables, f.layers, f.nl);
        Var h2 = run_local_mp(t2, f.store, iso, f.tables, f.layers, f.nl);
        auto r1 = sorted_rows(t1.val(h1));
        auto r2 = sorted_rows(t2.val(h2));
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i)
            for (std::size_t j = 0; j < r1[i].size(); ++j)
                CHECK(r1[i][j] == doctest::Approx(r2[i][j]).epsilon(1e-9));
    }
}

TEST_CASE("locality: labels beyond the receptive field cannot move h_i") {
    // path 0-1-2-3-4 with 2 MP layers: node 0 sees distance <= 2
    Fixture f(4, 2);
    Graph g;
    g.node_labels = {{1}, {2}, {3}, {4}, {5}};
    for (std::size_t i = 0; i + 1 < 5; ++i) {
        g.edges.push_back({i, i + 1, {0}});
        g.edges.push_back({i + 1, i, {0}});
    }
    Tape t1;
    Var h1 = run_local_mp(t1, f.store, g, f.tables, f.layers, f.nl);
    Graph g2 = g;
    g2.node_labels[4] = {7};  // distance 4 from node 0
    Tape t2;
    Var h2 = run_local_mp(t2, f.store, g2, f.tables, f.layers, f.nl);
    for (std::size_t j = 0; j < t1.val(h1).cols; ++j)
        CHECK(t1.val(h1).at(0, j) == t2.val(h2).at(0, j));  // bit-exact
}

TEST_CASE("run_local_mp gradient passes the finite-difference oracle") {
    CHECK(gradcheck_mp().max_rel_err < 1e-4);
}
