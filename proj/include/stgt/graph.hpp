#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stgt/tensor.hpp"

namespace stgt {

// Labeled graph stored as symmetric closure: every undirected edge is
// materialized in both directions with the same label.
struct Graph {
    std::vector<std::vector<int>> node_labels;  // N tuples, F_v fields each
    struct Edge {
        std::size_t src;
        std::size_t dst;
        std::vector<int> label;  // F_e fields
    };
    std::vector<Edge> edges;  // directed after closure

    std::size_t num_nodes() const { return node_labels.size(); }

    std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> deg(num_nodes(), 0);
        for (const Edge& e : edges) deg[e.src]++;
        return deg;
    }

    // neighbor lists derived from the (directed) edge list
    std::vector<std::vector<std::size_t>> neighbors() const {
        std::vector<std::vector<std::size_t>> nb(num_nodes());
        for (const Edge& e : edges) nb[e.src].push_back(e.dst);
        return nb;
    }

    void validate() const {
        if (num_nodes() == 0) throw ParseError("graph must have at least one node");
        std::size_t fv = node_labels.empty() ? 0 : node_labels[0].size();
        for (const auto& t : node_labels) {
            if (t.size() != fv) throw ParseError("inconsistent node label tuple width");
        }
        std::set<std::pair<std::size_t, std::size_t>> seen;
        std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> lbl;
        for (const Edge& e : edges) {
            if (e.src >= num_nodes())
                throw ParseError("src " + std::to_string(e.src) + " out of range");
            if (e.dst >= num_nodes())
                throw ParseError("dst " + std::to_string(e.dst) + " out of range");
            seen.insert({e.src, e.dst});
            lbl[{e.src, e.dst}] = e.label;
        }
        for (const Edge& e : edges) {
            auto rev = std::make_pair(e.dst, e.src);
            if (!seen.count(rev)) {
                throw ParseError("symmetric closure violated: edge (" +
                                 std::to_string(e.src) + "," + std::to_string(e.dst) +
                                 ") has no reverse");
            }
            if (lbl[rev] != e.label) {
                throw ParseError("symmetric closure violated: reverse edge label differs");
            }
        }
    }

    // relabel nodes: node i becomes perm[i]
    Graph permuted(const std::vector<std::size_t>& perm) const {
        Graph g;
        g.node_labels.resize(num_nodes());
        for (std::size_t i = 0; i < num_nodes(); ++i) g.node_labels[perm[i]] = node_labels[i];
        for (const Edge& e : edges) g.edges.push_back({perm[e.src], perm[e.dst], e.label});
        return g;
    }
};

struct LabeledExample {
    Graph graph;
    double target = 0.0;
};

using ExampleStore = std::vector<LabeledExample>;

// ---- JSON Lines schema ----
// {"nodes": [[int,...],...], "edges": [[src, dst, [int,...]],...], "target": number}
// Edge list may be half-closure; "directed": true suppresses closure.

inline LabeledExample parse_graph_record(const std::string& line, std::size_t line_no = 0) {
    auto where = [line_no](const std::string& field) {
        return "line " + std::to_string(line_no) + ", field '" + field + "': ";
    };
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty())
        throw ParseError(where("nodes") + "expected non-empty array");
    if (!j.contains("target") || !j["target"].is_number())
        throw ParseError(where("target") + "expected number");

    LabeledExample ex;
    ex.target = j["target"].get<double>();
    if (!std::isfinite(ex.target)) throw ParseError(where("target") + "non-finite");

    for (const auto& nl : j["nodes"]) {
        if (!nl.is_array()) throw ParseError(where("nodes") + "expected array of int tuples");
        std::vector<int> tup;
        for (const auto& v : nl) {
            if (!v.is_number_integer()) throw ParseError(where("nodes") + "label must be int");
            tup.push_back(v.get<int>());
        }
        ex.graph.node_labels.push_back(std::move(tup));
    }

    bool directed = j.value("directed", false);
    std::size_t n = ex.graph.num_nodes();
    if (j.contains("edges")) {
        if (!j["edges"].is_array()) throw ParseError(where("edges") + "expected array");
        for (const auto& er : j["edges"]) {
            if (!er.is_array() || er.size() != 3)
                throw ParseError(where("edges") + "expected [src, dst, [labels]]");
            long long src = er[0].get<long long>();
            long long dst = er[1].get<long long>();
            if (src < 0 || static_cast<std::size_t>(src) >= n)
                throw ParseError(where("edges") + "src " + std::to_string(src) + " out of range");
            if (dst < 0 || static_cast<std::size_t>(dst) >= n)
                throw ParseError(where("edges") + "dst " + std::to_string(dst) + " out of range");
            std::vector<int> lbl;
            for (const auto& v : er[2]) {
                if (!v.is_number_integer())
                    throw ParseError(where("edges") + "edge label must be int");
                lbl.push_back(v.get<int>());
            }
            ex.graph.edges.push_back(
                {static_cast<std::size_t>(src), static_cast<std::size_t>(dst), lbl});
        }
    }
    if (!directed) {
        // apply closure for any edge listed one way only
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& e : ex.graph.edges) seen.insert({e.src, e.dst});
        std::vector<Graph::Edge> extra;
        for (const auto& e : ex.graph.edges) {
            if (!seen.count({e.dst, e.src})) {
                extra.push_back({e.dst, e.src, e.label});
                seen.insert({e.dst, e.src});
            }
        }
        for (auto& e : extra) ex.graph.edges.push_back(std::move(e));
    }
    ex.graph.validate();
    return ex;
}

inline std::string serialize_graph_record(const LabeledExample& ex) {
    nlohmann::json j;
    j["nodes"] = ex.graph.node_labels;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : ex.graph.edges) edges.push_back({e.src, e.dst, e.label});
    j["edges"] = edges;
    j["directed"] = true;  // closure already materialized
    j["target"] = ex.target;
    return j.dump();
}

inline ExampleStore load_jsonl(std::istream& in) {
    ExampleStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        store.push_back(parse_graph_record(line, line_no));
    }
    return store;
}

inline ExampleStore load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return load_jsonl(in);
}

inline void save_jsonl(const ExampleStore& store, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    for (const auto& ex : store) out << serialize_graph_record(ex) << "\n";
}

}  // namespace stgt
