#include "bbsim/graph.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "bbsim/errors.hpp"
#include "bbsim/rng.hpp"

namespace bbsim {

Graph Graph::from_edges(int n, std::vector<Edge> es) {
    if (n < 0) throw OutOfRange("graph size must be nonnegative");
    for (auto& e : es) {
        if (e.first == e.second)
            throw OutOfRange("self loop at vertex " + std::to_string(e.first));
        if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
            throw OutOfRange("edge endpoint out of range");
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());

    Graph g;
    g.n = n;
    g.edges = std::move(es);
    g.adj.assign(n, {});
    for (const auto& [u, v] : g.edges) {
        g.adj[u].push_back(v);
        g.adj[v].push_back(u);
    }
    for (auto& a : g.adj) std::sort(a.begin(), a.end());
    return g;
}

bool Graph::has_edge(int u, int v) const {
    if (u < 0 || v < 0 || u >= n || v >= n) throw OutOfRange("has_edge: vertex out of range");
    if (u == v) return false;
    const auto& a = adj[u];
    return std::binary_search(a.begin(), a.end(), v);
}

const std::vector<int>& Graph::neighbors(int v) const {
    if (v < 0 || v >= n) throw OutOfRange("neighbors: vertex out of range");
    return adj[v];
}

bool VertexView::has_neighbor(int u) const {
    return std::binary_search(neighbors.begin(), neighbors.end(), u);
}

VertexView vertex_view(const Graph& g, int v) {
    if (v < 0 || v >= g.n) throw OutOfRange("vertex_view: vertex out of range");
    return VertexView{v, g.n, g.adj[v]};
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& verts,
                       std::vector<int>* out_labels) {
    std::vector<int> vs = verts;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    std::vector<int> pos(g.n, -1);
    for (size_t i = 0; i < vs.size(); ++i) {
        if (vs[i] < 0 || vs[i] >= g.n) throw OutOfRange("induced_subgraph: vertex out of range");
        pos[vs[i]] = static_cast<int>(i);
    }
    std::vector<Edge> es;
    for (const auto& [u, v] : g.edges)
        if (pos[u] >= 0 && pos[v] >= 0) es.emplace_back(pos[u], pos[v]);
    if (out_labels) *out_labels = vs;
    return Graph::from_edges(static_cast<int>(vs.size()), std::move(es));
}

Graph gnp_random_graph(int n, double p, uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> es;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.unit() < p) es.emplace_back(u, v);
    return Graph::from_edges(n, std::move(es));
}

std::string graph_to_json(const Graph& g) {
    nlohmann::ordered_json j;
    j["n"] = g.n;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [u, v] : g.edges) arr.push_back({u, v});
    j["edges"] = arr;
    return j.dump();
}

Graph graph_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (!j.contains("n") || !j.contains("edges"))
        throw ConfigError("graph json needs fields n, edges");
    std::vector<Edge> es;
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("graph json edge must be a pair");
        es.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return Graph::from_edges(j["n"].get<int>(), std::move(es));
}

} // namespace bbsim
