#pragma once
// Undirected simple graphs on vertices 0..n-1, canonical edge order (u < v,
// lexicographically sorted), plus the per-vertex view a protocol player gets.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bbsim {

using Edge = std::pair<int, int>;

struct Graph {
    int n = 0;
    std::vector<Edge> edges;              // canonical: first < second, sorted
    std::vector<std::vector<int>> adj;    // sorted neighbor lists

    Graph() = default;
    // Canonicalizes (orients, sorts, dedups) and validates endpoints.
    static Graph from_edges(int n, std::vector<Edge> es);

    bool has_edge(int u, int v) const;
    const std::vector<int>& neighbors(int v) const;
    int degree(int v) const { return static_cast<int>(adj[v].size()); }
    size_t edge_count() const { return edges.size(); }

    bool operator==(const Graph& o) const { return n == o.n && edges == o.edges; }
};

// What one player sees: its own id, the number of players, and its neighbors.
struct VertexView {
    int self_id = -1;
    int n = 0;
    std::vector<int> neighbors;  // sorted

    bool has_neighbor(int u) const;
};

VertexView vertex_view(const Graph& g, int v);

// Induced subgraph on `verts` (need not be sorted; relabeled to 0..|verts|-1 in
// sorted order).  If out_labels is given, out_labels[new_id] = original label.
Graph induced_subgraph(const Graph& g, const std::vector<int>& verts,
                       std::vector<int>* out_labels = nullptr);

// G(n, p) with edges decided by independent coin flips from `seed`.
Graph gnp_random_graph(int n, double p, uint64_t seed);

// JSON wire format: {"n": int, "edges": [[u,v],...]} with canonical order.
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

} // namespace bbsim
