#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace risfl {

using Edge = std::pair<int, int>;  // stored with first < second

// Undirected communication topology: symmetric 0/1 adjacency, zero diagonal,
// nodes 0..n-1. This is the object every spectral and structural criterion
// acts on; it is immutable from the analysis side (edits return copies via
// with_edge / without_edge).
class Graph {
public:
    explicit Graph(int node_count);

    static Graph from_edges(int node_count, const std::vector<Edge>& edges);
    static Graph from_adjacency(const std::vector<std::vector<int>>& rows);

    static Graph path(int n);
    static Graph cycle(int n);
    static Graph complete(int n);
    static Graph star(int n);           // node 0 is the hub
    static Graph complete_bipartite(int a, int b);

    // 8-node topologies reconstructed from the platoon scenario: the revised
    // one is the Moebius ladder (ring plus all four antipodal chords,
    // lambda2 = 2, lambda_max = 4 + sqrt(2)); the initial one swaps the
    // (1,5) and (2,6) chords for a redundant (0,2) chord.
    static Graph fig3a_initial();
    static Graph fig3b_revised();

    int node_count() const { return n_; }
    bool has_edge(int u, int v) const;
    void add_edge(int u, int v);
    void remove_edge(int u, int v);
    Graph with_edge(int u, int v) const;
    Graph without_edge(int u, int v) const;

    int degree(int u) const;
    int max_degree() const;
    int edge_count() const;
    std::vector<int> neighbors(int u) const;
    std::vector<Edge> edges() const;
    std::vector<Edge> non_edges() const;

    bool connected() const;
    // BFS hop counts from src; unreachable nodes get -1.
    std::vector<int> bfs_distances(int src) const;

    bool operator==(const Graph& other) const = default;

    // Edge-list text: first line "n <count>", then one "u v" per line.
    std::string to_edge_list() const;
    static Graph from_edge_list(std::istream& in);
    static Graph from_edge_list(const std::string& text);

    // Adjacency CSV: n rows of n comma-separated 0/1 entries.
    std::string to_adjacency_csv() const;
    static Graph from_adjacency_csv(std::istream& in);

private:
    void check_node(int u) const;

    int n_ = 0;
    std::vector<std::uint8_t> adj_;  // row-major n*n
};

}  // namespace risfl
