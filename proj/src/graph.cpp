#include "risfl/graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace risfl {

Graph::Graph(int node_count) : n_(node_count) {
    if (node_count <= 0) throw std::invalid_argument("Graph: node_count must be positive");
    adj_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

void Graph::check_node(int u) const {
    if (u < 0 || u >= n_) {
        throw std::out_of_range("Graph: node id " + std::to_string(u) + " outside 0.." +
                                std::to_string(n_ - 1));
    }
}

Graph Graph::from_edges(int node_count, const std::vector<Edge>& edges) {
    Graph g(node_count);
    for (const auto& [u, v] : edges) g.add_edge(u, v);
    return g;
}

Graph Graph::from_adjacency(const std::vector<std::vector<int>>& rows) {
    const int n = static_cast<int>(rows.size());
    Graph g(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw std::invalid_argument("Graph: adjacency rows must be square");
        for (int j = 0; j < n; ++j) {
            const int a = rows[i][j];
            if (a != 0 && a != 1) throw std::invalid_argument("Graph: adjacency entries must be 0/1");
            if (i == j && a != 0) throw std::invalid_argument("Graph: diagonal must be zero");
            if (a != rows[j][i]) throw std::invalid_argument("Graph: adjacency must be symmetric");
            if (i < j && a == 1) g.add_edge(i, j);
        }
    }
    return g;
}

Graph Graph::path(int n) {
    Graph g(n);
    for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

Graph Graph::cycle(int n) {
    if (n < 3) throw std::invalid_argument("Graph::cycle: need at least 3 nodes");
    Graph g = path(n);
    g.add_edge(0, n - 1);
    return g;
}

Graph Graph::complete(int n) {
    Graph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
    return g;
}

Graph Graph::star(int n) {
    if (n < 2) throw std::invalid_argument("Graph::star: need at least 2 nodes");
    Graph g(n);
    for (int i = 1; i < n; ++i) g.add_edge(0, i);
    return g;
}

Graph Graph::complete_bipartite(int a, int b) {
    Graph g(a + b);
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) g.add_edge(i, a + j);
    return g;
}

Graph Graph::fig3a_initial() {
    return from_edges(8, {{0, 1}, {0, 2}, {0, 4}, {0, 7}, {1, 2}, {2, 3}, {3, 4}, {3, 7},
                          {4, 5}, {5, 6}, {6, 7}});
}

Graph Graph::fig3b_revised() {
    Graph g = cycle(8);
    for (int i = 0; i < 4; ++i) g.add_edge(i, i + 4);
    return g;
}

bool Graph::has_edge(int u, int v) const {
    check_node(u);
    check_node(v);
    return adj_[static_cast<std::size_t>(u) * n_ + v] != 0;
}

void Graph::add_edge(int u, int v) {
    check_node(u);
    check_node(v);
    if (u == v) throw std::invalid_argument("Graph: self-loops are not allowed");
    adj_[static_cast<std::size_t>(u) * n_ + v] = 1;
    adj_[static_cast<std::size_t>(v) * n_ + u] = 1;
}

void Graph::remove_edge(int u, int v) {
    check_node(u);
    check_node(v);
    adj_[static_cast<std::size_t>(u) * n_ + v] = 0;
    adj_[static_cast<std::size_t>(v) * n_ + u] = 0;
}

Graph Graph::with_edge(int u, int v) const {
    Graph g = *this;
    g.add_edge(u, v);
    return g;
}

Graph Graph::without_edge(int u, int v) const {
    Graph g = *this;
    g.remove_edge(u, v);
    return g;
}

int Graph::degree(int u) const {
    check_node(u);
    int d = 0;
    for (int v = 0; v < n_; ++v) d += adj_[static_cast<std::size_t>(u) * n_ + v];
    return d;
}

int Graph::max_degree() const {
    int d = 0;
    for (int u = 0; u < n_; ++u) d = std::max(d, degree(u));
    return d;
}

int Graph::edge_count() const {
    int c = 0;
    for (int u = 0; u < n_; ++u)
        for (int v = u + 1; v < n_; ++v) c += adj_[static_cast<std::size_t>(u) * n_ + v];
    return c;
}

std::vector<int> Graph::neighbors(int u) const {
    check_node(u);
    std::vector<int> out;
    for (int v = 0; v < n_; ++v)
        if (adj_[static_cast<std::size_t>(u) * n_ + v]) out.push_back(v);
    return out;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    for (int u = 0; u < n_; ++u)
        for (int v = u + 1; v < n_; ++v)
            if (adj_[static_cast<std::size_t>(u) * n_ + v]) out.emplace_back(u, v);
    return out;
}

std::vector<Edge> Graph::non_edges() const {
    std::vector<Edge> out;
    for (int u = 0; u < n_; ++u)
        for (int v = u + 1; v < n_; ++v)
            if (!adj_[static_cast<std::size_t>(u) * n_ + v]) out.emplace_back(u, v);
    return out;
}

bool Graph::connected() const {
    const auto dist = bfs_distances(0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

std::vector<int> Graph::bfs_distances(int src) const {
    check_node(src);
    std::vector<int> dist(n_, -1);
    std::deque<int> queue{src};
    dist[src] = 0;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v = 0; v < n_; ++v) {
            if (adj_[static_cast<std::size_t>(u) * n_ + v] && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

std::string Graph::to_edge_list() const {
    std::ostringstream out;
    out << "n " << n_ << "\n";
    for (const auto& [u, v] : edges()) out << u << " " << v << "\n";
    return out.str();
}

Graph Graph::from_edge_list(std::istream& in) {
    int n = -1;
    std::vector<Edge> edges;
    int max_id = -1;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank line
        if (first == "#") continue;
        if (first == "n") {
            if (!(ls >> n) || n <= 0) throw std::invalid_argument("edge list: bad node count line");
            continue;
        }
        int u = 0, v = 0;
        try {
            u = std::stoi(first);
        } catch (const std::exception&) {
            throw std::invalid_argument("edge list: bad line '" + line + "'");
        }
        if (!(ls >> v)) throw std::invalid_argument("edge list: bad line '" + line + "'");
        edges.emplace_back(u, v);
        max_id = std::max({max_id, u, v});
    }
    if (n < 0) n = max_id + 1;
    if (n <= 0) throw std::invalid_argument("edge list: empty input");
    return from_edges(n, edges);
}

Graph Graph::from_edge_list(const std::string& text) {
    std::istringstream in(text);
    return from_edge_list(in);
}

std::string Graph::to_adjacency_csv() const {
    std::ostringstream out;
    for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) {
            if (j) out << ",";
            out << int(adj_[static_cast<std::size_t>(i) * n_ + j]);
        }
        out << "\n";
    }
    return out.str();
}

Graph Graph::from_adjacency_csv(std::istream& in) {
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<int> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stoi(cell));
        rows.push_back(std::move(row));
    }
    return from_adjacency(rows);
}

}  // namespace risfl
