#include "risfl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace risfl {

Matrix build_laplacian(const Graph& g) {
    const int n = g.node_count();
    Matrix l(n, n);
    for (int u = 0; u < n; ++u) {
        l(u, u) = g.degree(u);
        for (int v = 0; v < n; ++v)
            if (v != u && g.has_edge(u, v)) l(u, v) = -1.0;
    }
    return l;
}

Matrix normalized_laplacian(const Graph& g) {
    const int n = g.node_count();
    std::vector<double> inv_sqrt_deg(n);
    for (int u = 0; u < n; ++u) {
        const int d = g.degree(u);
        if (d == 0)
            throw std::invalid_argument("normalized_laplacian: node " + std::to_string(u) +
                                        " has degree 0");
        inv_sqrt_deg[u] = 1.0 / std::sqrt(static_cast<double>(d));
    }
    Matrix l = build_laplacian(g);
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = inv_sqrt_deg[i] * l(i, j) * inv_sqrt_deg[j];
    return out;
}

LaplacianSpectrum spectrum(const Matrix& laplacian) {
    if (laplacian.rows() != laplacian.cols())
        throw std::invalid_argument("spectrum: matrix must be square");
    const double asym = laplacian.max_asymmetry();
    if (asym > 1e-12)
        throw std::invalid_argument("spectrum: matrix is not symmetric (max |a_ij - a_ji| = " +
                                    std::to_string(asym) + ")");
    const auto eig = jacobi_eigen(laplacian);
    LaplacianSpectrum out;
    out.eigenvalues = eig.values;
    out.lambda_max = eig.values.back();
    out.lambda2 = eig.values.size() > 1 ? eig.values[1] : 0.0;
    return out;
}

LaplacianSpectrum graph_spectrum(const Graph& g) { return spectrum(build_laplacian(g)); }

LaplacianSpectrum normalized_graph_spectrum(const Graph& g) {
    return spectrum(normalized_laplacian(g));
}

EigenDecomposition laplacian_eigen(const Graph& g) { return jacobi_eigen(build_laplacian(g)); }

double tolerable_delay(double lambda_max) {
    if (lambda_max <= 0.0)
        throw std::domain_error(
            "tolerable_delay: lambda_max must be positive (graph disconnected or trivial)");
    return M_PI / (2.0 * lambda_max);
}

bool is_bipartite(const Graph& g) {
    const int n = g.node_count();
    std::vector<int> color(n, -1);
    std::vector<int> stack;
    for (int s = 0; s < n; ++s) {
        if (color[s] >= 0) continue;
        color[s] = 0;
        stack.push_back(s);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : g.neighbors(u)) {
                if (color[v] < 0) {
                    color[v] = color[u] ^ 1;
                    stack.push_back(v);
                } else if (color[v] == color[u]) {
                    return false;
                }
            }
        }
    }
    return true;
}

StructureReport structure_report(const Graph& g, int brute_force_cap) {
    const int n = g.node_count();
    StructureReport rep;
    rep.d_max = g.max_degree();
    rep.is_bipartite = is_bipartite(g);
    rep.has_odd_cycle = !rep.is_bipartite;
    rep.neighbor_structure.assign(n, NeighborStructure::kSingleton);
    for (int u = 0; u < n; ++u) {
        const auto nbrs = g.neighbors(u);
        for (std::size_t a = 0; a < nbrs.size() && rep.neighbor_structure[u] == NeighborStructure::kSingleton; ++a)
            for (std::size_t b = a + 1; b < nbrs.size(); ++b)
                if (g.has_edge(nbrs[a], nbrs[b])) {
                    rep.neighbor_structure[u] = NeighborStructure::kConnected;
                    break;
                }
    }
    if (n <= brute_force_cap && g.connected()) rep.conductance = conductance(g, brute_force_cap);
    return rep;
}

double conductance(const Graph& g, int brute_force_cap) {
    const int n = g.node_count();
    if (n > brute_force_cap)
        throw std::invalid_argument("conductance: node count " + std::to_string(n) +
                                    " exceeds brute-force cap " + std::to_string(brute_force_cap));
    if (!g.connected())
        throw std::invalid_argument("conductance: graph must be connected");
    if (n < 2) throw std::invalid_argument("conductance: need at least 2 nodes");

    const auto edges = g.edges();
    std::vector<int> degree(n);
    int total_volume = 0;
    for (int u = 0; u < n; ++u) {
        degree[u] = g.degree(u);
        total_volume += degree[u];
    }

    double best = std::numeric_limits<double>::infinity();
    // Subsets containing node 0 cover every bipartition once.
    const std::uint64_t limit = std::uint64_t{1} << (n - 1);
    for (std::uint64_t rest = 0; rest < limit; ++rest) {
        const std::uint64_t subset = (rest << 1) | 1;
        if (subset == (std::uint64_t{1} << n) - 1) continue;  // proper subset only
        int boundary = 0;
        for (const auto& [u, v] : edges) {
            const bool in_u = (subset >> u) & 1;
            const bool in_v = (subset >> v) & 1;
            if (in_u != in_v) ++boundary;
        }
        int vol = 0;
        for (int u = 0; u < n; ++u)
            if ((subset >> u) & 1) vol += degree[u];
        const int small_side = std::min(vol, total_volume - vol);
        best = std::min(best, static_cast<double>(boundary) / small_side);
    }
    return best;
}

CheegerBounds cheeger_bounds(const Graph& g, int brute_force_cap) {
    CheegerBounds out;
    out.phi = conductance(g, brute_force_cap);
    out.lambda2_normalized = normalized_graph_spectrum(g).lambda2;
    out.lower = out.lambda2_normalized / 2.0;
    out.upper = std::sqrt(2.0 * out.lambda2_normalized);
    return out;
}

}  // namespace risfl
