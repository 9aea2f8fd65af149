#pragma once

#include <optional>
#include <vector>

#include "risfl/graph.hpp"
#include "risfl/linalg.hpp"

namespace risfl {

// Eigenvalues of a graph Laplacian in ascending order. lambda2 (algebraic
// connectivity) is positive iff the graph is connected; lambda_max bounds the
// tolerable transmission delay.
struct LaplacianSpectrum {
    std::vector<double> eigenvalues;
    double lambda2 = 0.0;
    double lambda_max = 0.0;
};

// L = D - A.
Matrix build_laplacian(const Graph& g);

// D^(-1/2) L D^(-1/2); requires minimum degree >= 1.
Matrix normalized_laplacian(const Graph& g);

// Symmetric eigensolve via cyclic Jacobi. Rejects matrices whose asymmetry
// exceeds 1e-12.
LaplacianSpectrum spectrum(const Matrix& laplacian);

LaplacianSpectrum graph_spectrum(const Graph& g);
LaplacianSpectrum normalized_graph_spectrum(const Graph& g);

// Full decomposition of L; the eigenvector of lambda_max seeds worst-case
// initial conditions in the consensus tests.
EigenDecomposition laplacian_eigen(const Graph& g);

// pi / (2 * lambda_max): the delay below which the delayed aggregation
// protocol converges. Rejects lambda_max <= 0 (disconnected or single node)
// instead of returning infinity.
double tolerable_delay(double lambda_max);

enum class NeighborStructure {
    kSingleton,  // no edge between any two neighbors
    kConnected,  // at least one edge between two neighbors
};

struct StructureReport {
    int d_max = 0;
    bool is_bipartite = false;
    bool has_odd_cycle = false;
    std::vector<NeighborStructure> neighbor_structure;
    // Populated only for connected graphs within the brute-force cap.
    std::optional<double> conductance;
};

bool is_bipartite(const Graph& g);

StructureReport structure_report(const Graph& g, int brute_force_cap = 16);

// Phi(G) = min over nonempty proper subsets V of |boundary(V)| /
// min(vol(V), vol(V^c)), vol summing vertex degrees. Exact enumeration over
// subsets containing node 0 (V and its complement share a boundary).
// Requires a connected graph within the cap.
double conductance(const Graph& g, int brute_force_cap = 16);

struct CheegerBounds {
    double lower = 0.0;   // lambda2(normalized) / 2
    double phi = 0.0;     // conductance
    double upper = 0.0;   // sqrt(2 * lambda2(normalized))
    double lambda2_normalized = 0.0;
};

// Cheeger sandwich with the degree-normalized Laplacian, which is the form
// consistent with volume-normalized conductance (the raw-lambda2 form fails
// already on C8: 0.2929 > 0.25).
CheegerBounds cheeger_bounds(const Graph& g, int brute_force_cap = 16);

}  // namespace risfl
