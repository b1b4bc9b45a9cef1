#pragma once
#include <optional>

#include "ctqw/graph.hpp"

namespace ctqw {

struct ConnectivityReport {
    int vertex_conn = 0;
    double edge_conn = 0.0;            // weighted global min cut
    double algebraic = 0.0;            // second-smallest eigenvalue of D - A
    double normalized_algebraic = 0.0; // of I - D^{-1/2} A D^{-1/2}
    double average_unit = 0.0;         // mean pairwise max-flow, unit capacities
    double average_weighted = 0.0;     // capacities equal to the edge weights
};

// Throws std::invalid_argument on disconnected input. Trees take exact
// shortcuts; layered trees additionally solve the spectral measures through
// the per-level symmetry sectors, so size is no obstacle for them.
ConnectivityReport connectivity_report(const WeightedGraph& g);

bool is_connected(const WeightedGraph& g);
bool is_tree(const WeightedGraph& g);

// Reconstructs the tree parameters from a labeled, unperturbed layered tree.
std::optional<CayleySpec> as_cayley_spec(const WeightedGraph& g);

// Spectral connectivity of a layered tree via its symmetry sectors: the
// level-uniform block plus one difference block per divergence depth. Exact
// and O(r^3) regardless of the vertex count.
double cayley_algebraic_connectivity(const CayleySpec& spec);
double cayley_normalized_algebraic_connectivity(const CayleySpec& spec);

// Pairwise-max-flow mean; the serial variant is the reference for tests.
double average_connectivity(const WeightedGraph& g, bool weighted);
double average_connectivity_serial(const WeightedGraph& g, bool weighted);

int vertex_connectivity(const WeightedGraph& g);
double edge_connectivity(const WeightedGraph& g);

} // namespace ctqw
