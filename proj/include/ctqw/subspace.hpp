#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "ctqw/graph.hpp"
#include "ctqw/operators.hpp"

namespace ctqw {

// One symmetry group of identically evolving vertices. The basis state is the
// uniform superposition over `members` with coefficient 1/sqrt(size).
struct OrbitGroup {
    int depth = 0;
    int diverge = -1;           // -1: on the marked path
    std::int64_t size = 0;
    std::vector<int> members;   // empty for analytically built systems
    std::string label;
};

struct OrbitBasis {
    std::vector<OrbitGroup> groups;  // canonical order, marked group first
    int n_full = 0;
    int marked_group = 0;
    std::vector<int> group_of;       // vertex -> group index
};

// Groups a labeled tree into the canonical orbit basis: depth descending,
// marked-path vertex ahead of the branch groups of its layer.
OrbitBasis standard_orbit_basis(const WeightedGraph& g);

// The walk restricted to the orbit basis. The Laplacian block is gamma-free;
// hamiltonian(gamma) = -gamma * L_red - |marked><marked|.
struct ReducedSystem {
    int dim = 0;
    std::int64_t n_full = 0;
    int height = 0;
    double gamma = 1.0;
    Matrix laplacian_red;
    Matrix h_eff;                       // hamiltonian(gamma)
    std::vector<double> s_reduced;      // embedding of the uniform state
    std::vector<std::int64_t> group_sizes;
    std::vector<std::string> labels;
    int marked_index = 0;
    double closure_residual = 0.0;  // 0 for closed-form reductions

    Matrix hamiltonian(double gamma_value) const;
    State initial_state() const;        // s_reduced as a complex state
};

// Closed-form reduction from the tree parameters alone; never materializes
// the vertex space, so arbitrarily large trees are fine.
ReducedSystem reduce_cayley(const CayleySpec& spec, double gamma);

// Reduction of a concrete labeled tree. Verifies closure against the full
// Hamiltonian and throws ClosureError when the residual exceeds
// 1e-8 * max(1, ||H||_F); callers then fall back to full-space evolution.
ReducedSystem orbit_reduce(const WeightedGraph& g, double gamma, int marked);

// Frobenius norm of (I - P) H P over the whole vertex space.
double verify_closure(const WeightedGraph& g, double gamma, int marked,
                      const OrbitBasis& basis);

// Expands a reduced state back to the vertex space; preserves the norm.
State lift(const OrbitBasis& basis, const State& reduced);

} // namespace ctqw
