#pragma once
#include <vector>

#include "ctqw/graph.hpp"
#include "ctqw/operators.hpp"

namespace ctqw {

// CSR form of H = -gamma L - |marked><marked| for full-space propagation.
// marked = -1 drops the projector and leaves the bare -gamma L walk.
struct SparseHamiltonian {
    int n = 0;
    std::vector<int> row_ptr;  // n + 1
    std::vector<int> col;
    std::vector<double> val;

    static SparseHamiltonian build(const WeightedGraph& g, double gamma, int marked);

    void apply(const State& x, State& y) const;         // OpenMP over rows
    void apply_serial(const State& x, State& y) const;  // reference kernel

    double gershgorin_bound() const;  // upper bound on the spectral radius
    double frobenius_norm() const;
};

// Short-step Lanczos propagator for e^{-iHt}. The Krylov dimension grows
// adaptively per step up to max_dim; the step halves when the subspace cannot
// reach the local error budget. Throws NumericalError on step underflow.
State evolve_krylov(const SparseHamiltonian& h, const State& state, double t,
                    double tol = 1e-8, int max_dim = 30);

} // namespace ctqw
