#pragma once
#include <stdexcept>
#include <string>

namespace ctqw {

// Validation failures throw std::invalid_argument; failures of the numerics
// themselves (non-convergence, step underflow, missing crossing) throw this.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a graph no longer closes over the symmetry-group basis and the
// caller has to evolve in the full vertex space instead.
struct ClosureError : std::runtime_error {
    double residual;
    explicit ClosureError(double res)
        : std::runtime_error("invariant-subspace closure failed, residual " + std::to_string(res)),
          residual(res) {}
};

} // namespace ctqw
