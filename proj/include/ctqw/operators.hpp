#pragma once
#include <complex>
#include <vector>

#include "ctqw/graph.hpp"

namespace ctqw {

using State = std::vector<std::complex<double>>;

class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols),
          a_(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    // Writes both (i,j) and (j,i); builders of symmetric matrices use this.
    void set_sym(int i, int j, double v) {
        (*this)(i, j) = v;
        (*this)(j, i) = v;
    }
    void add_sym(int i, int j, double v) {
        (*this)(i, j) += v;
        if (i != j) (*this)(j, i) += v;
    }

    double frobenius_norm() const;
    double max_abs_diff(const Matrix& other) const;
    static Matrix identity(int n);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// Dense symmetric real matrix; symmetry is kept by the builders.
using SymmetricMatrix = Matrix;

// L = A - D: positive weights off the diagonal, minus the total incident
// weight on it. Row sums vanish.
SymmetricMatrix laplacian(const WeightedGraph& g);

// H = -gamma L - |marked><marked|
SymmetricMatrix search_hamiltonian(const WeightedGraph& g, double gamma, int marked);

struct SpectralDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // column i pairs with eigenvalues[i]
};

// Cyclic Jacobi rotations; converged when the off-diagonal Frobenius norm
// drops below 1e-13 times the matrix norm. Throws NumericalError after 100
// sweeps without convergence.
SpectralDecomposition eigendecompose(const SymmetricMatrix& m);

// Spectral propagator: sum_i e^{-i E_i t} |psi_i><psi_i| state.
State evolve_exact(const SpectralDecomposition& decomp, const State& state, double t);

double norm(const State& state);
std::complex<double> inner(const State& a, const State& b);  // conjugate-linear in a

} // namespace ctqw
