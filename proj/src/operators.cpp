#include "ctqw/operators.hpp"
#include "ctqw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ctqw {

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double x : a_) s += x * x;
    return std::sqrt(s);
}

double Matrix::max_abs_diff(const Matrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("matrix shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a_.size(); ++i)
        m = std::max(m, std::abs(a_[i] - other.a_[i]));
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

SymmetricMatrix laplacian(const WeightedGraph& g) {
    Matrix l(g.n, g.n);
    for (const auto& e : g.edges) {
        l.add_sym(e.u, e.v, e.w);
        l(e.u, e.u) -= e.w;
        l(e.v, e.v) -= e.w;
    }
    return l;
}

SymmetricMatrix search_hamiltonian(const WeightedGraph& g, double gamma, int marked) {
    if (marked < 0 || marked >= g.n)
        throw std::invalid_argument("marked vertex out of range");
    Matrix h(g.n, g.n);
    for (const auto& e : g.edges) {
        h.add_sym(e.u, e.v, -gamma * e.w);
        h(e.u, e.u) += gamma * e.w;
        h(e.v, e.v) += gamma * e.w;
    }
    h(marked, marked) -= 1.0;
    return h;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
    const int n = a.rows();
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
}

} // namespace

SpectralDecomposition eigendecompose(const SymmetricMatrix& m) {
    const int n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("eigendecompose: matrix not square");
    Matrix a = m;
    Matrix v = Matrix::identity(n);
    const double scale = a.frobenius_norm();
    const double tol = 1e-13 * scale;

    bool converged = (n < 2) || off_diagonal_norm(a) <= tol;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp - s * (akq + tau * akp);
                    a(p, k) = a(k, p);
                    a(k, q) = akq + s * (akp - tau * akq);
                    a(q, k) = a(k, q);
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp - s * (vkq + tau * vkp);
                    v(k, q) = vkq + s * (vkp - tau * vkq);
                }
            }
        }
        converged = off_diagonal_norm(a) <= tol;
    }
    if (!converged) throw NumericalError("jacobi eigensolver did not converge in 100 sweeps");

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i) < a(j, j); });

    SpectralDecomposition out;
    out.eigenvalues.resize(static_cast<size_t>(n));
    out.eigenvectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.eigenvalues[static_cast<size_t>(j)] = a(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);
        for (int i = 0; i < n; ++i)
            out.eigenvectors(i, j) = v(i, order[static_cast<size_t>(j)]);
    }
    return out;
}

State evolve_exact(const SpectralDecomposition& decomp, const State& state, double t) {
    const int n = decomp.eigenvectors.rows();
    if (static_cast<int>(state.size()) != n)
        throw std::invalid_argument("evolve_exact: state dimension mismatch");
    std::vector<std::complex<double>> coeff(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::complex<double> c = 0.0;
        for (int k = 0; k < n; ++k) c += decomp.eigenvectors(k, i) * state[static_cast<size_t>(k)];
        coeff[static_cast<size_t>(i)] =
            c * std::polar(1.0, -decomp.eigenvalues[static_cast<size_t>(i)] * t);
    }
    State out(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const std::complex<double> ci = coeff[static_cast<size_t>(i)];
        for (int k = 0; k < n; ++k) out[static_cast<size_t>(k)] += ci * decomp.eigenvectors(k, i);
    }
    return out;
}

double norm(const State& state) {
    double s = 0.0;
    for (const auto& z : state) s += std::norm(z);
    return std::sqrt(s);
}

std::complex<double> inner(const State& a, const State& b) {
    if (a.size() != b.size()) throw std::invalid_argument("inner: dimension mismatch");
    std::complex<double> s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

} // namespace ctqw
