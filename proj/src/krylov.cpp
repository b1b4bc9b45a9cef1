#include "ctqw/krylov.hpp"
#include "ctqw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctqw {

SparseHamiltonian SparseHamiltonian::build(const WeightedGraph& g, double gamma, int marked) {
    if (marked >= g.n)
        throw std::invalid_argument("marked vertex out of range");
    SparseHamiltonian h;
    h.n = g.n;
    std::vector<int> count(static_cast<size_t>(g.n), 1);  // one diagonal slot per row
    for (const auto& e : g.edges) {
        ++count[static_cast<size_t>(e.u)];
        ++count[static_cast<size_t>(e.v)];
    }
    h.row_ptr.assign(static_cast<size_t>(g.n) + 1, 0);
    for (int i = 0; i < g.n; ++i)
        h.row_ptr[static_cast<size_t>(i) + 1] = h.row_ptr[static_cast<size_t>(i)] + count[static_cast<size_t>(i)];
    h.col.resize(static_cast<size_t>(h.row_ptr.back()));
    h.val.resize(static_cast<size_t>(h.row_ptr.back()));

    std::vector<int> cursor(h.row_ptr.begin(), h.row_ptr.end() - 1);
    std::vector<double> diag(static_cast<size_t>(g.n), 0.0);
    // Reserve the first slot of each row for the diagonal entry.
    for (int i = 0; i < g.n; ++i) ++cursor[static_cast<size_t>(i)];
    for (const auto& e : g.edges) {
        diag[static_cast<size_t>(e.u)] += gamma * e.w;
        diag[static_cast<size_t>(e.v)] += gamma * e.w;
        h.col[static_cast<size_t>(cursor[static_cast<size_t>(e.u)])] = e.v;
        h.val[static_cast<size_t>(cursor[static_cast<size_t>(e.u)]++)] = -gamma * e.w;
        h.col[static_cast<size_t>(cursor[static_cast<size_t>(e.v)])] = e.u;
        h.val[static_cast<size_t>(cursor[static_cast<size_t>(e.v)]++)] = -gamma * e.w;
    }
    if (marked >= 0) diag[static_cast<size_t>(marked)] -= 1.0;
    for (int i = 0; i < g.n; ++i) {
        h.col[static_cast<size_t>(h.row_ptr[static_cast<size_t>(i)])] = i;
        h.val[static_cast<size_t>(h.row_ptr[static_cast<size_t>(i)])] = diag[static_cast<size_t>(i)];
    }
    return h;
}

void SparseHamiltonian::apply_serial(const State& x, State& y) const {
    y.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::complex<double> s = 0.0;
        for (int k = row_ptr[static_cast<size_t>(i)]; k < row_ptr[static_cast<size_t>(i) + 1]; ++k)
            s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
        y[static_cast<size_t>(i)] = s;
    }
}

void SparseHamiltonian::apply(const State& x, State& y) const {
    y.resize(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        std::complex<double> s = 0.0;
        for (int k = row_ptr[static_cast<size_t>(i)]; k < row_ptr[static_cast<size_t>(i) + 1]; ++k)
            s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
        y[static_cast<size_t>(i)] = s;
    }
}

double SparseHamiltonian::gershgorin_bound() const {
    double bound = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int k = row_ptr[static_cast<size_t>(i)]; k < row_ptr[static_cast<size_t>(i) + 1]; ++k)
            row += std::abs(val[static_cast<size_t>(k)]);
        bound = std::max(bound, row);
    }
    return bound;
}

double SparseHamiltonian::frobenius_norm() const {
    double s = 0.0;
    for (double x : val) s += x * x;
    return std::sqrt(s);
}

namespace {

// exp(-i T dt) e1 * amp for the symmetric tridiagonal (alpha, beta) block of
// size m, via its dense eigendecomposition (w, q passed in).
void tridiag_exp_column(const SpectralDecomposition& eig, int m, double dt, double amp,
                        std::vector<std::complex<double>>& u) {
    u.assign(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        const std::complex<double> phase =
            std::polar(amp * eig.eigenvectors(0, i), -eig.eigenvalues[static_cast<size_t>(i)] * dt);
        for (int k = 0; k < m; ++k)
            u[static_cast<size_t>(k)] += phase * eig.eigenvectors(k, i);
    }
}

} // namespace

State evolve_krylov(const SparseHamiltonian& h, const State& state, double t,
                    double tol, int max_dim) {
    if (static_cast<int>(state.size()) != h.n)
        throw std::invalid_argument("evolve_krylov: state dimension mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("evolve_krylov: tol must be positive");
    if (t < 0.0) throw std::invalid_argument("evolve_krylov: time must be nonnegative");
    if (t == 0.0 || h.n == 0) return state;

    const int n = h.n;
    const int m_max = std::max(2, std::min(max_dim, n));
    const double h_bound = std::max(h.gershgorin_bound(), 1e-30);

    State psi = state;
    double t_done = 0.0;
    double dt = std::min(t, 0.5 * m_max / h_bound);
    const double dt_floor = t * 1e-14;

    std::vector<State> basis;
    std::vector<double> alpha, beta;
    State w(static_cast<size_t>(n));
    std::vector<std::complex<double>> u;

    const auto budget = [&](double step) { return 0.25 * tol * std::max(step / t, 1e-6); };

    while (t_done < t) {
        dt = std::min(dt, t - t_done);

        const double amp = norm(psi);
        if (amp == 0.0) return psi;
        basis.clear();
        alpha.clear();
        beta.clear();
        basis.push_back(psi);
        for (auto& z : basis[0]) z /= amp;

        int m = 0;
        bool breakdown = false;
        bool accepted = false;
        SpectralDecomposition eig;
        while (m < m_max) {
            const int j = m;
            h.apply(basis[static_cast<size_t>(j)], w);
            if (j > 0) {
                const double b = beta[static_cast<size_t>(j) - 1];
                for (int i = 0; i < n; ++i)
                    w[static_cast<size_t>(i)] -= b * basis[static_cast<size_t>(j) - 1][static_cast<size_t>(i)];
            }
            const double a = std::real(inner(basis[static_cast<size_t>(j)], w));
            for (int i = 0; i < n; ++i)
                w[static_cast<size_t>(i)] -= a * basis[static_cast<size_t>(j)][static_cast<size_t>(i)];
            alpha.push_back(a);
            const double b = norm(w);
            m = j + 1;
            if (b <= 1e-13 * h_bound)
                breakdown = true;  // subspace is exactly invariant
            else
                beta.push_back(b);

            // Convergence checkpoints let the subspace stay small when the
            // step is short.
            if (breakdown || m == m_max || (m >= 8 && m % 4 == 0)) {
                Matrix tri(m, m);
                for (int i = 0; i < m; ++i) {
                    tri(i, i) = alpha[static_cast<size_t>(i)];
                    if (i + 1 < m) tri.set_sym(i, i + 1, beta[static_cast<size_t>(i)]);
                }
                eig = eigendecompose(tri);
                tridiag_exp_column(eig, m, dt, amp, u);
                const double err =
                    breakdown ? 0.0 : beta[static_cast<size_t>(m) - 1] * std::abs(u[static_cast<size_t>(m) - 1]);
                if (err <= budget(dt)) {
                    accepted = true;
                    break;
                }
            }
            if (breakdown) break;
            if (m < m_max) {
                basis.push_back(w);
                for (auto& z : basis.back()) z /= b;
            }
        }

        if (!accepted) {
            // Full subspace was not enough: halve the step, reusing its
            // eigendecomposition.
            const double beta_tail = beta[static_cast<size_t>(m) - 1];
            for (;;) {
                dt *= 0.5;
                if (dt < dt_floor)
                    throw NumericalError("evolve_krylov: time step underflow");
                tridiag_exp_column(eig, m, dt, amp, u);
                if (beta_tail * std::abs(u[static_cast<size_t>(m) - 1]) <= budget(dt)) break;
            }
        }

        std::fill(psi.begin(), psi.end(), std::complex<double>(0.0));
        for (int k = 0; k < m; ++k) {
            const std::complex<double> uk = u[static_cast<size_t>(k)];
            const State& vk = basis[static_cast<size_t>(k)];
            for (int i = 0; i < n; ++i) psi[static_cast<size_t>(i)] += uk * vk[static_cast<size_t>(i)];
        }
        t_done += dt;
        dt *= 1.35;  // cautious regrowth after an accepted step
    }
    return psi;
}

} // namespace ctqw
