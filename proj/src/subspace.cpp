#include "ctqw/subspace.hpp"
#include "ctqw/connectivity.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ctqw {

namespace {

int labeled_height(const WeightedGraph& g) {
    if (!g.has_labels() || static_cast<int>(g.labels.size()) != g.n)
        throw std::invalid_argument("orbit basis needs a labeled tree");
    int r = 0;
    for (const auto& l : g.labels) {
        if (l.depth < 0) throw std::invalid_argument("orbit basis needs a labeled tree");
        r = std::max(r, l.depth);
    }
    return r;
}

// Canonical order: depth descending; within a depth the marked-path group
// first, then branch groups by descending divergence depth.
bool group_before(const VertexLabel& a, const VertexLabel& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    if ((a.diverge < 0) != (b.diverge < 0)) return a.diverge < 0;
    return a.diverge > b.diverge;
}

} // namespace

OrbitBasis standard_orbit_basis(const WeightedGraph& g) {
    const int r = labeled_height(g);
    std::map<std::pair<int, int>, std::vector<int>> buckets;
    for (int v = 0; v < g.n; ++v) {
        const auto& l = g.labels[static_cast<size_t>(v)];
        buckets[{l.depth, l.diverge}].push_back(v);
    }

    OrbitBasis basis;
    basis.n_full = g.n;
    for (auto& [key, members] : buckets) {
        OrbitGroup grp;
        grp.depth = key.first;
        grp.diverge = key.second;
        grp.size = static_cast<std::int64_t>(members.size());
        grp.members = std::move(members);
        grp.label = group_tag(VertexLabel{grp.depth, grp.diverge}, r);
        basis.groups.push_back(std::move(grp));
    }
    std::sort(basis.groups.begin(), basis.groups.end(), [](const OrbitGroup& a, const OrbitGroup& b) {
        return group_before(VertexLabel{a.depth, a.diverge}, VertexLabel{b.depth, b.diverge});
    });

    basis.group_of.assign(static_cast<size_t>(g.n), -1);
    for (int gi = 0; gi < static_cast<int>(basis.groups.size()); ++gi)
        for (int v : basis.groups[static_cast<size_t>(gi)].members)
            basis.group_of[static_cast<size_t>(v)] = gi;
    basis.marked_group = 0;
    if (basis.groups.empty() || basis.groups[0].depth != r || basis.groups[0].diverge != -1)
        throw std::invalid_argument("orbit basis: marked group missing");
    return basis;
}

Matrix ReducedSystem::hamiltonian(double gamma_value) const {
    Matrix h(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) h(i, j) = -gamma_value * laplacian_red(i, j);
    h(marked_index, marked_index) -= 1.0;
    return h;
}

State ReducedSystem::initial_state() const {
    State s(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) s[static_cast<size_t>(i)] = s_reduced[static_cast<size_t>(i)];
    return s;
}

ReducedSystem reduce_cayley(const CayleySpec& spec, double gamma) {
    spec.validate();
    const int r = spec.r, M = spec.M;
    const auto& w = spec.layer_weights;

    ReducedSystem rs;
    rs.height = r;
    rs.gamma = gamma;
    rs.n_full = spec.vertex_count();

    // Group list in canonical order plus an index map (depth, diverge) -> slot.
    std::map<std::pair<int, int>, int> slot;
    std::vector<std::pair<int, int>> keys;
    for (int d = r; d >= 0; --d) {
        keys.emplace_back(d, -1);
        for (int k = d - 1; k >= 0; --k) keys.emplace_back(d, k);
    }
    rs.dim = static_cast<int>(keys.size());
    for (int i = 0; i < rs.dim; ++i) slot[keys[static_cast<size_t>(i)]] = i;

    rs.group_sizes.resize(static_cast<size_t>(rs.dim));
    rs.labels.resize(static_cast<size_t>(rs.dim));
    for (int i = 0; i < rs.dim; ++i) {
        const auto [d, k] = keys[static_cast<size_t>(i)];
        std::int64_t size = 1;
        if (k >= 0) {
            size = M - 1;
            for (int step = 0; step < d - k - 1; ++step) size *= M;
        }
        rs.group_sizes[static_cast<size_t>(i)] = size;
        rs.labels[static_cast<size_t>(i)] = group_tag(VertexLabel{d, k}, r);
    }
    rs.marked_index = slot.at({r, -1});

    // Weighted degree is a function of depth only.
    const auto degree_at = [&](int d) {
        double deg = 0.0;
        if (d > 0) deg += w[static_cast<size_t>(d) - 1];
        if (d < r) deg += M * w[static_cast<size_t>(d)];
        return deg;
    };

    Matrix l(rs.dim, rs.dim);
    for (int i = 0; i < rs.dim; ++i)
        l(i, i) = -degree_at(keys[static_cast<size_t>(i)].first);
    const double root_m1 = std::sqrt(static_cast<double>(M - 1));
    const double root_m = std::sqrt(static_cast<double>(M));
    for (int d = 0; d < r; ++d) {
        const double wd = w[static_cast<size_t>(d)];
        // marked path link
        l.set_sym(slot.at({d, -1}), slot.at({d + 1, -1}), wd);
        // path vertex to the branch group splitting off right below it
        l.set_sym(slot.at({d, -1}), slot.at({d + 1, d}), root_m1 * wd);
        // branch groups deepen with a sqrt(M) fan-out factor
        for (int k = 0; k < d; ++k)
            l.set_sym(slot.at({d, k}), slot.at({d + 1, k}), root_m * wd);
    }
    rs.laplacian_red = std::move(l);
    rs.h_eff = rs.hamiltonian(gamma);

    rs.s_reduced.resize(static_cast<size_t>(rs.dim));
    for (int i = 0; i < rs.dim; ++i)
        rs.s_reduced[static_cast<size_t>(i)] = std::sqrt(
            static_cast<double>(rs.group_sizes[static_cast<size_t>(i)]) / static_cast<double>(rs.n_full));
    return rs;
}

double verify_closure(const WeightedGraph& g, double gamma, int marked,
                      const OrbitBasis& basis) {
    const SparseHamiltonian h = SparseHamiltonian::build(g, gamma, marked);
    const int dim = static_cast<int>(basis.groups.size());
    std::vector<double> inv_sqrt(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i)
        inv_sqrt[static_cast<size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(basis.groups[static_cast<size_t>(i)].size));

    long double total = 0.0L;
    std::vector<double> y(static_cast<size_t>(g.n));
    std::vector<long double> coeff(static_cast<size_t>(dim));
    for (int gi = 0; gi < dim; ++gi) {
        std::fill(y.begin(), y.end(), 0.0);
        // y = H p_g, exploiting that p_g is sparse on the group members.
        for (int v : basis.groups[static_cast<size_t>(gi)].members) {
            const double x = inv_sqrt[static_cast<size_t>(gi)];
            for (int k = h.row_ptr[static_cast<size_t>(v)]; k < h.row_ptr[static_cast<size_t>(v) + 1]; ++k)
                y[static_cast<size_t>(h.col[static_cast<size_t>(k)])] += h.val[static_cast<size_t>(k)] * x;
        }
        std::fill(coeff.begin(), coeff.end(), 0.0L);
        for (int v = 0; v < g.n; ++v)
            coeff[static_cast<size_t>(basis.group_of[static_cast<size_t>(v)])] +=
                static_cast<long double>(y[static_cast<size_t>(v)]) * inv_sqrt[static_cast<size_t>(basis.group_of[static_cast<size_t>(v)])];
        for (int v = 0; v < g.n; ++v) {
            const int gv = basis.group_of[static_cast<size_t>(v)];
            const long double res = static_cast<long double>(y[static_cast<size_t>(v)]) -
                                    coeff[static_cast<size_t>(gv)] * inv_sqrt[static_cast<size_t>(gv)];
            total += res * res;
        }
    }
    return static_cast<double>(std::sqrt(total));
}

ReducedSystem orbit_reduce(const WeightedGraph& g, double gamma, int marked) {
    if (marked < 0 || marked >= g.n)
        throw std::invalid_argument("orbit_reduce: marked vertex out of range");
    const OrbitBasis basis = standard_orbit_basis(g);
    if (basis.groups[0].members != std::vector<int>{marked})
        throw std::invalid_argument("orbit_reduce: marked vertex is not the marked-path leaf");

    const double residual = verify_closure(g, gamma, marked, basis);
    const SparseHamiltonian h = SparseHamiltonian::build(g, gamma, marked);
    if (residual > 1e-8 * std::max(1.0, h.frobenius_norm()))
        throw ClosureError(residual);

    // Pristine layered trees take the closed form, so a rebuilt or untouched
    // copy of a tree reduces to bit-identical numbers.
    if (const auto spec = as_cayley_spec(g)) {
        ReducedSystem rs = reduce_cayley(*spec, gamma);
        rs.closure_residual = residual;
        return rs;
    }

    const int dim = static_cast<int>(basis.groups.size());
    ReducedSystem rs;
    rs.dim = dim;
    rs.n_full = g.n;
    rs.height = basis.groups[0].depth;
    rs.gamma = gamma;
    rs.marked_index = basis.marked_group;
    rs.closure_residual = residual;
    rs.group_sizes.resize(static_cast<size_t>(dim));
    rs.labels.resize(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        rs.group_sizes[static_cast<size_t>(i)] = basis.groups[static_cast<size_t>(i)].size;
        rs.labels[static_cast<size_t>(i)] = basis.groups[static_cast<size_t>(i)].label;
    }

    Matrix l(dim, dim);
    for (const auto& e : g.edges) {
        const int gu = basis.group_of[static_cast<size_t>(e.u)];
        const int gv = basis.group_of[static_cast<size_t>(e.v)];
        const double su = static_cast<double>(rs.group_sizes[static_cast<size_t>(gu)]);
        const double sv = static_cast<double>(rs.group_sizes[static_cast<size_t>(gv)]);
        if (gu == gv)
            l(gu, gu) += 2.0 * e.w / su;
        else
            l.add_sym(gu, gv, e.w / std::sqrt(su * sv));
        l(gu, gu) -= e.w / su;
        l(gv, gv) -= e.w / sv;
    }
    rs.laplacian_red = std::move(l);
    rs.h_eff = rs.hamiltonian(gamma);

    rs.s_reduced.resize(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i)
        rs.s_reduced[static_cast<size_t>(i)] =
            std::sqrt(static_cast<double>(rs.group_sizes[static_cast<size_t>(i)]) / static_cast<double>(g.n));
    return rs;
}

State lift(const OrbitBasis& basis, const State& reduced) {
    if (reduced.size() != basis.groups.size())
        throw std::invalid_argument("lift: dimension mismatch");
    State full(static_cast<size_t>(basis.n_full), 0.0);
    for (size_t gi = 0; gi < basis.groups.size(); ++gi) {
        const auto& grp = basis.groups[gi];
        const std::complex<double> amp = reduced[gi] / std::sqrt(static_cast<double>(grp.size));
        for (int v : grp.members) full[static_cast<size_t>(v)] = amp;
    }
    return full;
}

} // namespace ctqw
