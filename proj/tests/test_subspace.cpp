#include <doctest.h>

#include "ctqw/errors.hpp"
#include "ctqw/graph.hpp"
#include "ctqw/krylov.hpp"
#include "ctqw/operators.hpp"
#include "ctqw/subspace.hpp"

#include <cmath>
#include <random>

using namespace ctqw;

namespace {

// The six-state block of the height-2 tree written out longhand, in the
// canonical order marked, branch1:2, branch0:2, path1, branch0:1, path0.
// This is the fixture the reduction has to reproduce entrywise.
Matrix expected_height2(double m, double omega, double gamma) {
    const double m1 = std::sqrt(m - 1.0), mm = std::sqrt(m);
    const double block[6][6] = {
        {-1.0 + 1.0 / gamma, 0, 0, 1, 0, 0},
        {0, -1, 0, m1, 0, 0},
        {0, 0, -1, 0, mm, 0},
        {1, m1, 0, -m - omega, 0, omega},
        {0, 0, mm, 0, -m - omega, omega * m1},
        {0, 0, 0, omega, omega * m1, -omega * m}};
    Matrix h(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) h(i, j) = -gamma * block[i][j];
    return h;
}

} // namespace

TEST_SUITE("subspace") {

TEST_CASE("height-2 reduction reproduces the six-state block exactly") {
    for (int m : {4, 100}) {
        const ReducedSystem rs = reduce_cayley(CayleySpec::uniform(2, m), 1.0);
        REQUIRE(rs.dim == 6);
        CHECK(rs.h_eff.max_abs_diff(expected_height2(m, 1.0, 1.0)) <= 1e-12);
    }
    // top layer reweighed to the branching factor
    const ReducedSystem rw = reduce_cayley(CayleySpec{2, 100, {100.0, 1.0}}, 1.0);
    CHECK(rw.h_eff.max_abs_diff(expected_height2(100, 100.0, 1.0)) <= 1e-12);
    // a second jumping rate exercises the gamma folding
    const ReducedSystem r2 = reduce_cayley(CayleySpec::uniform(2, 4), 2.0);
    CHECK(r2.h_eff.max_abs_diff(expected_height2(4, 1.0, 2.0)) <= 1e-12);
}

TEST_CASE("canonical labels and sizes of the height-2 basis") {
    const ReducedSystem rs = reduce_cayley(CayleySpec::uniform(2, 4), 1.0);
    CHECK(rs.labels == std::vector<std::string>{"marked", "branch1:2", "branch0:2", "path1",
                                                "branch0:1", "path0"});
    CHECK(rs.group_sizes == std::vector<std::int64_t>{1, 3, 12, 1, 3, 1});
    CHECK(rs.marked_index == 0);
}

TEST_CASE("dimension formula across heights") {
    for (int r = 1; r <= 6; ++r)
        for (int m : {2, 3, 4, 10}) {
            const ReducedSystem rs = reduce_cayley(CayleySpec::uniform(r, m), 1.0);
            CHECK(rs.dim == (r + 1) * (r + 2) / 2);
            std::int64_t total = 0;
            for (auto s : rs.group_sizes) total += s;
            CHECK(total == rs.n_full);
        }
    CHECK(reduce_cayley(CayleySpec::uniform(1, 2), 1.0).dim == 3);
    CHECK(reduce_cayley(CayleySpec::geometric(15, 2, 3.0), 1.0).dim == 136);
}

TEST_CASE("uniform state embeds with unit norm") {
    const ReducedSystem rs = reduce_cayley(CayleySpec::uniform(3, 3), 1.0);
    double total = 0.0;
    for (double c : rs.s_reduced) total += c * c;
    CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("graph reduction equals the closed form") {
    for (const CayleySpec& spec : {CayleySpec::uniform(2, 4), CayleySpec::uniform(3, 3),
                                   CayleySpec{2, 10, {10.0, 1.0}}, CayleySpec::geometric(4, 2, 3.0)}) {
        const WeightedGraph g = build_cayley(spec);
        const ReducedSystem from_graph = orbit_reduce(g, 1.0, g.marked);
        const ReducedSystem analytic = reduce_cayley(spec, 1.0);
        CHECK(from_graph.h_eff.max_abs_diff(analytic.h_eff) <= 1e-10);
        CHECK(from_graph.labels == analytic.labels);
        CHECK(from_graph.group_sizes == analytic.group_sizes);
    }
}

TEST_CASE("closure holds on intact trees and reports the residual") {
    const WeightedGraph g4 = build_cayley(CayleySpec::uniform(2, 4));
    CHECK(verify_closure(g4, 1.0, g4.marked, standard_orbit_basis(g4)) < 1e-12);
    const WeightedGraph g100 = build_cayley(CayleySpec::uniform(2, 100));
    CHECK(verify_closure(g100, 1.0, g100.marked, standard_orbit_basis(g100)) < 1e-12);
    CHECK(verify_closure(g4, 0.0, g4.marked, standard_orbit_basis(g4)) < 1e-12);
}

TEST_CASE("a large geometric tree still reduces: residual is small next to the matrix") {
    // weights reach 3^14 here, so the rounding floor scales with the norm
    const WeightedGraph g = build_cayley(CayleySpec::geometric(15, 2, 3.0));
    const ReducedSystem rs = orbit_reduce(g, 1.5, g.marked);
    CHECK(rs.dim == 136);
    const double scale = SparseHamiltonian::build(g, 1.5, g.marked).frobenius_norm();
    CHECK(rs.closure_residual < 1e-12 * scale);
}

TEST_CASE("one reweighed edge breaks closure and gets detected") {
    const WeightedGraph g = build_cayley(CayleySpec::uniform(2, 4));
    const Edge ce = find_group_edge(g, "branch0:2", "branch0:1");
    const WeightedGraph p = perturb(g, ReweighEdge{ce.u, ce.v, 10.0});
    CHECK(verify_closure(p, 1.0, p.marked, standard_orbit_basis(p)) > 1e-3);
    CHECK_THROWS_AS(orbit_reduce(p, 1.0, p.marked), ClosureError);
    const WeightedGraph noisy = add_gaussian_noise(g, 0.1, 5);
    CHECK_THROWS_AS(orbit_reduce(noisy, 1.0, noisy.marked), ClosureError);
}

TEST_CASE("lift expands group amplitudes onto members") {
    const WeightedGraph g = build_cayley(CayleySpec::uniform(2, 4));
    const OrbitBasis basis = standard_orbit_basis(g);
    State e0(6, 0.0);
    e0[0] = 1.0;
    const State marked_full = lift(basis, e0);
    for (int v = 0; v < g.n; ++v)
        CHECK(std::abs(marked_full[v] - (v == g.marked ? 1.0 : 0.0)) <= 1e-15);

    const ReducedSystem rs = orbit_reduce(g, 1.0, g.marked);
    const State s_full = lift(basis, rs.initial_state());
    for (int v = 0; v < g.n; ++v)
        CHECK(std::abs(s_full[v] - 1.0 / std::sqrt(21.0)) <= 1e-14);
    CHECK(std::abs(norm(s_full) - 1.0) <= 1e-14);
    CHECK_THROWS_AS(lift(basis, State(4, 0.0)), std::invalid_argument);
}

TEST_CASE("evolving then lifting equals lifting then evolving") {
    const WeightedGraph g = build_cayley(CayleySpec::uniform(2, 4));
    const OrbitBasis basis = standard_orbit_basis(g);
    const ReducedSystem rs = orbit_reduce(g, 1.0, g.marked);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    State red(6);
    for (auto& z : red) z = {uni(rng), uni(rng)};
    const double scale = norm(red);
    for (auto& z : red) z /= scale;

    const double gamma = 1.4, t = 3.7;
    const State lifted_then = evolve_exact(eigendecompose(search_hamiltonian(g, gamma, g.marked)),
                                           lift(basis, red), t);
    const State then_lifted =
        lift(basis, evolve_exact(eigendecompose(rs.hamiltonian(gamma)), red, t));
    for (int v = 0; v < g.n; ++v) CHECK(std::abs(lifted_then[v] - then_lifted[v]) <= 1e-10);
}

TEST_CASE("reduced success curves match the full space on small trees") {
    for (const CayleySpec& spec :
         {CayleySpec::uniform(2, 4), CayleySpec::uniform(3, 3), CayleySpec::uniform(2, 5)}) {
        const WeightedGraph g = build_cayley(spec);
        const ReducedSystem rs = reduce_cayley(spec, 1.0);
        const double gamma = 1.3;
        const auto dense = eigendecompose(search_hamiltonian(g, gamma, g.marked));
        const auto red = eigendecompose(rs.hamiltonian(gamma));
        const State s_full(static_cast<size_t>(g.n),
                           std::complex<double>(1.0 / std::sqrt(double(g.n))));
        for (int i = 1; i <= 10; ++i) {
            const double t = 2.5 * i;
            const State pf = evolve_exact(dense, s_full, t);
            const State pr = evolve_exact(red, rs.initial_state(), t);
            CHECK(std::abs(std::norm(pf[g.marked]) - std::norm(pr[0])) <= 1e-10);
        }
    }
}

TEST_CASE("gamma folds linearly into the reduced block") {
    const ReducedSystem rs = reduce_cayley(CayleySpec{2, 7, {3.0, 1.0}}, 1.0);
    const Matrix h1 = rs.hamiltonian(1.0);
    for (double gamma : {0.7, 2.3}) {
        const Matrix hg = rs.hamiltonian(gamma);
        Matrix interp(rs.dim, rs.dim);
        for (int i = 0; i < rs.dim; ++i)
            for (int j = 0; j < rs.dim; ++j) interp(i, j) = gamma * h1(i, j);
        interp(rs.marked_index, rs.marked_index) += gamma - 1.0;  // un-scale the projector
        CHECK(hg.max_abs_diff(interp) <= 1e-12);
    }
}

TEST_CASE("reduction rejects a wrong marked vertex") {
    const WeightedGraph g = build_cayley(CayleySpec::uniform(2, 4));
    CHECK_THROWS_AS(orbit_reduce(g, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(orbit_reduce(g, 1.0, -1), std::invalid_argument);
}

} // TEST_SUITE
