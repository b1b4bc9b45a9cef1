// Times each OpenMP kernel against its serial reference (sparse Hamiltonian
// application, gamma-grid overlap sweep, pairwise max-flow mean) and the
// Krylov propagator on top of both.

#include "ctqw/connectivity.hpp"
#include "ctqw/graph.hpp"
#include "ctqw/krylov.hpp"
#include "ctqw/parallel.hpp"
#include "ctqw/search.hpp"
#include "ctqw/subspace.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

using namespace ctqw;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double seconds(F&& body) {
    const auto t0 = Clock::now();
    body();
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s %10.4fs %10.4fs %8.2fx\n", name, serial, parallel,
                parallel > 0.0 ? serial / parallel : 0.0);
}

} // namespace

int main(int argc, char** argv) {
    int m_branch = 60;
    if (argc > 1) m_branch = std::atoi(argv[1]);
    std::printf("threads: %d\n", max_threads());
    std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "openmp", "speedup");

    const WeightedGraph tree = build_cayley(CayleySpec::uniform(2, m_branch));
    const SparseHamiltonian h = SparseHamiltonian::build(tree, 2.0, tree.marked);

    State x(static_cast<size_t>(tree.n));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& z : x) z = {uni(rng), uni(rng)};
    State y;
    const int reps = 2000;
    const double t_serial = seconds([&] {
        for (int i = 0; i < reps; ++i) h.apply_serial(x, y);
    });
    const double t_parallel = seconds([&] {
        for (int i = 0; i < reps; ++i) h.apply(x, y);
    });
    report("sparse apply", t_serial, t_parallel);

    const ReducedSystem rs = reduce_cayley(CayleySpec::uniform(2, m_branch), 1.0);
    const double s_serial = seconds([&] { overlap_sweep_serial(rs, 0.5, 3.0, 4000); });
    const double s_parallel = seconds([&] { overlap_sweep(rs, 0.5, 3.0, 4000); });
    report("overlap sweep", s_serial, s_parallel);

    const WeightedGraph jc = build_joined_complete(48);
    const double a_serial = seconds([&] { average_connectivity_serial(jc, false); });
    const double a_parallel = seconds([&] { average_connectivity(jc, false); });
    report("pairwise max-flow mean", a_serial, a_parallel);

    const State s0(static_cast<size_t>(tree.n),
                   std::complex<double>(1.0 / std::sqrt(static_cast<double>(tree.n))));
    const double k_time = seconds([&] { evolve_krylov(h, s0, 20.0, 1e-8); });
    std::printf("%-28s %22.4fs (openmp apply)\n", "krylov t=20", k_time);
    return 0;
}
