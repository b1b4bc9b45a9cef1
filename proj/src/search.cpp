#include "ctqw/search.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ctqw {

double SearchSchedule::total_time() const {
    double t = 0.0;
    for (const auto& s : stages) t += s.duration;
    return t;
}

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> gamma_grid(double lo, double hi, int steps) {
    if (steps < 1) throw std::invalid_argument("overlap_sweep: need at least one grid point");
    std::vector<double> g(static_cast<size_t>(steps));
    if (steps == 1) {
        g[0] = lo;
        return g;
    }
    const double h = (hi - lo) / (steps - 1);
    for (int i = 0; i < steps; ++i) g[static_cast<size_t>(i)] = lo + h * i;
    return g;
}

void sweep_point(const ReducedSystem& rs, double gamma, std::vector<double>& evals,
                 std::vector<double>& ovl, std::vector<double>& s_ovl) {
    const int dim = rs.dim;
    const SpectralDecomposition eig = eigendecompose(rs.hamiltonian(gamma));
    evals = eig.eigenvalues;
    ovl.assign(static_cast<size_t>(dim) * dim, 0.0);
    s_ovl.assign(static_cast<size_t>(dim), 0.0);
    for (int k = 0; k < dim; ++k) {
        double s_amp = 0.0;
        for (int b = 0; b < dim; ++b) {
            const double amp = eig.eigenvectors(b, k);
            ovl[static_cast<size_t>(b) * dim + k] = amp * amp;
            s_amp += rs.s_reduced[static_cast<size_t>(b)] * amp;
        }
        s_ovl[static_cast<size_t>(k)] = s_amp * s_amp;
    }
}

OverlapSpectrum sweep_impl(const ReducedSystem& rs, double lo, double hi, int steps,
                           bool parallel) {
    OverlapSpectrum spec;
    spec.gammas = gamma_grid(lo, hi, steps);
    spec.basis_labels = rs.labels;
    spec.dim = rs.dim;
    const int npts = static_cast<int>(spec.gammas.size());
    spec.eigenvalues.resize(static_cast<size_t>(npts));
    spec.overlaps.resize(static_cast<size_t>(npts));
    spec.s_overlaps.resize(static_cast<size_t>(npts));
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < npts; ++i)
            sweep_point(rs, spec.gammas[static_cast<size_t>(i)], spec.eigenvalues[static_cast<size_t>(i)],
                        spec.overlaps[static_cast<size_t>(i)], spec.s_overlaps[static_cast<size_t>(i)]);
    } else {
        for (int i = 0; i < npts; ++i)
            sweep_point(rs, spec.gammas[static_cast<size_t>(i)], spec.eigenvalues[static_cast<size_t>(i)],
                        spec.overlaps[static_cast<size_t>(i)], spec.s_overlaps[static_cast<size_t>(i)]);
    }
    return spec;
}

// Golden-section maximization of f on [lo, hi] after a coarse scan.
template <class F>
double maximize(F&& f, double lo, double hi, int coarse, double tol, double* best_value) {
    double best_x = lo, best_f = f(lo);
    for (int i = 1; i < coarse; ++i) {
        const double x = lo + (hi - lo) * i / (coarse - 1);
        const double fx = f(x);
        if (fx > best_f) {
            best_f = fx;
            best_x = x;
        }
    }
    const double h = (hi - lo) / (coarse - 1);
    double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    const double x = 0.5 * (a + b);
    const double fx = f(x);
    if (best_value) *best_value = std::max(fx, std::max(f1, f2));
    return x;
}

double overlap_sq(const SpectralDecomposition& eig, const std::vector<double>& vec, int k) {
    double s = 0.0;
    for (int b = 0; b < eig.eigenvectors.rows(); ++b)
        s += vec[static_cast<size_t>(b)] * eig.eigenvectors(b, k);
    return s * s;
}

double complex_overlap_sq(const SpectralDecomposition& eig, const State& vec, int k) {
    std::complex<double> s = 0.0;
    for (int b = 0; b < eig.eigenvectors.rows(); ++b)
        s += eig.eigenvectors(b, k) * vec[static_cast<size_t>(b)];
    return std::norm(s);
}

std::string dominant_label(const ReducedSystem& rs, const State& cur) {
    double best = std::norm(inner(rs.initial_state(), cur));
    std::string label = "s";
    for (int b = 0; b < rs.dim; ++b) {
        const double p = std::norm(cur[static_cast<size_t>(b)]);
        if (p > best) {
            best = p;
            label = rs.labels[static_cast<size_t>(b)];
        }
    }
    return label;
}

struct StageAttempt {
    int lo = 0, hi = 1;
    double gap = 0.0;
    double duration = 0.0;
    State after;
};

// One candidate stage at the given jumping rate: the eigenpair holding the
// current state sets the half-period duration, and `after` is the state once
// that duration has elapsed.
StageAttempt try_stage(const ReducedSystem& rs, const State& cur, double gamma) {
    const SpectralDecomposition eig = eigendecompose(rs.hamiltonian(gamma));
    const int dim = rs.dim;
    std::vector<double> pop(static_cast<size_t>(dim));
    for (int k = 0; k < dim; ++k) pop[static_cast<size_t>(k)] = complex_overlap_sq(eig, cur, k);
    StageAttempt at;
    double best = -1.0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const double q = pop[static_cast<size_t>(i)] * pop[static_cast<size_t>(j)];
            if (q > best) {
                best = q;
                at.lo = i;
                at.hi = j;
            }
        }
    at.gap = eig.eigenvalues[static_cast<size_t>(at.hi)] - eig.eigenvalues[static_cast<size_t>(at.lo)];
    if (!(at.gap > 0.0)) return at;
    at.duration = kPi / at.gap;
    at.after = evolve_exact(eig, cur, at.duration);
    return at;
}

} // namespace

OverlapSpectrum overlap_sweep(const ReducedSystem& rs, double gamma_min,
                              double gamma_max, int steps) {
    return sweep_impl(rs, gamma_min, gamma_max, steps, true);
}

OverlapSpectrum overlap_sweep_serial(const ReducedSystem& rs, double gamma_min,
                                     double gamma_max, int steps) {
    return sweep_impl(rs, gamma_min, gamma_max, steps, false);
}

double find_critical_gamma(const ReducedSystem& rs, const std::vector<double>& source,
                           const std::vector<double>& target, double gamma_lo,
                           double gamma_hi, double tol) {
    if (!(gamma_lo > 0.0) || !(gamma_hi > gamma_lo))
        throw std::invalid_argument("find_critical_gamma: bad bracket");
    const auto quality = [&](double gamma) {
        const SpectralDecomposition eig = eigendecompose(rs.hamiltonian(gamma));
        double best = 0.0;
        for (int k = 0; k < rs.dim; ++k)
            best = std::max(best, 4.0 * overlap_sq(eig, target, k) * overlap_sq(eig, source, k));
        return best;
    };
    double best_q = 0.0;
    const double gc = maximize(quality, gamma_lo, gamma_hi, 512, tol, &best_q);
    if (best_q < 0.25)
        throw NumericalError("find_critical_gamma: no avoided crossing in bracket");
    return gc;
}

SearchSchedule plan_schedule(const ReducedSystem& rs, PlanMode mode) {
    SearchSchedule schedule;
    if (mode == PlanMode::SingleStageAuto) {
        std::vector<double> target(static_cast<size_t>(rs.dim), 0.0);
        target[static_cast<size_t>(rs.marked_index)] = 1.0;
        const double gc =
            find_critical_gamma(rs, rs.s_reduced, target, 0.05, rs.height + 0.5, 1e-4);
        const SpectralDecomposition eig = eigendecompose(rs.hamiltonian(gc));
        const double gap = eig.eigenvalues[1] - eig.eigenvalues[0];
        if (!(gap > 0.0)) throw NumericalError("plan_schedule: degenerate ground pair");
        schedule.stages.push_back({gc, kPi / gap, 0, 1, "s", rs.labels[static_cast<size_t>(rs.marked_index)]});
        return schedule;
    }

    State cur = rs.initial_state();
    for (int k = rs.height; k >= 1; --k) {
        // The integer jumping rate names the stage's target group; the rate is
        // then refined to move the most population onto that group. The last
        // stage always aims at the marked vertex.
        int target = rs.marked_index;
        if (k > 1) {
            const StageAttempt base = try_stage(rs, cur, static_cast<double>(k));
            if (!(base.gap > 0.0))
                throw NumericalError("plan_schedule: degenerate spectrum at gamma = " + std::to_string(k));
            double best_gain = -1.0;
            for (int b = 0; b < rs.dim; ++b) {
                if (std::norm(cur[static_cast<size_t>(b)]) > 0.5) continue;
                const double gain = std::norm(base.after[static_cast<size_t>(b)]);
                if (gain > best_gain) {
                    best_gain = gain;
                    target = b;
                }
            }
        }
        const auto quality = [&](double gamma) {
            const StageAttempt at = try_stage(rs, cur, gamma);
            return at.gap > 0.0 ? std::norm(at.after[static_cast<size_t>(target)]) : 0.0;
        };
        double best_q = 0.0;
        const double gc = maximize(quality, k - 0.5, k + 0.5, 512, 1e-4, &best_q);
        if (best_q < 0.25)
            throw NumericalError("plan_schedule: no avoided crossing near gamma = " + std::to_string(k));
        const StageAttempt at = try_stage(rs, cur, gc);
        if (!(at.gap > 0.0)) throw NumericalError("plan_schedule: degenerate stage pair");
        Stage stage{gc, at.duration, at.lo, at.hi, dominant_label(rs, cur), ""};
        cur = at.after;
        stage.target_label = dominant_label(rs, cur);
        schedule.stages.push_back(std::move(stage));
    }
    return schedule;
}

SearchSchedule plan_schedule(const WeightedGraph& g, int marked, PlanMode mode) {
    return plan_schedule(orbit_reduce(g, 1.0, marked), mode);
}

SearchSchedule single_stage_at(const ReducedSystem& rs, double gamma) {
    const SpectralDecomposition eig = eigendecompose(rs.hamiltonian(gamma));
    const double gap = eig.eigenvalues[1] - eig.eigenvalues[0];
    if (!(gap > 0.0)) throw NumericalError("single_stage_at: degenerate ground pair");
    SearchSchedule schedule;
    schedule.stages.push_back({gamma, kPi / gap, 0, 1, "s", rs.labels[static_cast<size_t>(rs.marked_index)]});
    return schedule;
}

SearchResult run_search_reduced(const ReducedSystem& rs, const SearchSchedule& schedule,
                                const RunOptions& opts) {
    SearchResult result;
    result.reduced_path = true;
    result.n = rs.n_full;
    result.group_labels = rs.labels;

    State cur = rs.initial_state();
    for (const auto& stage : schedule.stages) {
        const SpectralDecomposition eig = eigendecompose(rs.hamiltonian(stage.gamma));
        StageDiagnostics diag;
        diag.gamma = stage.gamma;
        diag.duration = stage.duration;
        diag.source_label = stage.source_label;
        diag.target_label = stage.target_label;
        if (stage.eig_lo >= 0 && stage.eig_hi < rs.dim && stage.eig_lo < stage.eig_hi)
            diag.gap = eig.eigenvalues[static_cast<size_t>(stage.eig_hi)] -
                       eig.eigenvalues[static_cast<size_t>(stage.eig_lo)];
        const int samples = std::max(2, opts.trace_samples);
        for (int s = 0; s < samples; ++s) {
            const double ts = stage.duration * s / (samples - 1);
            const State snap = evolve_exact(eig, cur, ts);
            diag.trace_times.push_back(result.total_time + ts);
            std::vector<double> pops(static_cast<size_t>(rs.dim));
            for (int b = 0; b < rs.dim; ++b) pops[static_cast<size_t>(b)] = std::norm(snap[static_cast<size_t>(b)]);
            diag.group_populations.push_back(std::move(pops));
        }
        cur = evolve_exact(eig, cur, stage.duration);
        result.total_time += stage.duration;
        result.stages.push_back(std::move(diag));
    }
    result.success = std::norm(cur[static_cast<size_t>(rs.marked_index)]);
    result.final_norm = norm(cur);
    return result;
}

namespace {

SearchResult run_search_full(const WeightedGraph& g, int marked, const SearchSchedule& schedule,
                             const RunOptions& opts, double closure_residual) {
    SearchResult result;
    result.reduced_path = false;
    result.closure_residual = closure_residual;
    result.n = g.n;

    OrbitBasis basis;
    bool traced = false;
    if (g.has_labels()) {
        basis = standard_orbit_basis(g);
        traced = true;
        result.group_labels.reserve(basis.groups.size());
        for (const auto& grp : basis.groups) result.group_labels.push_back(grp.label);
    }
    const auto group_pops = [&](const State& psi) {
        std::vector<double> pops(basis.groups.size(), 0.0);
        for (int v = 0; v < g.n; ++v)
            pops[static_cast<size_t>(basis.group_of[static_cast<size_t>(v)])] += std::norm(psi[static_cast<size_t>(v)]);
        return pops;
    };

    State psi(static_cast<size_t>(g.n),
              std::complex<double>(1.0 / std::sqrt(static_cast<double>(g.n))));
    for (const auto& stage : schedule.stages) {
        const SparseHamiltonian h = SparseHamiltonian::build(g, stage.gamma, marked);
        StageDiagnostics diag;
        diag.gamma = stage.gamma;
        diag.duration = stage.duration;
        diag.source_label = stage.source_label;
        diag.target_label = stage.target_label;
        const int interior = std::max(0, opts.trace_samples_full);
        const int samples = interior + 2;
        double t_prev = 0.0;
        if (traced) {
            diag.trace_times.push_back(result.total_time);
            diag.group_populations.push_back(group_pops(psi));
        }
        for (int s = 1; s < samples; ++s) {
            const double ts = stage.duration * s / (samples - 1);
            psi = evolve_krylov(h, psi, ts - t_prev, opts.krylov_tol);
            t_prev = ts;
            if (traced) {
                diag.trace_times.push_back(result.total_time + ts);
                diag.group_populations.push_back(group_pops(psi));
            }
        }
        result.total_time += stage.duration;
        result.stages.push_back(std::move(diag));
    }
    result.success = std::norm(psi[static_cast<size_t>(marked)]);
    result.final_norm = norm(psi);
    return result;
}

} // namespace

SearchResult run_search(const WeightedGraph& g, int marked, const SearchSchedule& schedule,
                        const RunOptions& opts) {
    if (marked < 0 || marked >= g.n)
        throw std::invalid_argument("run_search: marked vertex out of range");
    if (!opts.force_full_space && g.has_labels()) {
        try {
            const ReducedSystem rs = orbit_reduce(g, 1.0, marked);
            SearchResult result = run_search_reduced(rs, schedule, opts);
            result.closure_residual = rs.closure_residual;
            return result;
        } catch (const ClosureError& broken) {
            SearchResult result = run_search_full(g, marked, schedule, opts, broken.residual);
            return result;
        } catch (const std::invalid_argument&) {
            // labels unusable for the orbit basis: evolve in the vertex space
        }
    }
    return run_search_full(g, marked, schedule, opts, -1.0);
}

double two_level_population(double gap, double t) {
    if (!(gap > 0.0)) throw std::invalid_argument("two_level_population: gap must be positive");
    return 0.5 * (1.0 - std::cos(gap * t));
}

double expected_time_to_success(double p, double t) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("expected_time_to_success: need 0 < p <= 1");
    if (!(t > 0.0)) throw std::invalid_argument("expected_time_to_success: need t > 0");
    return t / p;
}

} // namespace ctqw
