#pragma once
#include <string>
#include <vector>

#include "ctqw/graph.hpp"
#include "ctqw/operators.hpp"
#include "ctqw/subspace.hpp"

namespace ctqw {

struct Stage {
    double gamma = 1.0;
    double duration = 0.0;
    int eig_lo = 0, eig_hi = 1;   // eigenpair whose gap fixed the duration
    std::string source_label, target_label;
};

struct SearchSchedule {
    std::vector<Stage> stages;
    double total_time() const;
};

enum class PlanMode { MultiStage, SingleStageAuto };

// Eigenvalues and squared basis-state overlaps on a uniform jumping-rate grid.
struct OverlapSpectrum {
    std::vector<double> gammas;
    std::vector<std::string> basis_labels;
    int dim = 0;
    // [point][k] and [point][b * dim + k] with b indexing basis states.
    std::vector<std::vector<double>> eigenvalues;
    std::vector<std::vector<double>> overlaps;
    std::vector<std::vector<double>> s_overlaps;  // against the uniform state
};

OverlapSpectrum overlap_sweep(const ReducedSystem& rs, double gamma_min,
                              double gamma_max, int steps);
OverlapSpectrum overlap_sweep_serial(const ReducedSystem& rs, double gamma_min,
                                     double gamma_max, int steps);

// Locates the avoided crossing mixing `source` into `target`: the argmax of
// the two-level transfer quality max_i 4 |<target|psi_i>|^2 |<source|psi_i>|^2
// over the bracket, refined by golden section to `tol` in gamma. Throws
// NumericalError when no crossing lives in the bracket.
double find_critical_gamma(const ReducedSystem& rs, const std::vector<double>& source,
                           const std::vector<double>& target, double gamma_lo,
                           double gamma_hi, double tol = 1e-4);

// Multi-stage: one stage per tree level at the refined crossing near each
// integer jumping rate, duration pi / gap of the eigenpair holding the current
// state. Single-stage: one stage at the located crossing, duration
// pi / (E1 - E0).
SearchSchedule plan_schedule(const ReducedSystem& rs, PlanMode mode);
SearchSchedule plan_schedule(const WeightedGraph& g, int marked, PlanMode mode);

// One stage at a fixed jumping rate, duration pi / (E1 - E0).
SearchSchedule single_stage_at(const ReducedSystem& rs, double gamma);

struct StageDiagnostics {
    double gamma = 0.0, duration = 0.0, gap = 0.0;
    std::string source_label, target_label;
    std::vector<double> trace_times;
    std::vector<std::vector<double>> group_populations;  // [sample][group]
};

struct SearchResult {
    double success = 0.0;        // |<marked|psi(final)>|^2
    double total_time = 0.0;
    double final_norm = 0.0;
    bool reduced_path = false;
    double closure_residual = 0.0;
    std::int64_t n = 0;
    std::vector<std::string> group_labels;
    std::vector<StageDiagnostics> stages;
};

struct RunOptions {
    int trace_samples = 33;       // per stage, reduced path
    int trace_samples_full = 0;   // extra interior samples, full-space path
    double krylov_tol = 1e-8;
    bool force_full_space = false;
};

// Evolves |s> through the schedule: in the orbit basis while closure holds,
// in the full vertex space otherwise.
SearchResult run_search(const WeightedGraph& g, int marked, const SearchSchedule& schedule,
                        const RunOptions& opts = {});
SearchResult run_search_reduced(const ReducedSystem& rs, const SearchSchedule& schedule,
                                const RunOptions& opts = {});

// (1 - cos(gap * t)) / 2: population transferred across an avoided crossing.
double two_level_population(double gap, double t);

// t / p: mean total time over repeated runs of duration t and success p.
double expected_time_to_success(double p, double t);

} // namespace ctqw
