#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ctqw/graph.hpp"
#include "ctqw/json_io.hpp"
#include "ctqw/search.hpp"

namespace ctqw {

// One run of one instance. `spec` re-runs the record exactly; `row` is the
// flattened CSV view.
struct ExperimentRecord {
    json spec;
    double success = 0.0;
    double total_time = 0.0;
    double expected_time = 0.0;  // total_time / success
    std::vector<double> gaps;    // per stage
    json diagnostics;
    std::vector<std::pair<std::string, std::string>> row;
};

enum class BranchingMode { MultiStageUniform, SingleStageWeighted };

// Success versus branching factor: multi-stage on uniform trees or the merged
// single stage on trees whose top layer carries weight M.
std::vector<ExperimentRecord> sweep_branching(int r, const std::vector<int>& m_values,
                                              BranchingMode mode);

// Success and gap versus size for geometrically weighted thin trees.
std::vector<ExperimentRecord> sweep_size_small_m(const std::vector<int>& r_values,
                                                 int m = 2, double omega = 3.0,
                                                 double gamma = 1.5);

// Height-3 trees with weights M^2, M, 1: the detuned rate gamma = 1 against
// the critical-rate baseline gamma = 1 + 1/M, per branching factor.
std::vector<ExperimentRecord> gamma_deviation_study(const std::vector<int>& m_values);

// Mean and spread of the success over seeded noisy copies, reusing the
// noiseless schedule. Noise breaks the orbit symmetry, so the noisy runs
// evolve in the full vertex space.
std::vector<ExperimentRecord> noise_study(const CayleySpec& base, PlanMode mode,
                                          const std::vector<double>& sigmas, int trials,
                                          std::uint64_t seed);

// Runs the unmodified schedule on a structurally perturbed tree and reports
// the success next to the unperturbed baseline.
ExperimentRecord perturbation_study(const CayleySpec& base, const Perturbation& p,
                                    PlanMode mode, const std::string& name);

// Replays a record's spec: {"graph":{..}, "schedule":[{"gamma":..,"duration":..},..]}.
ExperimentRecord run_from_spec(const json& spec);

// Comma-separated values with a "# cmd: ..." invocation line; append skips
// the headers when the file already has content.
void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records,
                       const std::string& invocation, bool with_header = true);
void write_records_json(std::ostream& out, const std::vector<ExperimentRecord>& records,
                        const std::string& invocation);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string format_double(double v);  // shared %.12g formatting

} // namespace ctqw
