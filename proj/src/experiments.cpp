#include "ctqw/experiments.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ctqw {

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_slope: need matching samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares_slope: degenerate abscissa");
    return sxy / sxx;
}

namespace {

json schedule_to_json(const SearchSchedule& schedule) {
    json out = json::array();
    for (const auto& s : schedule.stages)
        out.push_back({{"gamma", s.gamma},
                       {"duration", s.duration},
                       {"eig_lo", s.eig_lo},
                       {"eig_hi", s.eig_hi},
                       {"source", s.source_label},
                       {"target", s.target_label}});
    return out;
}

SearchSchedule schedule_from_json(const json& arr) {
    SearchSchedule schedule;
    for (const auto& s : arr) {
        Stage stage;
        stage.gamma = s.at("gamma").get<double>();
        stage.duration = s.at("duration").get<double>();
        stage.eig_lo = s.value("eig_lo", 0);
        stage.eig_hi = s.value("eig_hi", 1);
        stage.source_label = s.value("source", "");
        stage.target_label = s.value("target", "");
        schedule.stages.push_back(std::move(stage));
    }
    return schedule;
}

json result_diagnostics(const SearchResult& res) {
    json stages = json::array();
    for (const auto& st : res.stages) {
        json entry{{"gamma", st.gamma}, {"duration", st.duration}, {"gap", st.gap},
                   {"source", st.source_label}, {"target", st.target_label}};
        if (!st.trace_times.empty()) {
            entry["trace_times"] = st.trace_times;
            entry["group_populations"] = st.group_populations;
        }
        stages.push_back(std::move(entry));
    }
    return json{{"stages", std::move(stages)},
                {"group_labels", res.group_labels},
                {"reduced_path", res.reduced_path},
                {"closure_residual", res.closure_residual},
                {"final_norm", res.final_norm},
                {"n", res.n}};
}

ExperimentRecord make_record(const std::string& study, json graph_spec,
                             const SearchSchedule& schedule, const SearchResult& res) {
    ExperimentRecord rec;
    rec.spec = json{{"study", study},
                    {"graph", std::move(graph_spec)},
                    {"schedule", schedule_to_json(schedule)}};
    rec.success = res.success;
    rec.total_time = res.total_time;
    rec.expected_time = res.success > 0.0 ? res.total_time / res.success : 0.0;
    for (const auto& st : res.stages) rec.gaps.push_back(st.gap);
    rec.diagnostics = result_diagnostics(res);
    return rec;
}

// The walk itself never needs the vertex space for closed trees, so spec-level
// runs reduce analytically and stay cheap for any branching factor.
SearchResult run_reduced_spec(const CayleySpec& spec, const SearchSchedule& schedule,
                              const RunOptions& opts = {}) {
    return run_search_reduced(reduce_cayley(spec, 1.0), schedule, opts);
}

void push(std::vector<std::pair<std::string, std::string>>& row, const std::string& key,
          const std::string& value) {
    row.emplace_back(key, value);
}
void push(std::vector<std::pair<std::string, std::string>>& row, const std::string& key,
          double value) {
    row.emplace_back(key, format_double(value));
}
void push(std::vector<std::pair<std::string, std::string>>& row, const std::string& key,
          std::int64_t value) {
    row.emplace_back(key, std::to_string(value));
}
void push(std::vector<std::pair<std::string, std::string>>& row, const std::string& key,
          int value) {
    row.emplace_back(key, std::to_string(value));
}

void append_stage_columns(ExperimentRecord& rec, const SearchSchedule& schedule) {
    for (size_t k = 0; k < schedule.stages.size(); ++k) {
        const std::string tag = "stage" + std::to_string(k + 1);
        push(rec.row, tag + "_gamma", schedule.stages[k].gamma);
        push(rec.row, tag + "_duration", schedule.stages[k].duration);
        push(rec.row, tag + "_gap", k < rec.gaps.size() ? rec.gaps[k] : 0.0);
    }
}

} // namespace

std::vector<ExperimentRecord> sweep_branching(int r, const std::vector<int>& m_values,
                                              BranchingMode mode) {
    if (m_values.empty()) throw std::invalid_argument("sweep_branching: empty M list");
    std::vector<ExperimentRecord> records(m_values.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(m_values.size()); ++i) {
        const int m = m_values[static_cast<size_t>(i)];
        CayleySpec spec = CayleySpec::uniform(r, m);
        SearchSchedule schedule;
        std::string variant;
        if (mode == BranchingMode::MultiStageUniform) {
            variant = "multi_stage";
            schedule = plan_schedule(reduce_cayley(spec, 1.0), PlanMode::MultiStage);
        } else {
            variant = "single_stage_weighted";
            spec.layer_weights[0] = m;  // top layer carries the branching factor
            schedule = single_stage_at(reduce_cayley(spec, 1.0), 1.0 + 1.0 / m);
        }
        const SearchResult res = run_reduced_spec(spec, schedule);
        ExperimentRecord rec = make_record("sweep_branching", cayley_to_json(spec), schedule, res);
        push(rec.row, "study", std::string("sweep_branching"));
        push(rec.row, "variant", variant);
        push(rec.row, "r", r);
        push(rec.row, "M", m);
        push(rec.row, "n", res.n);
        push(rec.row, "success", rec.success);
        push(rec.row, "total_time", rec.total_time);
        push(rec.row, "expected_time", rec.expected_time);
        append_stage_columns(rec, schedule);
        records[static_cast<size_t>(i)] = std::move(rec);
    }
    return records;
}

std::vector<ExperimentRecord> sweep_size_small_m(const std::vector<int>& r_values, int m,
                                                 double omega, double gamma) {
    if (r_values.empty()) throw std::invalid_argument("sweep_size_small_m: empty r list");
    for (int r : r_values)
        if (r < 1 || r > 20) throw std::invalid_argument("sweep_size_small_m: r out of range");
    std::vector<ExperimentRecord> records(r_values.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(r_values.size()); ++i) {
        const int r = r_values[static_cast<size_t>(i)];
        const CayleySpec spec = CayleySpec::geometric(r, m, omega);
        const ReducedSystem rs = reduce_cayley(spec, 1.0);
        const SearchSchedule schedule = single_stage_at(rs, gamma);
        const SearchResult res = run_search_reduced(rs, schedule);
        ExperimentRecord rec = make_record("sweep_size_small_m", cayley_to_json(spec), schedule, res);
        const double gap = rec.gaps.empty() ? 0.0 : rec.gaps[0];
        push(rec.row, "study", std::string("sweep_size_small_m"));
        push(rec.row, "r", r);
        push(rec.row, "M", m);
        push(rec.row, "omega", omega);
        push(rec.row, "gamma", gamma);
        push(rec.row, "n", res.n);
        push(rec.row, "gap", gap);
        push(rec.row, "gap_sqrt_n", gap * std::sqrt(static_cast<double>(res.n)));
        push(rec.row, "success", rec.success);
        push(rec.row, "total_time", rec.total_time);
        push(rec.row, "expected_time", rec.expected_time);
        records[static_cast<size_t>(i)] = std::move(rec);
    }
    return records;
}

std::vector<ExperimentRecord> gamma_deviation_study(const std::vector<int>& m_values) {
    if (m_values.empty()) throw std::invalid_argument("gamma_deviation_study: empty M list");
    std::vector<ExperimentRecord> records(2 * m_values.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(m_values.size()); ++i) {
        const int m = m_values[static_cast<size_t>(i)];
        CayleySpec spec;
        spec.r = 3;
        spec.M = m;
        const double md = static_cast<double>(m);
        spec.layer_weights = {md * md, md, 1.0};
        const ReducedSystem rs = reduce_cayley(spec, 1.0);
        const double variants[2] = {1.0, 1.0 + 1.0 / md};  // detuned, critical
        for (int v = 0; v < 2; ++v) {
            const SearchSchedule schedule = single_stage_at(rs, variants[v]);
            const SearchResult res = run_search_reduced(rs, schedule);
            ExperimentRecord rec =
                make_record("gamma_deviation", cayley_to_json(spec), schedule, res);
            push(rec.row, "study", std::string("gamma_deviation"));
            push(rec.row, "variant", std::string(v == 0 ? "deviated" : "baseline"));
            push(rec.row, "r", spec.r);
            push(rec.row, "M", m);
            push(rec.row, "gamma", variants[v]);
            push(rec.row, "n", res.n);
            push(rec.row, "gap", rec.gaps.empty() ? 0.0 : rec.gaps[0]);
            push(rec.row, "success", rec.success);
            push(rec.row, "total_time", rec.total_time);
            push(rec.row, "expected_time", rec.expected_time);
            records[static_cast<size_t>(2 * i + v)] = std::move(rec);
        }
    }
    return records;
}

namespace {

std::vector<ExperimentRecord> noise_study_scheduled(const CayleySpec& base,
                                                    const SearchSchedule& schedule,
                                                    const std::vector<double>& sigmas, int trials,
                                                    std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("noise_study: need at least one trial");
    const WeightedGraph clean = build_cayley(base);
    const ReducedSystem rs = reduce_cayley(base, 1.0);
    const double baseline = run_search_reduced(rs, schedule).success;

    std::vector<ExperimentRecord> records(sigmas.size());
    for (size_t si = 0; si < sigmas.size(); ++si) {
        const double sigma = sigmas[si];
        std::vector<double> successes(static_cast<size_t>(trials), 0.0);
        std::vector<double> times(static_cast<size_t>(trials), 0.0);
#pragma omp parallel for schedule(dynamic)
        for (int trial = 0; trial < trials; ++trial) {
            const std::uint64_t trial_seed = seed + 1000003ull * static_cast<std::uint64_t>(trial);
            const WeightedGraph noisy = add_gaussian_noise(clean, sigma, trial_seed);
            const SearchResult res = run_search(noisy, noisy.marked, schedule);
            successes[static_cast<size_t>(trial)] = res.success;
            times[static_cast<size_t>(trial)] = res.total_time;
        }
        const double mean =
            std::accumulate(successes.begin(), successes.end(), 0.0) / trials;
        double var = 0.0;
        for (double s : successes) var += (s - mean) * (s - mean);
        const double stdev = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;

        ExperimentRecord rec;
        json graph_spec = cayley_to_json(base);
        graph_spec["noise"] = {{"sigma", sigma}, {"seed", seed}};
        rec.spec = json{{"study", "noise"},
                        {"graph", graph_spec},
                        {"schedule", schedule_to_json(schedule)},
                        {"trials", trials},
                        {"seed", seed}};
        rec.success = mean;
        rec.total_time = std::accumulate(times.begin(), times.end(), 0.0) / trials;
        rec.expected_time = mean > 0.0 ? rec.total_time / mean : 0.0;
        rec.diagnostics = json{{"baseline_success", baseline},
                               {"trial_successes", successes},
                               {"std_success", stdev}};
        push(rec.row, "study", std::string("noise"));
        push(rec.row, "r", base.r);
        push(rec.row, "M", base.M);
        push(rec.row, "sigma", sigma);
        push(rec.row, "trials", trials);
        push(rec.row, "seed", static_cast<std::int64_t>(seed));
        push(rec.row, "baseline_success", baseline);
        push(rec.row, "mean_success", mean);
        push(rec.row, "std_success", stdev);
        push(rec.row, "stderr_success", trials > 1 ? stdev / std::sqrt(static_cast<double>(trials)) : 0.0);
        push(rec.row, "mean_total_time", rec.total_time);
        records[si] = std::move(rec);
    }
    return records;
}

} // namespace

std::vector<ExperimentRecord> noise_study(const CayleySpec& base, PlanMode mode,
                                          const std::vector<double>& sigmas, int trials,
                                          std::uint64_t seed) {
    return noise_study_scheduled(base, plan_schedule(reduce_cayley(base, 1.0), mode), sigmas,
                                 trials, seed);
}

ExperimentRecord perturbation_study(const CayleySpec& base, const Perturbation& p,
                                    PlanMode mode, const std::string& name) {
    const WeightedGraph clean = build_cayley(base);
    const ReducedSystem rs = reduce_cayley(base, 1.0);
    const SearchSchedule schedule = plan_schedule(rs, mode);
    const double baseline = run_search_reduced(rs, schedule).success;

    const WeightedGraph modified = perturb(clean, p);
    const SearchResult res = run_search(modified, modified.marked, schedule);

    json graph_spec = cayley_to_json(base);
    graph_spec["perturbation"] = perturbation_to_json(p);
    ExperimentRecord rec = make_record("perturbation", std::move(graph_spec), schedule, res);
    rec.spec["perturbation"] = name;
    rec.diagnostics["baseline_success"] = baseline;
    push(rec.row, "study", std::string("perturbation"));
    push(rec.row, "perturbation", name);
    push(rec.row, "r", base.r);
    push(rec.row, "M", base.M);
    push(rec.row, "n_base", clean.n);
    push(rec.row, "n_perturbed", modified.n);
    push(rec.row, "baseline_success", baseline);
    push(rec.row, "success", rec.success);
    push(rec.row, "ratio", baseline > 0.0 ? rec.success / baseline : 0.0);
    push(rec.row, "reduced_path", std::string(res.reduced_path ? "yes" : "no"));
    push(rec.row, "closure_residual", res.closure_residual);
    push(rec.row, "total_time", rec.total_time);
    return rec;
}

ExperimentRecord run_from_spec(const json& spec) {
    const SearchSchedule schedule = schedule_from_json(spec.at("schedule"));
    const json& graph_spec = spec.at("graph");
    if (spec.value("study", "") == "noise") {
        json base_spec = graph_spec;
        base_spec.erase("noise");
        return noise_study_scheduled(cayley_from_json(base_spec), schedule,
                                     {graph_spec.at("noise").at("sigma").get<double>()},
                                     spec.at("trials").get<int>(),
                                     spec.at("seed").get<std::uint64_t>())[0];
    }
    SearchResult res;
    if (graph_spec.value("kind", "cayley") == "cayley" && !graph_spec.contains("perturbation") &&
        !graph_spec.contains("noise")) {
        // Closed trees reduce analytically, so any branching factor replays.
        res = run_reduced_spec(cayley_from_json(graph_spec), schedule);
    } else {
        const WeightedGraph g = graph_from_json(graph_spec);
        res = run_search(g, g.marked, schedule);
    }
    ExperimentRecord rec = make_record(spec.value("study", "replay"), graph_spec, schedule, res);
    push(rec.row, "study", spec.value("study", "replay"));
    push(rec.row, "n", res.n);
    push(rec.row, "success", rec.success);
    push(rec.row, "total_time", rec.total_time);
    push(rec.row, "expected_time", rec.expected_time);
    return rec;
}

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records,
                       const std::string& invocation, bool with_header) {
    if (records.empty()) return;
    if (with_header) {
        out << "# cmd: " << invocation << "\n";
        for (size_t i = 0; i < records[0].row.size(); ++i)
            out << records[0].row[i].first << (i + 1 < records[0].row.size() ? "," : "\n");
    }
    for (const auto& rec : records) {
        for (size_t i = 0; i < rec.row.size(); ++i)
            out << rec.row[i].second << (i + 1 < rec.row.size() ? "," : "\n");
    }
}

void write_records_json(std::ostream& out, const std::vector<ExperimentRecord>& records,
                        const std::string& invocation) {
    json docs = json::array();
    for (const auto& rec : records)
        docs.push_back({{"spec", rec.spec},
                        {"success", rec.success},
                        {"total_time", rec.total_time},
                        {"expected_time", rec.expected_time},
                        {"gaps", rec.gaps},
                        {"diagnostics", rec.diagnostics}});
    out << json{{"cmd", invocation}, {"records", docs}}.dump(2) << "\n";
}

} // namespace ctqw
