#include "ctqw/cli.hpp"
#include "ctqw/connectivity.hpp"
#include "ctqw/errors.hpp"
#include "ctqw/experiments.hpp"
#include "ctqw/json_io.hpp"
#include "ctqw/parallel.hpp"
#include "ctqw/search.hpp"
#include "ctqw/subspace.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ctqw {

namespace {

struct Range {
    double lo = 0.0, hi = 1.0;
    int steps = 1;
};

Range parse_range(const std::string& text) {
    Range r;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.steps) || c1 != ':' || c2 != ':' || r.steps < 1)
        throw std::invalid_argument("expected range min:max:steps, got '" + text + "'");
    return r;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

// "top=X" puts X on the root layer and 1 elsewhere; otherwise a full
// comma-separated list of r weights, top layer first.
std::vector<double> parse_weights(const std::string& text, int r) {
    std::vector<double> w(static_cast<size_t>(r), 1.0);
    if (text.rfind("top=", 0) == 0) {
        w[0] = std::stod(text.substr(4));
        return w;
    }
    w = parse_doubles(text);
    if (static_cast<int>(w.size()) != r)
        throw std::invalid_argument("need exactly r layer weights");
    return w;
}

std::string join_invocation(int argc, const char* const* argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

// Output sink: file when --out is set, stdout otherwise.
struct Sink {
    std::ofstream file;
    bool fresh = true;

    std::ostream& open(const std::string& path, bool append) {
        if (path.empty()) return std::cout;
        fresh = !append || !std::filesystem::exists(path) ||
                std::filesystem::file_size(path) == 0;
        file.open(path, append ? std::ios::app : std::ios::trunc);
        if (!file) throw std::invalid_argument("cannot open output file: " + path);
        return file;
    }
};

struct GraphArgs {
    int r = 2;
    int M = 100;
    std::string weights;
    double omega = 0.0;
    std::string graph_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--r", r, "tree height");
        cmd->add_option("--M", M, "branching factor");
        cmd->add_option("--weights", weights, "layer weights, top first ('top=X' or 'w0,w1,...')");
        cmd->add_option("--omega", omega, "geometric layer weights 1, omega, ... from the bottom up");
        cmd->add_option("--graph", graph_file, "JSON graph description instead of inline flags");
    }

    CayleySpec spec() const {
        if (!graph_file.empty()) {
            const json doc = graph_json();
            if (doc.contains("perturbation") || doc.contains("noise"))
                throw std::invalid_argument(
                    "this subcommand starts from a clean tree; drop the perturbation/noise keys");
            return cayley_from_json(doc);
        }
        if (omega > 0.0) return CayleySpec::geometric(r, M, omega);
        CayleySpec s = CayleySpec::uniform(r, M);
        if (!weights.empty()) s.layer_weights = parse_weights(weights, r);
        return s;
    }

    json graph_json() const {
        if (!graph_file.empty()) {
            std::ifstream in(graph_file);
            if (!in) throw std::invalid_argument("cannot read graph file: " + graph_file);
            return json::parse(in);
        }
        return cayley_to_json(spec());
    }
};

void emit_records(const std::vector<ExperimentRecord>& records, const std::string& out,
                  bool append, const std::string& invocation) {
    Sink sink;
    std::ostream& os = sink.open(out, append);
    write_records_csv(os, records, invocation, sink.fresh);
    if (!out.empty()) {
        std::ofstream side(out + ".json");
        write_records_json(side, records, invocation);
    }
}

int run_overlaps(const GraphArgs& graph, const std::string& range_text, bool include_s,
                 const std::string& out, const std::string& invocation) {
    const Range range = parse_range(range_text);
    const ReducedSystem rs = reduce_cayley(graph.spec(), 1.0);
    const OverlapSpectrum spec = overlap_sweep(rs, range.lo, range.hi, range.steps);

    Sink sink;
    std::ostream& os = sink.open(out, false);
    os << "# cmd: " << invocation << "\n";
    os << "gamma";
    for (int k = 0; k < spec.dim; ++k) os << ",e" << k;
    for (int b = 0; b < spec.dim; ++b)
        for (int k = 0; k < spec.dim; ++k)
            os << ",ov_" << spec.basis_labels[static_cast<size_t>(b)] << "_" << k;
    if (include_s)
        for (int k = 0; k < spec.dim; ++k) os << ",ov_s_" << k;
    os << "\n";
    for (size_t i = 0; i < spec.gammas.size(); ++i) {
        os << format_double(spec.gammas[i]);
        for (double e : spec.eigenvalues[i]) os << "," << format_double(e);
        for (double v : spec.overlaps[i]) os << "," << format_double(v);
        if (include_s)
            for (double v : spec.s_overlaps[i]) os << "," << format_double(v);
        os << "\n";
    }
    return 0;
}

int run_search_cmd(const GraphArgs& graph, const std::string& mode, double gamma,
                   bool full_space, const std::string& format, const std::string& out,
                   const std::string& invocation) {
    const json gspec = graph.graph_json();

    // Plans come from the clean tree; perturbations and noise stay in the run.
    json clean = gspec;
    clean.erase("perturbation");
    clean.erase("noise");
    const ReducedSystem rs = reduce_cayley(cayley_from_json(clean), 1.0);
    SearchSchedule schedule;
    if (mode == "multi")
        schedule = plan_schedule(rs, PlanMode::MultiStage);
    else if (mode == "single")
        schedule = plan_schedule(rs, PlanMode::SingleStageAuto);
    else if (mode == "fixed")
        schedule = single_stage_at(rs, gamma);
    else
        throw std::invalid_argument("search: mode must be multi, single or fixed");

    RunOptions opts;
    opts.force_full_space = full_space;
    SearchResult res;
    const bool pristine = gspec == clean;
    if (pristine && !full_space) {
        res = run_search_reduced(rs, schedule, opts);
    } else {
        const WeightedGraph g = graph_from_json(gspec);
        res = run_search(g, g.marked, schedule, opts);
    }

    ExperimentRecord rec;
    rec.spec = json{{"study", "search"}, {"graph", gspec}, {"schedule", json::array()}};
    for (const auto& s : schedule.stages)
        rec.spec["schedule"].push_back({{"gamma", s.gamma}, {"duration", s.duration},
                                        {"eig_lo", s.eig_lo}, {"eig_hi", s.eig_hi},
                                        {"source", s.source_label}, {"target", s.target_label}});
    rec.success = res.success;
    rec.total_time = res.total_time;
    rec.expected_time = res.success > 0.0 ? res.total_time / res.success : 0.0;
    for (const auto& st : res.stages) rec.gaps.push_back(st.gap);
    rec.diagnostics = json{{"reduced_path", res.reduced_path},
                           {"closure_residual", res.closure_residual},
                           {"final_norm", res.final_norm},
                           {"n", res.n}};
    rec.row.emplace_back("study", "search");
    rec.row.emplace_back("mode", mode);
    rec.row.emplace_back("n", std::to_string(res.n));
    rec.row.emplace_back("stages", std::to_string(schedule.stages.size()));
    rec.row.emplace_back("success", format_double(rec.success));
    rec.row.emplace_back("total_time", format_double(rec.total_time));
    rec.row.emplace_back("expected_time", format_double(rec.expected_time));
    rec.row.emplace_back("reduced_path", res.reduced_path ? "yes" : "no");

    Sink sink;
    std::ostream& os = sink.open(out, false);
    if (format == "json") {
        os << json{{"cmd", invocation},
                   {"spec", rec.spec},
                   {"success", rec.success},
                   {"total_time", rec.total_time},
                   {"expected_time", rec.expected_time},
                   {"gaps", rec.gaps},
                   {"diagnostics", rec.diagnostics}}
                  .dump(2)
           << "\n";
    } else {
        write_records_csv(os, {rec}, invocation, true);
    }
    return 0;
}

int run_reduce(const GraphArgs& graph, double gamma, const std::string& out,
               const std::string& invocation) {
    const ReducedSystem rs = reduce_cayley(graph.spec(), gamma);
    Sink sink;
    std::ostream& os = sink.open(out, false);
    os << "# cmd: " << invocation << "\n";
    os << "basis";
    for (const auto& label : rs.labels) os << "," << label;
    os << "\n";
    for (int i = 0; i < rs.dim; ++i) {
        os << rs.labels[static_cast<size_t>(i)];
        for (int j = 0; j < rs.dim; ++j) os << "," << format_double(rs.h_eff(i, j));
        os << "\n";
    }
    return 0;
}

void print_report_row(std::ostream& os, const std::string& name, const ConnectivityReport& rep) {
    os << name << "," << rep.vertex_conn << "," << format_double(rep.edge_conn) << ","
       << format_double(rep.algebraic) << "," << format_double(rep.normalized_algebraic) << ","
       << format_double(rep.average_unit) << "," << format_double(rep.average_weighted) << "\n";
}

int run_connectivity(const GraphArgs& graph, bool table, int joined_n, const std::string& out,
                     const std::string& invocation) {
    Sink sink;
    std::ostream& os = sink.open(out, false);
    os << "# cmd: " << invocation << "\n";
    os << "graph,vertex,edge,algebraic,normalized_algebraic,average_unit,average_weighted\n";
    if (!table) {
        const WeightedGraph g = graph.graph_file.empty() ? build_cayley(graph.spec())
                                                         : graph_from_json(graph.graph_json());
        print_report_row(os, "input", connectivity_report(g));
        return 0;
    }

    const int m2 = graph.M;
    const double n2 = static_cast<double>(CayleySpec::uniform(2, m2).vertex_count());
    const int m3 = std::max(2, static_cast<int>(std::lround(std::cbrt(n2))));
    const double n3 = static_cast<double>(CayleySpec::uniform(3, m3).vertex_count());

    print_report_row(os, "cayley_r2_uniform",
                     connectivity_report(build_cayley(CayleySpec::uniform(2, m2))));
    print_report_row(os, "cayley_r2_w_sqrtN",
                     connectivity_report(build_cayley(CayleySpec{2, m2, {std::sqrt(n2), 1.0}})));
    print_report_row(os, "cayley_r3_uniform",
                     connectivity_report(build_cayley(CayleySpec::uniform(3, m3))));
    print_report_row(
        os, "cayley_r3_w_N13_N23",
        connectivity_report(build_cayley(
            CayleySpec{3, m3, {std::pow(n3, 2.0 / 3.0), std::pow(n3, 1.0 / 3.0), 1.0}})));
    print_report_row(os, "joined_complete",
                     connectivity_report(build_joined_complete(joined_n)));
    return 0;
}

int run_export(const GraphArgs& graph, const std::string& out, const std::string& invocation) {
    (void)invocation;  // edge lists carry only the size header
    const WeightedGraph g = graph.graph_file.empty() ? build_cayley(graph.spec())
                                                     : graph_from_json(graph.graph_json());
    Sink sink;
    std::ostream& os = sink.open(out, false);
    write_edge_list(g, os);
    return 0;
}

Perturbation perturbation_from_cli(const std::string& type, int m, double w,
                                   std::uint64_t seed, const std::string& edge_groups,
                                   const WeightedGraph& g) {
    if (type == "connect_group_to_root") return ConnectGroupToRoot{};
    if (type == "resize_group") return ResizeGroup{m};
    if (type == "resize_half_groups") return ResizeHalfGroups{m};
    if (type == "connect_half_groups_to_root") return ConnectHalfGroupsToRoot{};
    if (type == "random_binary_weights") return RandomBinaryWeights{seed};
    if (type == "reweigh_edge") {
        const auto colon = edge_groups.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("reweigh_edge needs --edge-groups tagA:tagB");
        const Edge e = find_group_edge(g, edge_groups.substr(0, colon),
                                       edge_groups.substr(colon + 1));
        return ReweighEdge{e.u, e.v, w};
    }
    throw std::invalid_argument("unknown perturbation type: " + type);
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    const std::string invocation = join_invocation(argc, argv);

    CLI::App app{"continuous-time quantum walk search on weighted trees"};
    app.require_subcommand(1);
    int jobs = 0;
    app.add_option("--jobs", jobs, "bound on worker threads (0 = runtime default)");

    std::string out, format = "json", mode = "multi", range_text = "0.5:3.0:500";
    std::uint64_t seed = 42;
    bool include_s = false, full_space = false, table = false, append = false;
    double gamma = 1.0, weight = 1.0;
    int resize_m = 1, joined_n = 64, trials = 20;
    std::string list_text, ptype = "connect_group_to_root", edge_groups, sigma_text = "1e-4,1e-3,1e-2,1e-1";

    GraphArgs g_overlaps, g_search, g_reduce, g_conn, g_export, g_noise, g_perturb;

    auto* overlaps = app.add_subcommand("overlaps", "eigenvalues and squared basis overlaps over a gamma grid");
    g_overlaps.attach(overlaps);
    overlaps->add_option("--gamma", range_text, "grid min:max:steps");
    overlaps->add_flag("--include-s", include_s, "also emit overlaps with the uniform state");
    overlaps->add_option("--out", out, "output file (default stdout)");

    auto* search = app.add_subcommand("search", "plan and run a search schedule");
    g_search.attach(search);
    search->add_option("--mode", mode, "multi | single | fixed");
    search->add_option("--gamma", gamma, "jumping rate for --mode fixed");
    search->add_flag("--full-space", full_space, "force full vertex-space evolution");
    search->add_option("--format", format, "json | csv");
    search->add_option("--out", out, "output file (default stdout)");

    auto* sweep_m = app.add_subcommand("sweep-m", "success versus branching factor");
    int sweep_r = 2;
    std::string sweep_mode = "multi";
    sweep_m->add_option("--r", sweep_r, "tree height");
    sweep_m->add_option("--M-list", list_text, "comma-separated branching factors")->required();
    sweep_m->add_option("--mode", sweep_mode, "multi | weighted");
    sweep_m->add_option("--out", out, "output CSV (default stdout)");
    sweep_m->add_flag("--append", append, "append to the CSV instead of rewriting");

    auto* sweep_n = app.add_subcommand("sweep-n", "success and gap versus size for thin weighted trees");
    std::string r_list_text;
    int thin_m = 2;
    double thin_omega = 3.0, thin_gamma = 1.5;
    sweep_n->add_option("--r-list", r_list_text, "comma-separated heights")->required();
    sweep_n->add_option("--M", thin_m, "branching factor");
    sweep_n->add_option("--omega", thin_omega, "geometric weight base");
    sweep_n->add_option("--gamma", thin_gamma, "jumping rate");
    sweep_n->add_option("--out", out, "output CSV (default stdout)");
    sweep_n->add_flag("--append", append, "append to the CSV instead of rewriting");

    auto* gamma_dev = app.add_subcommand("gamma-dev", "detuned jumping rate against the critical baseline");
    gamma_dev->add_option("--M-list", list_text, "comma-separated branching factors")->required();
    gamma_dev->add_option("--out", out, "output CSV (default stdout)");
    gamma_dev->add_flag("--append", append, "append to the CSV instead of rewriting");

    auto* noise = app.add_subcommand("noise", "success under seeded multiplicative edge noise");
    g_noise.attach(noise);
    noise->add_option("--sigma-list", sigma_text, "comma-separated noise levels");
    noise->add_option("--trials", trials, "noisy copies per level");
    noise->add_option("--seed", seed, "base seed");
    noise->add_option("--mode", mode, "multi | single");
    noise->add_option("--out", out, "output CSV (default stdout)");
    noise->add_flag("--append", append, "append to the CSV instead of rewriting");

    auto* perturb_cmd = app.add_subcommand("perturb", "run the unmodified schedule on a perturbed tree");
    g_perturb.attach(perturb_cmd);
    perturb_cmd->add_option("--type", ptype,
                            "connect_group_to_root | resize_group | reweigh_edge | "
                            "resize_half_groups | connect_half_groups_to_root | random_binary_weights");
    perturb_cmd->add_option("--m", resize_m, "target group size for resize types");
    perturb_cmd->add_option("--w", weight, "new weight for reweigh_edge");
    perturb_cmd->add_option("--edge-groups", edge_groups, "tagA:tagB naming the reweighed edge");
    perturb_cmd->add_option("--seed", seed, "seed for random_binary_weights");
    perturb_cmd->add_option("--mode", mode, "multi | single");
    perturb_cmd->add_option("--out", out, "output CSV (default stdout)");
    perturb_cmd->add_flag("--append", append, "append to the CSV instead of rewriting");

    auto* conn = app.add_subcommand("connectivity", "connectivity measures of one graph or the comparison table");
    g_conn.attach(conn);
    conn->add_flag("--table", table, "emit the tree/joined-complete comparison table");
    conn->add_option("--joined-n", joined_n, "joined-complete size for the table");
    conn->add_option("--out", out, "output CSV (default stdout)");

    auto* reduce = app.add_subcommand("reduce", "dump the reduced Hamiltonian as CSV");
    g_reduce.attach(reduce);
    double reduce_gamma = 1.0;
    reduce->add_option("--gamma", reduce_gamma, "jumping rate");
    reduce->add_option("--out", out, "output file (default stdout)");

    auto* export_cmd = app.add_subcommand("export-graph", "write the graph as an edge list");
    g_export.attach(export_cmd);
    export_cmd->add_option("--out", out, "output file (default stdout)");

    // global flags like --jobs may follow the subcommand
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    set_max_threads(jobs);
    try {
        if (*overlaps) return run_overlaps(g_overlaps, range_text, include_s, out, invocation);
        if (*search) return run_search_cmd(g_search, mode, gamma, full_space, format, out, invocation);
        if (*sweep_m) {
            const BranchingMode bm = sweep_mode == "weighted" ? BranchingMode::SingleStageWeighted
                                                              : BranchingMode::MultiStageUniform;
            emit_records(sweep_branching(sweep_r, parse_ints(list_text), bm), out, append, invocation);
            return 0;
        }
        if (*sweep_n) {
            emit_records(sweep_size_small_m(parse_ints(r_list_text), thin_m, thin_omega, thin_gamma),
                         out, append, invocation);
            return 0;
        }
        if (*gamma_dev) {
            emit_records(gamma_deviation_study(parse_ints(list_text)), out, append, invocation);
            return 0;
        }
        if (*noise) {
            const PlanMode pm = mode == "single" ? PlanMode::SingleStageAuto : PlanMode::MultiStage;
            emit_records(noise_study(g_noise.spec(), pm, parse_doubles(sigma_text), trials, seed),
                         out, append, invocation);
            return 0;
        }
        if (*perturb_cmd) {
            const PlanMode pm = mode == "single" ? PlanMode::SingleStageAuto : PlanMode::MultiStage;
            const WeightedGraph base = build_cayley(g_perturb.spec());
            const Perturbation p =
                perturbation_from_cli(ptype, resize_m, weight, seed, edge_groups, base);
            emit_records({perturbation_study(g_perturb.spec(), p, pm, ptype)}, out, append, invocation);
            return 0;
        }
        if (*conn) return run_connectivity(g_conn, table, joined_n, out, invocation);
        if (*reduce) return run_reduce(g_reduce, reduce_gamma, out, invocation);
        if (*export_cmd) return run_export(g_export, out, invocation);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace ctqw
