#include <doctest.h>

#include "ctqw/cli.hpp"
#include "ctqw/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace ctqw;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"ctqw"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path tmp_file(const std::string& name) {
    return fs::temp_directory_path() / ("ctqw_test_" + name);
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("reduce dumps the six-state block") {
    const auto out = tmp_file("reduce.csv");
    CHECK(run_cli({"reduce", "--r", "2", "--M", "4", "--gamma", "1", "--out", out.string()}) == 0);
    const std::string text = slurp(out);
    CHECK(count_lines(text) == 8);  // invocation + header + 6 rows
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# cmd: ctqw reduce", 0) == 0);
    std::getline(in, line);
    CHECK(line == "basis,marked,branch1:2,branch0:2,path1,branch0:1,path0");
    std::getline(in, line);  // the marked row: diagonal gamma-1 = 0, then the path1 coupling
    CHECK(line.rfind("marked,", 0) == 0);
    fs::remove(out);
}

TEST_CASE("multi-stage search meets the headline probability") {
    const auto out = tmp_file("search.json");
    CHECK(run_cli({"search", "--r", "2", "--M", "100", "--mode", "multi", "--out",
                   out.string()}) == 0);
    const json doc = json::parse(slurp(out));
    CHECK(doc["success"].get<double>() >= 0.99);
    CHECK(doc["spec"]["schedule"].size() == 2);
    CHECK(doc["diagnostics"]["reduced_path"] == true);
    fs::remove(out);
}

TEST_CASE("merged single stage on the weighted tree") {
    const auto out = tmp_file("merged.json");
    CHECK(run_cli({"search", "--r", "2", "--M", "100", "--weights", "top=100", "--mode", "single",
                   "--out", out.string()}) == 0);
    const json doc = json::parse(slurp(out));
    CHECK(doc["success"].get<double>() >= 0.97);
    CHECK(doc["spec"]["schedule"].size() == 1);
    const double gamma = doc["spec"]["schedule"][0]["gamma"].get<double>();
    CHECK(std::abs(gamma - 1.01) <= 0.005);
    fs::remove(out);
}

TEST_CASE("identical invocations produce byte-identical outputs") {
    const auto a = tmp_file("rep_a.csv"), b = tmp_file("rep_b.csv");
    const std::vector<std::string> cmd{"sweep-m", "--r", "2", "--M-list", "10,20"};
    auto with_out = [&](const fs::path& p) {
        auto c = cmd;
        c.push_back("--out");
        c.push_back(p.string());
        return c;
    };
    CHECK(run_cli(with_out(a)) == 0);
    CHECK(run_cli(with_out(b)) == 0);
    std::string ta = slurp(a), tb = slurp(b);
    // the embedded invocations differ only in the output path; strip line one
    ta = ta.substr(ta.find('\n'));
    tb = tb.substr(tb.find('\n'));
    CHECK(ta == tb);
    CHECK(fs::exists(a.string() + ".json"));  // sidecar with full specs
    fs::remove(a);
    fs::remove(b);
    fs::remove(a.string() + ".json");
    fs::remove(b.string() + ".json");
}

TEST_CASE("overlap grid has one row per gamma and basis-squared columns") {
    const auto out = tmp_file("overlaps.csv");
    CHECK(run_cli({"overlaps", "--r", "2", "--M", "10", "--gamma", "0.5:3.0:50", "--out",
                   out.string()}) == 0);
    std::istringstream in(slurp(out));
    std::string line;
    std::getline(in, line);  // # cmd
    std::getline(in, line);  // header
    int commas = 0;
    for (char c : line) commas += c == ',';
    CHECK(commas == 6 + 36);  // eigenvalues + 6x6 overlaps
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 50);
    fs::remove(out);
}

TEST_CASE("export writes the edge list with its size header") {
    const auto out = tmp_file("graph.txt");
    CHECK(run_cli({"export-graph", "--r", "1", "--M", "2", "--out", out.string()}) == 0);
    CHECK(slurp(out) == "# n=3\n0 1 1\n0 2 1\n");
    fs::remove(out);
}

TEST_CASE("graph JSON files feed the run") {
    const auto spec = tmp_file("spec.json");
    {
        std::ofstream f(spec);
        f << R"({"kind":"cayley","r":2,"M":6,"perturbation":{"type":"resize_group","m":6}})";
    }
    const auto out = tmp_file("fromjson.json");
    CHECK(run_cli({"search", "--graph", spec.string(), "--mode", "multi", "--out",
                   out.string()}) == 0);
    const json doc = json::parse(slurp(out));
    CHECK(doc["diagnostics"]["n"] == 43);
    fs::remove(spec);
    fs::remove(out);
}

TEST_CASE("connectivity table lists the published rows") {
    const auto out = tmp_file("conn.csv");
    CHECK(run_cli({"connectivity", "--table", "--M", "10", "--joined-n", "16", "--out",
                   out.string()}) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("cayley_r2_uniform,1,1,") != std::string::npos);
    CHECK(text.find("cayley_r2_w_sqrtN,1,1,") != std::string::npos);
    CHECK(text.find("joined_complete,1,1,") != std::string::npos);
    CHECK(count_lines(text) == 7);
    fs::remove(out);
}

TEST_CASE("every experiment subcommand emits rows") {
    const auto out = tmp_file("misc.csv");
    CHECK(run_cli({"sweep-n", "--r-list", "6,8", "--M", "2", "--omega", "3", "--gamma", "1.5",
                   "--out", out.string()}) == 0);
    std::string text = slurp(out);
    CHECK(count_lines(text) == 4);
    CHECK(text.find("gap_sqrt_n") != std::string::npos);

    CHECK(run_cli({"gamma-dev", "--M-list", "10", "--out", out.string()}) == 0);
    CHECK(count_lines(slurp(out)) == 4);  // detuned + baseline rows

    CHECK(run_cli({"noise", "--r", "2", "--M", "4", "--sigma-list", "0", "--trials", "2", "--out",
                   out.string()}) == 0);
    CHECK(count_lines(slurp(out)) == 3);

    CHECK(run_cli({"perturb", "--r", "2", "--M", "6", "--type", "resize_group", "--m", "3",
                   "--out", out.string()}) == 0);
    text = slurp(out);
    CHECK(count_lines(text) == 3);
    CHECK(text.find("resize_group") != std::string::npos);
    fs::remove(out);
    fs::remove(out.string() + ".json");
}

TEST_CASE("append mode keeps one header and accumulates rows") {
    const auto out = tmp_file("append.csv");
    fs::remove(out);
    const std::vector<std::string> cmd{"sweep-m", "--r", "2", "--M-list", "10", "--out",
                                       out.string(), "--append"};
    CHECK(run_cli(cmd) == 0);
    CHECK(run_cli(cmd) == 0);
    const std::string text = slurp(out);
    CHECK(count_lines(text) == 4);  // cmd + header + two accumulated rows
    int headers = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) headers += line.rfind("study,", 0) == 0;
    CHECK(headers == 1);
    fs::remove(out);
    fs::remove(out.string() + ".json");
}

TEST_CASE("validation failures exit with one") {
    CHECK(run_cli({"search", "--r", "0", "--M", "4"}) == 1);
    CHECK(run_cli({"search", "--r", "2", "--M", "4", "--mode", "sideways"}) == 1);
    CHECK(run_cli({"no-such-command"}) == 1);
    CHECK(run_cli({"overlaps", "--r", "2", "--M", "4", "--gamma", "oops"}) == 1);
    CHECK(run_cli({"gamma-dev", "--M-list", "abc"}) == 1);
    CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("numerical failures exit with two") {
    // unweighted trees have no single avoided crossing joining |s> to the
    // marked vertex, so the merged mode reports a numerical failure
    CHECK(run_cli({"search", "--r", "2", "--M", "100", "--mode", "single"}) == 2);
}

} // TEST_SUITE
