#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ctqw {

struct Edge {
    int u = 0, v = 0;
    double w = 1.0;
    bool operator==(const Edge&) const = default;
};

// Layer depth plus the symmetry group a vertex belongs to. `diverge` is the
// depth at which the vertex's root path leaves the marked path; -1 marks the
// vertices on the marked path itself.
struct VertexLabel {
    int depth = -1;
    int diverge = -1;
    bool operator==(const VertexLabel&) const = default;
};

struct WeightedGraph {
    int n = 0;
    std::vector<Edge> edges;            // undirected, each unordered pair once, w > 0
    std::vector<VertexLabel> labels;    // empty when the builder has no layer structure
    int marked = -1;                    // lowest-indexed leaf for tree builders, else -1

    bool has_labels() const { return !labels.empty(); }
    std::vector<double> degrees() const;                       // total incident weight
    std::vector<std::vector<std::pair<int, double>>> adjacency() const;

    bool operator==(const WeightedGraph&) const = default;
};

// Rooted tree of height r in which every internal vertex has exactly M
// children. layer_weights[k] is the weight of the edges between depth k and
// depth k+1 (depth 0 is the root), so layer_weights.size() == r.
struct CayleySpec {
    int r = 1;
    int M = 2;
    std::vector<double> layer_weights;

    std::int64_t vertex_count() const;  // (M^(r+1) - 1) / (M - 1)
    void validate() const;              // throws std::invalid_argument

    static CayleySpec uniform(int r, int M);
    // Weights 1, omega, omega^2, ... from the bottom layer up:
    // layer_weights[k] = omega^(r-1-k).
    static CayleySpec geometric(int r, int M, double omega);
};

// Group tag string for a label, e.g. "marked", "path1", "branch0:2".
std::string group_tag(const VertexLabel& label, int height);

WeightedGraph build_cayley(const CayleySpec& spec);
WeightedGraph build_geometric_cayley(int r, int M, double omega);

// Two complete graphs on n_total/2 vertices joined by one unit-weight bridge.
WeightedGraph build_joined_complete(int n_total);

// --- structural perturbations -----------------------------------------------
// All act on tree-builder outputs (labels required) and return a new graph.

struct ConnectGroupToRoot {};           // one bottom group gains edges to the root
struct ResizeGroup { int m = 1; };      // one bottom group resized to m vertices
struct ReweighEdge { int u = -1, v = -1; double w = 1.0; };
struct ResizeHalfGroups { int m = 1; }; // floor(half) of the bottom groups resized
struct ConnectHalfGroupsToRoot {};
struct RandomBinaryWeights { std::uint64_t seed = 42; }; // every weight 1 or 2

using Perturbation = std::variant<ConnectGroupToRoot, ResizeGroup, ReweighEdge,
                                  ResizeHalfGroups, ConnectHalfGroupsToRoot,
                                  RandomBinaryWeights>;

WeightedGraph perturb(const WeightedGraph& g, const Perturbation& p);

// First edge whose endpoints carry the two given group tags (either order).
Edge find_group_edge(const WeightedGraph& g, const std::string& tag_a,
                     const std::string& tag_b);

// Multiplicative noise w -> w * (1 + xi), xi ~ Normal(0, sigma^2), clamped to
// 1e-9 so weights stay positive. Deterministic for a fixed seed.
WeightedGraph add_gaussian_noise(const WeightedGraph& g, double sigma,
                                 std::uint64_t seed);

// "# n=<n>" header then one "u v w" line per edge.
void write_edge_list(const WeightedGraph& g, std::ostream& out);

} // namespace ctqw
