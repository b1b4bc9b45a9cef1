#include "ctqw/graph.hpp"
#include "ctqw/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace ctqw {

std::vector<double> WeightedGraph::degrees() const {
    std::vector<double> deg(n, 0.0);
    for (const auto& e : edges) {
        deg[e.u] += e.w;
        deg[e.v] += e.w;
    }
    return deg;
}

std::vector<std::vector<std::pair<int, double>>> WeightedGraph::adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& e : edges) {
        adj[e.u].emplace_back(e.v, e.w);
        adj[e.v].emplace_back(e.u, e.w);
    }
    return adj;
}

std::int64_t CayleySpec::vertex_count() const {
    std::int64_t n = 1, layer = 1;
    for (int d = 0; d < r; ++d) {
        layer *= M;
        n += layer;
        if (n > (std::int64_t{1} << 40)) break;  // caller validates the cap
    }
    return n;
}

void CayleySpec::validate() const {
    if (r < 1) throw std::invalid_argument("cayley: height r must be >= 1");
    if (M < 2) throw std::invalid_argument("cayley: branching factor M must be >= 2");
    if (static_cast<int>(layer_weights.size()) != r)
        throw std::invalid_argument("cayley: need exactly r layer weights");
    for (double w : layer_weights)
        if (!(w > 0.0)) throw std::invalid_argument("cayley: layer weights must be positive");
}

CayleySpec CayleySpec::uniform(int r, int M) {
    return CayleySpec{r, M, std::vector<double>(static_cast<size_t>(std::max(r, 0)), 1.0)};
}

CayleySpec CayleySpec::geometric(int r, int M, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("cayley: omega must be positive");
    CayleySpec spec{r, M, {}};
    spec.layer_weights.resize(static_cast<size_t>(std::max(r, 0)));
    for (int k = 0; k < r; ++k)
        spec.layer_weights[static_cast<size_t>(k)] = std::pow(omega, r - 1 - k);
    return spec;
}

std::string group_tag(const VertexLabel& label, int height) {
    if (label.diverge < 0)
        return label.depth == height ? "marked" : "path" + std::to_string(label.depth);
    return "branch" + std::to_string(label.diverge) + ":" + std::to_string(label.depth);
}

WeightedGraph build_cayley(const CayleySpec& spec) {
    spec.validate();
    const std::int64_t n64 = spec.vertex_count();
    if (n64 > 50'000'000)
        throw std::invalid_argument("cayley: tree too large to materialize");
    const int n = static_cast<int>(n64);
    const int r = spec.r, M = spec.M;

    // Breadth-first layout: layer d occupies [start[d], start[d+1]). The
    // marked path is the leftmost chain, so the marked vertex (lowest-indexed
    // leaf) is start[r].
    std::vector<int> start(static_cast<size_t>(r) + 2, 0);
    {
        std::int64_t layer = 1;
        for (int d = 0; d <= r; ++d) {
            start[static_cast<size_t>(d) + 1] = start[static_cast<size_t>(d)] + static_cast<int>(layer);
            layer *= M;
        }
    }

    WeightedGraph g;
    g.n = n;
    g.edges.reserve(static_cast<size_t>(n) - 1);
    g.labels.assign(static_cast<size_t>(n), {});
    g.labels[0] = {0, -1};
    for (int d = 0; d < r; ++d) {
        const double w = spec.layer_weights[static_cast<size_t>(d)];
        for (int p = start[static_cast<size_t>(d)]; p < start[static_cast<size_t>(d) + 1]; ++p) {
            const int base = start[static_cast<size_t>(d) + 1] +
                             (p - start[static_cast<size_t>(d)]) * M;
            for (int c = 0; c < M; ++c) {
                const int child = base + c;
                g.edges.push_back({p, child, w});
                const VertexLabel& lp = g.labels[static_cast<size_t>(p)];
                VertexLabel& lc = g.labels[static_cast<size_t>(child)];
                lc.depth = d + 1;
                if (lp.diverge >= 0)
                    lc.diverge = lp.diverge;        // already off the marked path
                else
                    lc.diverge = (c == 0 && p == start[static_cast<size_t>(d)]) ? -1 : d;
            }
        }
    }
    g.marked = start[static_cast<size_t>(r)];
    return g;
}

WeightedGraph build_geometric_cayley(int r, int M, double omega) {
    return build_cayley(CayleySpec::geometric(r, M, omega));
}

WeightedGraph build_joined_complete(int n_total) {
    if (n_total < 4 || n_total % 2 != 0)
        throw std::invalid_argument("joined_complete: need an even vertex count >= 4");
    WeightedGraph g;
    g.n = n_total;
    const int h = n_total / 2;
    for (int side = 0; side < 2; ++side) {
        const int base = side * h;
        for (int i = 0; i < h; ++i)
            for (int j = i + 1; j < h; ++j)
                g.edges.push_back({base + i, base + j, 1.0});
    }
    g.edges.push_back({0, h, 1.0});  // the bridge
    return g;
}

namespace {

int tree_height(const WeightedGraph& g) {
    int r = 0;
    for (const auto& l : g.labels) r = std::max(r, l.depth);
    return r;
}

void require_labels(const WeightedGraph& g) {
    if (!g.has_labels() || g.n != static_cast<int>(g.labels.size()))
        throw std::invalid_argument("perturb: graph has no layer labels");
}

int root_vertex(const WeightedGraph& g) {
    for (int v = 0; v < g.n; ++v)
        if (g.labels[static_cast<size_t>(v)].depth == 0) return v;
    throw std::invalid_argument("perturb: graph has no root");
}

// Bottom groups are the children sets of the depth r-1 vertices, ordered by
// parent index. Single-group perturbations act on an off-path group, away
// from the marked leaf; the large modifications pick the first half of all
// groups blindly, so the marked leaf's own group is among them.
std::vector<std::pair<int, std::vector<int>>> bottom_groups(const WeightedGraph& g,
                                                            bool off_path_only) {
    require_labels(g);
    const int r = tree_height(g);
    if (r < 1) throw std::invalid_argument("perturb: not a tree");
    auto adj = g.adjacency();
    std::vector<std::pair<int, std::vector<int>>> groups;
    for (int v = 0; v < g.n; ++v) {
        const auto& l = g.labels[static_cast<size_t>(v)];
        if (l.depth != r - 1 || (off_path_only && l.diverge < 0)) continue;
        std::vector<int> children;
        for (const auto& [u, w] : adj[static_cast<size_t>(v)])
            if (g.labels[static_cast<size_t>(u)].depth == r) children.push_back(u);
        std::sort(children.begin(), children.end());
        groups.emplace_back(v, std::move(children));
    }
    std::sort(groups.begin(), groups.end());
    if (groups.empty()) throw std::invalid_argument("perturb: no bottom group to modify");
    return groups;
}

// Resize the children sets of the given parents to m vertices each, keeping
// every untouched index stable (removed vertices are compacted away, added
// vertices are appended at the end).
WeightedGraph resize_children(const WeightedGraph& g,
                              const std::vector<std::pair<int, std::vector<int>>>& targets,
                              int m) {
    if (m < 1) throw std::invalid_argument("perturb: group size m must be >= 1");
    std::vector<char> drop(static_cast<size_t>(g.n), 0);
    for (const auto& [parent, children] : targets) {
        (void)parent;
        for (size_t i = static_cast<size_t>(m); i < children.size(); ++i)
            drop[static_cast<size_t>(children[i])] = 1;
    }

    std::vector<int> remap(static_cast<size_t>(g.n), -1);
    int next = 0;
    for (int v = 0; v < g.n; ++v)
        if (!drop[static_cast<size_t>(v)]) remap[static_cast<size_t>(v)] = next++;

    WeightedGraph out;
    out.n = next;
    out.labels.resize(static_cast<size_t>(next));
    for (int v = 0; v < g.n; ++v)
        if (remap[static_cast<size_t>(v)] >= 0)
            out.labels[static_cast<size_t>(remap[static_cast<size_t>(v)])] =
                g.labels[static_cast<size_t>(v)];
    for (const auto& e : g.edges) {
        const int u = remap[static_cast<size_t>(e.u)], v = remap[static_cast<size_t>(e.v)];
        if (u >= 0 && v >= 0) out.edges.push_back({u, v, e.w});
    }
    out.marked = g.marked >= 0 ? remap[static_cast<size_t>(g.marked)] : -1;
    if (out.marked < 0) throw std::invalid_argument("perturb: marked vertex removed");

    for (const auto& [parent, children] : targets) {
        const int kept = std::min<int>(m, static_cast<int>(children.size()));
        if (kept == 0) throw std::invalid_argument("perturb: group emptied");
        // Grown groups copy the label and the parent-edge weight of the last
        // sibling, which is never the marked leaf.
        const int sibling = children.back();
        const VertexLabel proto = g.labels[static_cast<size_t>(sibling)];
        double w = 1.0;
        for (const auto& e : g.edges) {
            if ((e.u == parent && e.v == sibling) || (e.v == parent && e.u == sibling)) {
                w = e.w;
                break;
            }
        }
        for (int i = kept; i < m; ++i) {
            out.labels.push_back(proto);
            out.edges.push_back({remap[static_cast<size_t>(parent)], out.n, w});
            ++out.n;
        }
    }
    return out;
}

WeightedGraph copy_with_root_links(const WeightedGraph& g,
                                   const std::vector<std::pair<int, std::vector<int>>>& targets) {
    WeightedGraph out = g;
    const int root = root_vertex(g);
    for (const auto& [parent, children] : targets) {
        (void)parent;
        for (int c : children) out.edges.push_back({c, root, 1.0});
    }
    return out;
}

} // namespace

WeightedGraph perturb(const WeightedGraph& g, const Perturbation& p) {
    return std::visit(
        [&](const auto& spec) -> WeightedGraph {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, ConnectGroupToRoot>) {
                auto groups = bottom_groups(g, true);
                return copy_with_root_links(g, {groups.front()});
            } else if constexpr (std::is_same_v<T, ResizeGroup>) {
                auto groups = bottom_groups(g, true);
                return resize_children(g, {groups.front()}, spec.m);
            } else if constexpr (std::is_same_v<T, ReweighEdge>) {
                if (!(spec.w > 0.0)) throw std::invalid_argument("perturb: weight must be positive");
                WeightedGraph out = g;
                for (auto& e : out.edges) {
                    if ((e.u == spec.u && e.v == spec.v) || (e.u == spec.v && e.v == spec.u)) {
                        e.w = spec.w;
                        return out;
                    }
                }
                throw std::invalid_argument("perturb: edge not found");
            } else if constexpr (std::is_same_v<T, ResizeHalfGroups>) {
                auto groups = bottom_groups(g, false);
                groups.resize(groups.size() / 2);
                if (groups.empty()) throw std::invalid_argument("perturb: too few groups");
                return resize_children(g, groups, spec.m);
            } else if constexpr (std::is_same_v<T, ConnectHalfGroupsToRoot>) {
                auto groups = bottom_groups(g, false);
                groups.resize(groups.size() / 2);
                if (groups.empty()) throw std::invalid_argument("perturb: too few groups");
                return copy_with_root_links(g, groups);
            } else {
                static_assert(std::is_same_v<T, RandomBinaryWeights>);
                WeightedGraph out = g;
                std::mt19937_64 rng(spec.seed);
                for (auto& e : out.edges) e.w = 1.0 + static_cast<double>(rng() & 1u);
                return out;
            }
        },
        p);
}

Edge find_group_edge(const WeightedGraph& g, const std::string& tag_a,
                     const std::string& tag_b) {
    require_labels(g);
    const int r = tree_height(g);
    for (const auto& e : g.edges) {
        const std::string tu = group_tag(g.labels[static_cast<size_t>(e.u)], r);
        const std::string tv = group_tag(g.labels[static_cast<size_t>(e.v)], r);
        if ((tu == tag_a && tv == tag_b) || (tu == tag_b && tv == tag_a)) return e;
    }
    throw std::invalid_argument("no edge between groups " + tag_a + " and " + tag_b);
}

WeightedGraph add_gaussian_noise(const WeightedGraph& g, double sigma,
                                 std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("noise: sigma must be >= 0");
    if (sigma == 0.0) return g;
    WeightedGraph out = g;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& e : out.edges) e.w = std::max(e.w * (1.0 + gauss(rng)), 1e-9);
    return out;
}

Perturbation perturbation_from_json(const json& spec, const WeightedGraph& g) {
    const std::string type = spec.at("type").get<std::string>();
    if (type == "connect_group_to_root") return ConnectGroupToRoot{};
    if (type == "resize_group") return ResizeGroup{spec.at("m").get<int>()};
    if (type == "reweigh_edge") {
        const double w = spec.at("w").get<double>();
        if (spec.contains("groups")) {
            const auto tags = spec.at("groups").get<std::vector<std::string>>();
            if (tags.size() != 2) throw std::invalid_argument("reweigh_edge: need two group tags");
            const Edge e = find_group_edge(g, tags[0], tags[1]);
            return ReweighEdge{e.u, e.v, w};
        }
        return ReweighEdge{spec.at("u").get<int>(), spec.at("v").get<int>(), w};
    }
    if (type == "resize_half_groups") return ResizeHalfGroups{spec.at("m").get<int>()};
    if (type == "connect_half_groups_to_root") return ConnectHalfGroupsToRoot{};
    if (type == "random_binary_weights")
        return RandomBinaryWeights{spec.value("seed", std::uint64_t{42})};
    throw std::invalid_argument("unknown perturbation type: " + type);
}

json cayley_to_json(const CayleySpec& spec) {
    return json{{"kind", "cayley"}, {"r", spec.r}, {"M", spec.M},
                {"layer_weights", spec.layer_weights}};
}

CayleySpec cayley_from_json(const json& spec) {
    if (spec.value("kind", "cayley") != "cayley")
        throw std::invalid_argument("expected a cayley graph description");
    CayleySpec cs;
    cs.r = spec.at("r").get<int>();
    cs.M = spec.at("M").get<int>();
    if (spec.contains("layer_weights"))
        cs.layer_weights = spec.at("layer_weights").get<std::vector<double>>();
    else if (spec.contains("omega"))
        return CayleySpec::geometric(cs.r, cs.M, spec.at("omega").get<double>());
    else
        return CayleySpec::uniform(cs.r, cs.M);
    return cs;
}

json perturbation_to_json(const Perturbation& p) {
    return std::visit(
        [](const auto& spec) -> json {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, ConnectGroupToRoot>)
                return {{"type", "connect_group_to_root"}};
            else if constexpr (std::is_same_v<T, ResizeGroup>)
                return {{"type", "resize_group"}, {"m", spec.m}};
            else if constexpr (std::is_same_v<T, ReweighEdge>)
                return {{"type", "reweigh_edge"}, {"u", spec.u}, {"v", spec.v}, {"w", spec.w}};
            else if constexpr (std::is_same_v<T, ResizeHalfGroups>)
                return {{"type", "resize_half_groups"}, {"m", spec.m}};
            else if constexpr (std::is_same_v<T, ConnectHalfGroupsToRoot>)
                return {{"type", "connect_half_groups_to_root"}};
            else
                return {{"type", "random_binary_weights"}, {"seed", spec.seed}};
        },
        p);
}

WeightedGraph graph_from_json(const json& spec) {
    const std::string kind = spec.value("kind", "cayley");
    WeightedGraph g;
    if (kind == "cayley") {
        g = build_cayley(cayley_from_json(spec));
    } else if (kind == "joined_complete") {
        g = build_joined_complete(spec.at("n").get<int>());
    } else {
        throw std::invalid_argument("unknown graph kind: " + kind);
    }
    if (spec.contains("perturbation"))
        g = perturb(g, perturbation_from_json(spec.at("perturbation"), g));
    if (spec.contains("noise")) {
        const auto& noise = spec.at("noise");
        g = add_gaussian_noise(g, noise.at("sigma").get<double>(),
                               noise.value("seed", std::uint64_t{42}));
    }
    return g;
}

void write_edge_list(const WeightedGraph& g, std::ostream& out) {
    out << "# n=" << g.n << "\n";
    char buf[64];
    for (const auto& e : g.edges) {
        std::snprintf(buf, sizeof buf, "%.17g", e.w);
        out << e.u << " " << e.v << " " << buf << "\n";
    }
}

} // namespace ctqw
