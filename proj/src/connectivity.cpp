#include "ctqw/connectivity.hpp"
#include "ctqw/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace ctqw {

bool is_connected(const WeightedGraph& g) {
    if (g.n == 0) return false;
    auto adj = g.adjacency();
    std::vector<char> seen(static_cast<size_t>(g.n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (const auto& [u, w] : adj[static_cast<size_t>(v)]) {
            (void)w;
            if (!seen[static_cast<size_t>(u)]) {
                seen[static_cast<size_t>(u)] = 1;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count == g.n;
}

bool is_tree(const WeightedGraph& g) {
    return static_cast<int>(g.edges.size()) == g.n - 1 && is_connected(g);
}

namespace {

// Residual-capacity max flow (BFS shortest augmenting paths). Undirected
// edges enter as an arc pair with the full capacity on both sides.
struct FlowNetwork {
    struct Arc {
        int to;
        double cap;
        int rev;
    };
    std::vector<std::vector<Arc>> adj;

    explicit FlowNetwork(int n) : adj(static_cast<size_t>(n)) {}

    void add_undirected(int u, int v, double cap) {
        adj[static_cast<size_t>(u)].push_back({v, cap, static_cast<int>(adj[static_cast<size_t>(v)].size())});
        adj[static_cast<size_t>(v)].push_back({u, cap, static_cast<int>(adj[static_cast<size_t>(u)].size()) - 1});
    }
    void add_directed(int u, int v, double cap) {
        adj[static_cast<size_t>(u)].push_back({v, cap, static_cast<int>(adj[static_cast<size_t>(v)].size())});
        adj[static_cast<size_t>(v)].push_back({u, 0.0, static_cast<int>(adj[static_cast<size_t>(u)].size()) - 1});
    }

    double max_flow(int s, int t) {
        const double eps = 1e-12;
        double flow = 0.0;
        const int n = static_cast<int>(adj.size());
        std::vector<int> prev_node(static_cast<size_t>(n)), prev_arc(static_cast<size_t>(n));
        for (;;) {
            std::fill(prev_node.begin(), prev_node.end(), -1);
            prev_node[static_cast<size_t>(s)] = s;
            std::queue<int> q;
            q.push(s);
            while (!q.empty() && prev_node[static_cast<size_t>(t)] < 0) {
                const int v = q.front();
                q.pop();
                for (int i = 0; i < static_cast<int>(adj[static_cast<size_t>(v)].size()); ++i) {
                    const Arc& a = adj[static_cast<size_t>(v)][static_cast<size_t>(i)];
                    if (a.cap > eps && prev_node[static_cast<size_t>(a.to)] < 0) {
                        prev_node[static_cast<size_t>(a.to)] = v;
                        prev_arc[static_cast<size_t>(a.to)] = i;
                        q.push(a.to);
                    }
                }
            }
            if (prev_node[static_cast<size_t>(t)] < 0) return flow;
            double push = std::numeric_limits<double>::infinity();
            for (int v = t; v != s; v = prev_node[static_cast<size_t>(v)])
                push = std::min(push, adj[static_cast<size_t>(prev_node[static_cast<size_t>(v)])]
                                           [static_cast<size_t>(prev_arc[static_cast<size_t>(v)])].cap);
            for (int v = t; v != s; v = prev_node[static_cast<size_t>(v)]) {
                Arc& a = adj[static_cast<size_t>(prev_node[static_cast<size_t>(v)])]
                            [static_cast<size_t>(prev_arc[static_cast<size_t>(v)])];
                a.cap -= push;
                adj[static_cast<size_t>(a.to)][static_cast<size_t>(a.rev)].cap += push;
            }
            flow += push;
        }
    }
};

double pair_max_flow(const WeightedGraph& g, int s, int t, bool weighted) {
    FlowNetwork net(g.n);
    for (const auto& e : g.edges) net.add_undirected(e.u, e.v, weighted ? e.w : 1.0);
    return net.max_flow(s, t);
}

// kappa(s, t): internally vertex-disjoint paths via vertex splitting.
int vertex_pair_connectivity(const WeightedGraph& g, int s, int t) {
    FlowNetwork net(2 * g.n);
    const double inf = static_cast<double>(g.n);
    for (int v = 0; v < g.n; ++v)
        net.add_directed(v, v + g.n, (v == s || v == t) ? inf : 1.0);
    for (const auto& e : g.edges) {
        net.add_directed(e.u + g.n, e.v, inf);
        net.add_directed(e.v + g.n, e.u, inf);
    }
    return static_cast<int>(std::lround(net.max_flow(s + g.n, t)));
}

// Kruskal-style bottleneck aggregation: descending edge weights, each union
// fixes the pairwise bottleneck for s1*s2 new pairs. Trees only.
double tree_average_bottleneck(const WeightedGraph& g, bool weighted) {
    if (!weighted) return 1.0;
    std::vector<Edge> edges = g.edges;
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.w > b.w; });
    std::vector<int> parent(static_cast<size_t>(g.n)), size(static_cast<size_t>(g.n), 1);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](int v) {
        while (parent[static_cast<size_t>(v)] != v) {
            parent[static_cast<size_t>(v)] = parent[static_cast<size_t>(parent[static_cast<size_t>(v)])];
            v = parent[static_cast<size_t>(v)];
        }
        return v;
    };
    long double total = 0.0L;
    for (const auto& e : edges) {
        const int a = find(e.u), b = find(e.v);
        total += static_cast<long double>(e.w) * size[static_cast<size_t>(a)] * size[static_cast<size_t>(b)];
        parent[static_cast<size_t>(a)] = b;
        size[static_cast<size_t>(b)] += size[static_cast<size_t>(a)];
    }
    const long double pairs = static_cast<long double>(g.n) * (g.n - 1) / 2.0L;
    return static_cast<double>(total / pairs);
}

double average_connectivity_impl(const WeightedGraph& g, bool weighted, bool parallel) {
    if (is_tree(g)) return tree_average_bottleneck(g, weighted);
    if (g.n > 512) throw std::invalid_argument("average_connectivity: graph too large");
    const int n = g.n;
    const int pairs = n * (n - 1) / 2;
    // Indexed writes then one serial sum keep the result independent of the
    // worker schedule.
    std::vector<double> flows(static_cast<size_t>(pairs), 0.0);
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int p = 0; p < pairs; ++p) {
            int s = static_cast<int>((1.0 + std::sqrt(1.0 + 8.0 * p)) / 2.0);
            while (s * (s - 1) / 2 > p) --s;
            while ((s + 1) * s / 2 <= p) ++s;
            const int t = p - s * (s - 1) / 2;
            flows[static_cast<size_t>(p)] = pair_max_flow(g, s, t, weighted);
        }
    } else {
        int p = 0;
        for (int s = 1; s < n; ++s)
            for (int t = 0; t < s; ++t) flows[static_cast<size_t>(p++)] = pair_max_flow(g, s, t, weighted);
    }
    long double total = 0.0L;
    for (double f : flows) total += f;
    return static_cast<double>(total / pairs);
}

// Global weighted min cut (Stoer-Wagner).
double stoer_wagner(const WeightedGraph& g) {
    const int n = g.n;
    std::vector<std::vector<double>> w(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
    for (const auto& e : g.edges) {
        w[static_cast<size_t>(e.u)][static_cast<size_t>(e.v)] += e.w;
        w[static_cast<size_t>(e.v)][static_cast<size_t>(e.u)] += e.w;
    }
    std::vector<int> active(static_cast<size_t>(n));
    std::iota(active.begin(), active.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    while (active.size() > 1) {
        std::vector<double> score(active.size(), 0.0);
        std::vector<char> in_a(active.size(), 0);
        int prev = -1, last = -1;
        for (size_t step = 0; step < active.size(); ++step) {
            int pick = -1;
            for (size_t i = 0; i < active.size(); ++i)
                if (!in_a[i] && (pick < 0 || score[i] > score[static_cast<size_t>(pick)]))
                    pick = static_cast<int>(i);
            in_a[static_cast<size_t>(pick)] = 1;
            prev = last;
            last = pick;
            for (size_t i = 0; i < active.size(); ++i)
                if (!in_a[i])
                    score[i] += w[static_cast<size_t>(active[static_cast<size_t>(pick)])]
                                 [static_cast<size_t>(active[i])];
        }
        best = std::min(best, score[static_cast<size_t>(last)]);
        // merge last into prev
        const int u = active[static_cast<size_t>(prev)], v = active[static_cast<size_t>(last)];
        for (int x : active) {
            if (x == u || x == v) continue;
            w[static_cast<size_t>(u)][static_cast<size_t>(x)] += w[static_cast<size_t>(v)][static_cast<size_t>(x)];
            w[static_cast<size_t>(x)][static_cast<size_t>(u)] = w[static_cast<size_t>(u)][static_cast<size_t>(x)];
        }
        active.erase(active.begin() + last);
    }
    return best;
}

SpectralDecomposition dense_laplacian_spectrum(const WeightedGraph& g, bool normalized) {
    if (g.n > 2000)
        throw std::invalid_argument("connectivity: graph too large for the dense spectral path");
    Matrix m(g.n, g.n);
    const auto deg = g.degrees();
    if (normalized) {
        for (int i = 0; i < g.n; ++i) m(i, i) = 1.0;
        for (const auto& e : g.edges)
            m.add_sym(e.u, e.v, -e.w / std::sqrt(deg[static_cast<size_t>(e.u)] * deg[static_cast<size_t>(e.v)]));
    } else {
        for (const auto& e : g.edges) {
            m.add_sym(e.u, e.v, -e.w);
            m(e.u, e.u) += e.w;
            m(e.v, e.v) += e.w;
        }
    }
    return eigendecompose(m);
}

// Difference sector over depths k+1..r: layer values of one child subtree
// minus its sibling, zero at the splitting vertex. Returns the -L block.
Matrix difference_block(const CayleySpec& spec, int k, bool normalized) {
    const int r = spec.r, M = spec.M;
    const auto& w = spec.layer_weights;
    const auto degree_at = [&](int d) {
        double deg = 0.0;
        if (d > 0) deg += w[static_cast<size_t>(d) - 1];
        if (d < r) deg += M * w[static_cast<size_t>(d)];
        return deg;
    };
    const int m = r - k;
    Matrix block(m, m);
    for (int i = 0; i < m; ++i) {
        const int d = k + 1 + i;
        block(i, i) = normalized ? 1.0 : degree_at(d);
        if (i + 1 < m) {
            double c = -w[static_cast<size_t>(d)] * std::sqrt(static_cast<double>(M));
            if (normalized) c /= std::sqrt(degree_at(d) * degree_at(d + 1));
            block.set_sym(i, i + 1, c);
        }
    }
    return block;
}

Matrix level_uniform_block(const CayleySpec& spec, bool normalized) {
    const int r = spec.r, M = spec.M;
    const auto& w = spec.layer_weights;
    const auto degree_at = [&](int d) {
        double deg = 0.0;
        if (d > 0) deg += w[static_cast<size_t>(d) - 1];
        if (d < r) deg += M * w[static_cast<size_t>(d)];
        return deg;
    };
    Matrix block(r + 1, r + 1);
    for (int d = 0; d <= r; ++d) {
        block(d, d) = normalized ? 1.0 : degree_at(d);
        if (d < r) {
            double c = -w[static_cast<size_t>(d)] * std::sqrt(static_cast<double>(M));
            if (normalized) c /= std::sqrt(degree_at(d) * degree_at(d + 1));
            block.set_sym(d, d + 1, c);
        }
    }
    return block;
}

double sector_fiedler(const CayleySpec& spec, bool normalized) {
    const auto uniform = eigendecompose(level_uniform_block(spec, normalized));
    double best = uniform.eigenvalues[1];  // skip the constant-vector zero mode
    for (int k = 0; k < spec.r; ++k) {
        const auto block = eigendecompose(difference_block(spec, k, normalized));
        best = std::min(best, block.eigenvalues[0]);
    }
    return best;
}

} // namespace

std::optional<CayleySpec> as_cayley_spec(const WeightedGraph& g) {
    if (!g.has_labels() || static_cast<int>(g.labels.size()) != g.n || g.n < 3) return std::nullopt;
    int r = 0;
    for (const auto& l : g.labels) {
        if (l.depth < 0) return std::nullopt;
        r = std::max(r, l.depth);
    }
    if (r < 1) return std::nullopt;

    std::vector<std::int64_t> layer_count(static_cast<size_t>(r) + 1, 0);
    for (const auto& l : g.labels) ++layer_count[static_cast<size_t>(l.depth)];
    if (layer_count[0] != 1 || layer_count[1] < 2) return std::nullopt;
    const int M = static_cast<int>(layer_count[1]);
    std::int64_t expect = 1;
    for (int d = 0; d <= r; ++d) {
        if (layer_count[static_cast<size_t>(d)] != expect) return std::nullopt;
        expect *= M;
    }
    if (static_cast<int>(g.edges.size()) != g.n - 1) return std::nullopt;

    std::vector<double> weights(static_cast<size_t>(r), 0.0);
    for (const auto& e : g.edges) {
        const int du = g.labels[static_cast<size_t>(e.u)].depth;
        const int dv = g.labels[static_cast<size_t>(e.v)].depth;
        if (std::abs(du - dv) != 1) return std::nullopt;
        const int layer = std::min(du, dv);
        double& slot = weights[static_cast<size_t>(layer)];
        if (slot == 0.0)
            slot = e.w;
        else if (slot != e.w)
            return std::nullopt;
    }
    CayleySpec spec{r, M, std::move(weights)};
    if (spec.vertex_count() != g.n) return std::nullopt;
    return spec;
}

double cayley_algebraic_connectivity(const CayleySpec& spec) {
    spec.validate();
    return sector_fiedler(spec, false);
}

double cayley_normalized_algebraic_connectivity(const CayleySpec& spec) {
    spec.validate();
    return sector_fiedler(spec, true);
}

double average_connectivity(const WeightedGraph& g, bool weighted) {
    return average_connectivity_impl(g, weighted, true);
}

double average_connectivity_serial(const WeightedGraph& g, bool weighted) {
    return average_connectivity_impl(g, weighted, false);
}

int vertex_connectivity(const WeightedGraph& g) {
    if (is_tree(g)) return g.n >= 2 ? 1 : 0;
    if (g.n > 512) throw std::invalid_argument("vertex_connectivity: graph too large");
    std::vector<std::vector<char>> adjacent(static_cast<size_t>(g.n),
                                            std::vector<char>(static_cast<size_t>(g.n), 0));
    for (const auto& e : g.edges) {
        adjacent[static_cast<size_t>(e.u)][static_cast<size_t>(e.v)] = 1;
        adjacent[static_cast<size_t>(e.v)][static_cast<size_t>(e.u)] = 1;
    }
    int best = g.n - 1;  // complete graphs have no non-adjacent pair
    for (int s = 0; s < g.n; ++s)
        for (int t = s + 1; t < g.n; ++t) {
            if (adjacent[static_cast<size_t>(s)][static_cast<size_t>(t)]) continue;
            best = std::min(best, vertex_pair_connectivity(g, s, t));
        }
    return best;
}

double edge_connectivity(const WeightedGraph& g) {
    if (is_tree(g)) {
        double wmin = std::numeric_limits<double>::infinity();
        for (const auto& e : g.edges) wmin = std::min(wmin, e.w);
        return wmin;
    }
    if (g.n > 512) throw std::invalid_argument("edge_connectivity: graph too large");
    return stoer_wagner(g);
}

ConnectivityReport connectivity_report(const WeightedGraph& g) {
    if (!is_connected(g)) throw std::invalid_argument("connectivity_report: graph is disconnected");
    ConnectivityReport rep;
    rep.vertex_conn = vertex_connectivity(g);
    rep.edge_conn = edge_connectivity(g);
    rep.average_unit = average_connectivity(g, false);
    rep.average_weighted = average_connectivity(g, true);
    if (const auto spec = as_cayley_spec(g)) {
        rep.algebraic = cayley_algebraic_connectivity(*spec);
        rep.normalized_algebraic = cayley_normalized_algebraic_connectivity(*spec);
    } else {
        rep.algebraic = dense_laplacian_spectrum(g, false).eigenvalues[1];
        rep.normalized_algebraic = dense_laplacian_spectrum(g, true).eigenvalues[1];
    }
    return rep;
}

} // namespace ctqw
