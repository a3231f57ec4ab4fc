#include "treesos/graph.hpp"

#include <algorithm>
#include <deque>

#include "treesos/rng.hpp"

namespace treesos {

int Graph::min_degree() const {
    int d = n_ == 0 ? 0 : degree_[0];
    for (int v = 1; v < n_; ++v) d = std::min(d, degree_[v]);
    return d;
}

int Graph::max_degree() const {
    int d = 0;
    for (int v = 0; v < n_; ++v) d = std::max(d, degree_[v]);
    return d;
}

long long Graph::edges_within(const VertexSet& s) const {
    long long twice = 0;
    for (int v = s.first(); v >= 0; v = s.next(v)) twice += adj_[v].count_and(s);
    return twice / 2;
}

long long Graph::edges_between(const VertexSet& x, const VertexSet& y) const {
    long long c = 0;
    for (int v = x.first(); v >= 0; v = x.next(v)) c += adj_[v].count_and(y);
    return c;
}

Graph Graph::complete(int n) {
    Graph g(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
}

Graph Graph::complete_bipartite(int a, int b) {
    Graph g(a + b);
    for (int u = 0; u < a; ++u)
        for (int v = a; v < a + b; ++v) g.add_edge(u, v);
    return g;
}

Graph Graph::disjoint_union(const Graph& g, const Graph& h) {
    Graph out(g.n() + h.n());
    for (int u = 0; u < g.n(); ++u)
        for (int v = g.neighbors(u).next(u); v >= 0; v = g.neighbors(u).next(v))
            out.add_edge(u, v);
    for (int u = 0; u < h.n(); ++u)
        for (int v = h.neighbors(u).next(u); v >= 0; v = h.neighbors(u).next(v))
            out.add_edge(g.n() + u, g.n() + v);
    return out;
}

InducedSubgraph induced_subgraph(const Graph& g, const VertexSet& verts) {
    InducedSubgraph out;
    out.to_host = verts.to_vector();
    std::vector<int> to_sub(g.n(), -1);
    for (std::size_t i = 0; i < out.to_host.size(); ++i) to_sub[out.to_host[i]] = int(i);
    out.graph = Graph(int(out.to_host.size()));
    for (std::size_t i = 0; i < out.to_host.size(); ++i) {
        const VertexSet& nb = g.neighbors(out.to_host[i]);
        for (int v = nb.first(); v >= 0; v = nb.next(v)) {
            if (to_sub[v] > int(i)) out.graph.add_edge(int(i), to_sub[v]);
        }
    }
    return out;
}

Bipartition::Bipartition(VertexSet a_, VertexSet b_) : a(std::move(a_)), b(std::move(b_)) {
    if (a.capacity() != b.capacity()) throw std::invalid_argument("bipartition size mismatch");
    if (a.intersects(b)) throw std::invalid_argument("bipartition classes overlap");
    if ((a | b).count() != a.capacity()) throw std::invalid_argument("bipartition does not cover V");
}

bool average_degree_exceeds(const Graph& g, long long k) {
    if (k < 1) throw PreconditionError("average_degree_exceeds: k >= 1 required");
    return 2 * g.edge_count() > (k - 1) * g.n();
}

InducedSubgraph peel_min_degree(const Graph& g, const Rat& threshold) {
    std::vector<bool> alive(g.n(), true);
    std::vector<int> deg(g.n());
    std::deque<int> queue;
    for (int v = 0; v < g.n(); ++v) {
        deg[v] = g.degree(v);
        if (Rat(deg[v]) < threshold) queue.push_back(v);
    }
    std::vector<bool> queued(g.n(), false);
    for (int v : queue) queued[v] = true;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        if (!alive[v]) continue;
        alive[v] = false;
        const VertexSet& nb = g.neighbors(v);
        for (int u = nb.first(); u >= 0; u = nb.next(u)) {
            if (!alive[u]) continue;
            if (Rat(--deg[u]) < threshold && !queued[u]) {
                queued[u] = true;
                queue.push_back(u);
            }
        }
    }
    VertexSet keep(g.n());
    for (int v = 0; v < g.n(); ++v)
        if (alive[v]) keep.set(v);
    return induced_subgraph(g, keep);
}

bool is_beta_bipartite(const Graph& g, const Bipartition& p, const Rat& beta) {
    long long intra = g.edges_within(p.a) + g.edges_within(p.b);
    return Rat(intra) <= beta * Rat(g.edge_count());
}

Bipartition find_bipartition(const Graph& g) {
    int n = g.n();
    // Seed with BFS 2-colouring per component, then flip vertices while any
    // flip strictly lowers the intra-class edge count.
    std::vector<int> side(n, -1);
    for (int s = 0; s < n; ++s) {
        if (side[s] >= 0) continue;
        side[s] = 0;
        std::deque<int> bfs{s};
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop_front();
            const VertexSet& nb = g.neighbors(v);
            for (int u = nb.first(); u >= 0; u = nb.next(u)) {
                if (side[u] < 0) {
                    side[u] = 1 - side[v];
                    bfs.push_back(u);
                }
            }
        }
    }
    bool improved = true;
    int rounds = 0;
    while (improved && rounds++ < 64) {
        improved = false;
        for (int v = 0; v < n; ++v) {
            int same = 0, other = 0;
            const VertexSet& nb = g.neighbors(v);
            for (int u = nb.first(); u >= 0; u = nb.next(u))
                (side[u] == side[v] ? same : other)++;
            if (same > other) {
                side[v] = 1 - side[v];
                improved = true;
            }
        }
    }
    VertexSet a(n), b(n);
    for (int v = 0; v < n; ++v) (side[v] == 0 ? a : b).set(v);
    return Bipartition(a, b);
}

Graph generate_extremal(ExtremalKind kind, int k) {
    if (k < 2) throw PreconditionError("generate_extremal: k >= 2 required");
    switch (kind) {
        case ExtremalKind::Clique: return Graph::complete(k);
        case ExtremalKind::BalancedBipartite: return Graph::complete_bipartite(k - 1, k - 1);
    }
    throw std::invalid_argument("generate_extremal: unknown kind");
}

Graph generate_extremal_union(const std::vector<std::pair<ExtremalKind, int>>& parts) {
    if (parts.empty()) throw std::invalid_argument("generate_extremal_union: empty list");
    Graph acc = generate_extremal(parts[0].first, parts[0].second);
    for (std::size_t i = 1; i < parts.size(); ++i)
        acc = Graph::disjoint_union(acc, generate_extremal(parts[i].first, parts[i].second));
    return acc;
}

Graph random_graph(int n, std::uint64_t seed, std::uint64_t num, std::uint64_t den) {
    Rng rng(seed);
    Graph g(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.chance(num, den)) g.add_edge(u, v);
    return g;
}

}  // namespace treesos
