#include <algorithm>
#include <deque>

#include "treesos/regularity.hpp"

namespace treesos {

namespace {

// Standard O(V^3) blossom algorithm (Edmonds). Reduced graphs are tiny, so
// clarity beats constant factors here.
struct BlossomMatcher {
    const Graph& g;
    int n;
    std::vector<int> match, parent, base;
    std::vector<bool> used, blossom;

    explicit BlossomMatcher(const Graph& g_) : g(g_), n(g_.n()), match(n, -1) {}

    int lca(int a, int b) {
        std::vector<bool> seen(n, false);
        for (;;) {
            a = base[a];
            seen[a] = true;
            if (match[a] < 0) break;
            a = parent[match[a]];
        }
        for (;;) {
            b = base[b];
            if (seen[b]) return b;
            b = parent[match[b]];
        }
    }

    void mark_path(int v, int b, int child) {
        while (base[v] != b) {
            blossom[base[v]] = true;
            blossom[base[match[v]]] = true;
            parent[v] = child;
            child = match[v];
            v = parent[match[v]];
        }
    }

    int find_path(int root) {
        used.assign(n, false);
        parent.assign(n, -1);
        base.resize(n);
        for (int i = 0; i < n; ++i) base[i] = i;
        used[root] = true;
        std::deque<int> q{root};
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            const VertexSet& nb = g.neighbors(v);
            for (int to = nb.first(); to >= 0; to = nb.next(to)) {
                if (base[v] == base[to] || match[v] == to) continue;
                if (to == root || (match[to] >= 0 && parent[match[to]] >= 0)) {
                    int cur_base = lca(v, to);
                    blossom.assign(n, false);
                    mark_path(v, cur_base, to);
                    mark_path(to, cur_base, v);
                    for (int i = 0; i < n; ++i) {
                        if (blossom[base[i]]) {
                            base[i] = cur_base;
                            if (!used[i]) {
                                used[i] = true;
                                q.push_back(i);
                            }
                        }
                    }
                } else if (parent[to] < 0) {
                    parent[to] = v;
                    if (match[to] < 0) return to;
                    used[match[to]] = true;
                    q.push_back(match[to]);
                }
            }
        }
        return -1;
    }

    void solve() {
        for (int v = 0; v < n; ++v) {
            if (match[v] >= 0) continue;
            int u = find_path(v);
            while (u >= 0) {
                int pv = parent[u], ppv = match[pv];
                match[u] = pv;
                match[pv] = u;
                u = ppv;
            }
        }
    }
};

}  // namespace

std::vector<std::pair<int, int>> maximum_matching(const Graph& g) {
    BlossomMatcher bm(g);
    bm.solve();
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < g.n(); ++v)
        if (bm.match[v] > v) out.push_back({v, bm.match[v]});
    return out;
}

}  // namespace treesos
