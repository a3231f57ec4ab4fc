#include "treesos/backtrack.hpp"

#include <algorithm>
#include <deque>

namespace treesos {

namespace {

struct Searcher {
    const RootedTree& t;
    const Graph& g;
    const std::vector<VertexSet>* allowed;
    std::vector<int> order;    // tree vertices, attach-before order
    std::vector<int> attach;   // attach[i]: tree vertex the i-th one hangs off (-1 for first)
    std::vector<int> pin;      // per tree vertex, -1 or forced host
    std::vector<int> host_pref;
    Embedding emb;
    long long budget;
    long long expansions = 0;
    bool exhausted = false;

    Searcher(const RootedTree& t_, const Graph& g_, const std::vector<VertexSet>* allowed_,
             long long budget_)
        : t(t_), g(g_), allowed(allowed_), pin(t_.n_vertices(), -1),
          emb(t_.n_vertices(), g_.n()), budget(budget_) {}

    bool feasible(int tv, int hv) const {
        if (emb.used.test(hv)) return false;
        if (pin[tv] >= 0 && pin[tv] != hv) return false;
        if (g.degree(hv) < t.tree_degree(tv)) return false;
        if (allowed && !(*allowed)[tv].test(hv)) return false;
        return true;
    }

    bool dfs(std::size_t idx) {
        if (idx == order.size()) return true;
        int tv = order[idx];
        int w = attach[idx] >= 0 ? emb.image[attach[idx]] : -1;
        for (int hv : host_pref) {
            if (w >= 0 && !g.has_edge(w, hv)) continue;
            if (!feasible(tv, hv)) continue;
            if (++expansions > budget) {
                exhausted = true;
                return false;
            }
            emb.place(tv, hv);
            if (dfs(idx + 1)) return true;
            emb.unplace(tv);
            if (exhausted) return false;
        }
        return false;
    }
};

}  // namespace

ExactResult backtracking_embed(const RootedTree& t, const Graph& g, const PinList& pins,
                               long long budget, SearchOrder order,
                               const std::vector<VertexSet>* allowed) {
    ExactResult result;
    if (t.n_vertices() > g.n()) {
        result.status = ExactStatus::NotFound;
        return result;
    }
    Searcher s(t, g, allowed, budget);
    for (const auto& [tv, hv] : pins) {
        if (tv < 0 || tv >= t.n_vertices() || hv < 0 || hv >= g.n())
            throw std::invalid_argument("backtracking_embed: pin out of range");
        if (s.pin[tv] >= 0 && s.pin[tv] != hv) return result;  // contradictory pins
        s.pin[tv] = hv;
    }
    {
        // Pins must be injective; a clash is a proof of infeasibility.
        std::vector<int> hosts;
        for (int v = 0; v < t.n_vertices(); ++v)
            if (s.pin[v] >= 0) hosts.push_back(s.pin[v]);
        std::sort(hosts.begin(), hosts.end());
        if (std::adjacent_find(hosts.begin(), hosts.end()) != hosts.end()) return result;
    }

    int start = pins.empty() ? t.root() : pins.front().first;
    // Attach-before order: BFS over the tree from the start vertex, so every
    // tree edge is checked exactly once when its lower endpoint is placed.
    {
        std::vector<int> at(t.n_vertices(), -2);
        std::deque<int> q{start};
        at[start] = -1;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            s.order.push_back(v);
            s.attach.push_back(at[v]);
            auto visit = [&](int u) {
                if (u >= 0 && at[u] == -2) {
                    at[u] = v;
                    q.push_back(u);
                }
            };
            visit(t.parent(v));
            for (int c : t.children(v)) visit(c);
        }
    }
    s.host_pref.resize(g.n());
    for (int v = 0; v < g.n(); ++v) s.host_pref[v] = v;
    if (order == SearchOrder::Primary) {
        std::stable_sort(s.host_pref.begin(), s.host_pref.end(), [&](int a, int b) {
            if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
            return a < b;
        });
    } else {
        std::stable_sort(s.host_pref.begin(), s.host_pref.end(), [&](int a, int b) {
            if (g.degree(a) != g.degree(b)) return g.degree(a) < g.degree(b);
            return a > b;
        });
    }

    bool found = s.dfs(0);
    result.expansions = s.expansions;
    if (found) {
        result.status = ExactStatus::Found;
        result.emb = s.emb;
        if (!verify_embedding(t, g, result.emb, pins))
            throw ContractViolation("backtracking_embed: produced embedding failed replay");
    } else {
        result.status = s.exhausted ? ExactStatus::BudgetExhausted : ExactStatus::NotFound;
    }
    return result;
}

}  // namespace treesos
