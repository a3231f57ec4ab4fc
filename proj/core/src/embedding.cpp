#include "treesos/embedding.hpp"

namespace treesos {

namespace {

bool replay(const RootedTree& t, const Graph& g, const Embedding& emb, const PinList& pins,
            bool require_complete) {
    const int n = t.n_vertices();
    if (int(emb.image.size()) != n) return false;
    std::vector<bool> hit(g.n(), false);
    for (int v = 0; v < n; ++v) {
        int hv = emb.image[v];
        if (hv < 0) {
            if (require_complete) return false;
            continue;
        }
        if (hv >= g.n()) return false;
        if (hit[hv]) return false;  // injectivity
        hit[hv] = true;
        if (!emb.used.test(hv)) return false;
    }
    for (int v = 0; v < n; ++v) {
        if (v == t.root()) continue;
        int u = t.parent(v);
        if (emb.image[v] < 0 || emb.image[u] < 0) continue;
        if (!g.has_edge(emb.image[u], emb.image[v])) return false;
    }
    for (const auto& [tv, hv] : pins) {
        if (tv < 0 || tv >= n) return false;
        if (emb.image[tv] != hv) return false;
    }
    return true;
}

}  // namespace

bool verify_embedding(const RootedTree& t, const Graph& g, const Embedding& emb,
                      const PinList& pins) {
    return replay(t, g, emb, pins, true);
}

bool verify_partial_embedding(const RootedTree& t, const Graph& g, const Embedding& emb,
                              const PinList& pins) {
    return replay(t, g, emb, pins, false);
}

}  // namespace treesos
