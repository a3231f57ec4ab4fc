#include "treesos/greedy.hpp"

#include <algorithm>
#include <functional>

namespace treesos {

namespace {

// Tie rule shared by the greedy embedders: among admissible images take the
// one with the most unused high-degree neighbours left, then the smallest id.
int pick_best(const Graph& g, const VertexSet& candidates, const VertexSet& unused,
              const VertexSet& high_degree) {
    int best = -1, best_res = -1;
    VertexSet pool = unused & high_degree;
    for (int c = candidates.first(); c >= 0; c = candidates.next(c)) {
        int res = g.neighbors(c).count_and(pool);
        if (res > best_res) {
            best = c;
            best_res = res;
        }
    }
    return best;
}

}  // namespace

Embedding greedy_embed_h(const RootedTree& t, const Graph& g, int h, int v) {
    const int k = t.k() + h;
    const int delta = t.max_degree();
    if (h < 0 || v < 0 || v >= g.n())
        throw PreconditionError("greedy_embed_h: bad h or root image");
    if (g.min_degree() < delta + h)
        throw PreconditionError("greedy_embed_h: delta(G) >= Delta(T)+h required");
    VertexSet high(g.n());
    int low = 0;
    for (int x = 0; x < g.n(); ++x) {
        if (g.degree(x) >= k)
            high.set(x);
        else
            ++low;
    }
    if (low > h)
        throw PreconditionError("greedy_embed_h: more than h vertices of degree < k");

    Embedding emb(t.n_vertices(), g.n());
    emb.place(t.root(), v);
    VertexSet unused = VertexSet::full(g.n());
    unused.reset(v);

    auto place = [&](int tv, int parent_image) {
        VertexSet cand = g.neighbors(parent_image) & unused & high;
        long long options = cand.count();
        int img = pick_best(g, cand, unused, high);
        if (img < 0)
            throw ContractViolation("greedy_embed_h: starved despite preconditions");
        emb.place(tv, img, options);
        unused.reset(img);
    };

    // Children of the root go first; they are the only placements that depend
    // on deg(v) >= Delta+h rather than on a degree->=k parent image.
    for (int c : t.children(t.root())) place(c, v);
    for (int tv : t.dfs_order()) {
        if (emb.placed(tv)) continue;
        place(tv, emb.image[t.parent(tv)]);
    }
    if (!verify_embedding(t, g, emb, {{t.root(), v}}))
        throw ContractViolation("greedy_embed_h: replay verification failed");
    return emb;
}

Embedding greedy_embed_bipartite(const RootedTree& t, const Graph& g, const Bipartition& p,
                                 int h, BipOrientation orient, int v) {
    if (h < 0 || v < 0 || v >= g.n())
        throw PreconditionError("greedy_embed_bipartite: bad h or root image");
    ColourClasses cls = colour_classes(t);
    const VertexSet& side_c = orient == BipOrientation::CtoA ? p.a : p.b;
    const VertexSet& side_d = orient == BipOrientation::CtoA ? p.b : p.a;
    const int k1 = cls.c.count() + h;
    const int k2 = cls.d.count() + h;
    const int delta = t.max_degree();
    if (!side_c.test(v))
        throw PreconditionError("greedy_embed_bipartite: v is not on the root's side");

    // Cross-degrees only; intra-class edges of a non-bipartite host are ignored.
    auto cross_deg = [&](int x) {
        return g.deg_into(x, side_c.test(x) ? side_d : side_c);
    };
    int min_cross = g.n() == 0 ? 0 : g.n();
    for (int x = 0; x < g.n(); ++x) min_cross = std::min(min_cross, cross_deg(x));
    if (min_cross < delta + h)
        throw PreconditionError("greedy_embed_bipartite: delta(G) >= Delta(T)+h required");
    // High-degree sets: a C-image must reach k2 vertices of D's side and
    // vice versa.
    VertexSet high(g.n());
    int low_c = 0, low_d = 0;
    for (int x = 0; x < g.n(); ++x) {
        int need = side_c.test(x) ? k2 : k1;
        if (cross_deg(x) >= need)
            high.set(x);
        else
            side_c.test(x) ? ++low_c : ++low_d;
    }
    if (low_c > h)
        throw PreconditionError("greedy_embed_bipartite: side budget exceeded on C's side");
    if (low_d > h)
        throw PreconditionError("greedy_embed_bipartite: side budget exceeded on D's side");

    Embedding emb(t.n_vertices(), g.n());
    emb.place(t.root(), v);
    VertexSet unused = VertexSet::full(g.n());
    unused.reset(v);

    auto place = [&](int tv, int parent_image) {
        const VertexSet& side = cls.c.test(tv) ? side_c : side_d;
        VertexSet cand = g.neighbors(parent_image) & side & unused & high;
        long long options = cand.count();
        int img = pick_best(g, cand, unused, high);
        if (img < 0)
            throw ContractViolation("greedy_embed_bipartite: starved despite preconditions");
        emb.place(tv, img, options);
        unused.reset(img);
    };

    for (int c : t.children(t.root())) place(c, v);
    for (int tv : t.dfs_order()) {
        if (emb.placed(tv)) continue;
        place(tv, emb.image[t.parent(tv)]);
    }
    if (!verify_embedding(t, g, emb, {{t.root(), v}}))
        throw ContractViolation("greedy_embed_bipartite: replay verification failed");
    for (int tv = 0; tv < t.n_vertices(); ++tv) {
        if (!(cls.c.test(tv) ? side_c : side_d).test(emb.image[tv]))
            throw ContractViolation("greedy_embed_bipartite: class landed on the wrong side");
    }
    return emb;
}

EmbedOutcome near_complete_embed(const RootedTree& t, const Graph& h, int v, const Rat& nu,
                                 int root_image, bool enforce_nu_range) {
    const int k = h.n() - 1;
    if (t.k() > k)
        throw PreconditionError("near_complete_embed: tree larger than |H|-1 edges");
    if (v < 0 || v >= h.n() || h.degree(v) != k)
        throw PreconditionError("near_complete_embed: v must have degree |H|-1");
    if (enforce_nu_range && !(nu > 0 && nu < Rat(1, 200)))
        throw PreconditionError("near_complete_embed: 0 < nu < 1/200 required");
    if (Rat(h.min_degree()) < (Rat(1) - 2 * nu) * k)
        throw PreconditionError("near_complete_embed: delta(H) >= (1-2nu)k required");
    for (int tv = 0; tv < t.n_vertices(); ++tv) {
        long long pending = 0;
        for (int c : t.children(tv))
            if (t.is_leaf(c)) ++pending;
        if (t.parent(tv) >= 0 && t.is_leaf(t.parent(tv))) ++pending;
        if (Rat(2 * pending) > nu * k)
            throw PreconditionError("near_complete_embed: a vertex is adjacent to > nu*k/2 leaves");
    }
    if (root_image == v)
        throw PreconditionError("near_complete_embed: the root image must avoid v");

    // Skeleton = non-leaves plus the root; leaves are matched afterwards.
    VertexSet skel(t.n_vertices());
    for (int tv = 0; tv < t.n_vertices(); ++tv)
        if (!t.is_leaf(tv) || tv == t.root()) skel.set(tv);

    VertexSet all_hosts = VertexSet::full(h.n());
    auto try_skeleton = [&](bool avoid_v, Embedding& emb) -> bool {
        emb = Embedding(t.n_vertices(), h.n());
        VertexSet unused = all_hosts;
        int r_img = root_image;
        if (r_img < 0) {
            VertexSet cand = unused;
            cand.reset(v);
            r_img = pick_best(h, cand, unused, all_hosts);
        }
        emb.place(t.root(), r_img);
        unused.reset(r_img);
        for (int tv : t.dfs_order()) {
            if (tv == t.root() || !skel.test(tv)) continue;
            VertexSet cand = h.neighbors(emb.image[t.parent(tv)]) & unused;
            if (avoid_v) cand.reset(v);
            long long options = cand.count();
            int img = pick_best(h, cand, unused, all_hosts);
            if (img < 0) return false;
            emb.place(tv, img, options);
            unused.reset(img);
        }
        return true;
    };

    // Kuhn augmenting-path matching of pending leaves onto unused hosts.
    auto match_leaves = [&](Embedding& emb) -> bool {
        std::vector<int> leaves;
        for (int tv = 0; tv < t.n_vertices(); ++tv)
            if (!skel.test(tv)) leaves.push_back(tv);
        std::vector<int> hosts;
        std::vector<int> host_index(h.n(), -1);
        for (int x = 0; x < h.n(); ++x) {
            if (!emb.used.test(x)) {
                host_index[x] = int(hosts.size());
                hosts.push_back(x);
            }
        }
        std::vector<int> host_match(hosts.size(), -1);
        std::vector<int> leaf_match(leaves.size(), -1);
        for (std::size_t li = 0; li < leaves.size(); ++li) {
            std::vector<bool> tried(hosts.size(), false);
            // Iterative augmentation from leaf li.
            std::function<bool(int)> augment = [&](int leaf_i) -> bool {
                int parent_img = emb.image[t.parent(leaves[leaf_i])];
                const VertexSet& nb = h.neighbors(parent_img);
                for (int x = nb.first(); x >= 0; x = nb.next(x)) {
                    int hi = host_index[x];
                    if (hi < 0 || tried[hi]) continue;
                    tried[hi] = true;
                    if (host_match[hi] < 0 || augment(host_match[hi])) {
                        host_match[hi] = leaf_i;
                        leaf_match[leaf_i] = hi;
                        return true;
                    }
                }
                return false;
            };
            if (!augment(int(li))) return false;  // Hall's condition fails here
        }
        for (std::size_t li = 0; li < leaves.size(); ++li)
            emb.place(leaves[li], hosts[leaf_match[li]]);
        return true;
    };

    for (bool avoid_v : {true, false}) {
        Embedding emb;
        if (!try_skeleton(avoid_v, emb)) continue;
        Embedding attempt = emb;
        if (match_leaves(attempt)) {
            PinList pins;
            if (root_image >= 0) pins.push_back({t.root(), root_image});
            if (!verify_embedding(t, h, attempt, pins))
                throw ContractViolation("near_complete_embed: replay verification failed");
            return {attempt, false};
        }
        // Matching failed; exact search with the placed skeleton pinned.
        PinList pins;
        for (int tv = 0; tv < t.n_vertices(); ++tv)
            if (emb.placed(tv)) pins.push_back({tv, emb.image[tv]});
        ExactResult ex = backtracking_embed(t, h, pins);
        if (ex.status == ExactStatus::Found) return {ex.emb, true};
    }
    // Last resort: exact search constrained only by the root pin.
    PinList pins;
    if (root_image >= 0) pins.push_back({t.root(), root_image});
    std::vector<VertexSet> allowed(t.n_vertices(), all_hosts);
    if (root_image < 0) allowed[t.root()].reset(v);
    ExactResult ex = backtracking_embed(t, h, pins, std::numeric_limits<long long>::max(),
                                        SearchOrder::Primary, &allowed);
    if (ex.status == ExactStatus::Found) return {ex.emb, true};
    throw ContractViolation("near_complete_embed: exact fallback found no embedding");
}

}  // namespace treesos
