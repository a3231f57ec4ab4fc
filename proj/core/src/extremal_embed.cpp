#include "treesos/extremal_embed.hpp"

#include <algorithm>
#include <deque>

#include "treesos/concentration.hpp"

namespace treesos {

DegreeProfile compute_degree_profile(const Graph& g, int k, const Rat& sqrt_eps) {
    DegreeProfile p{VertexSet(g.n()), VertexSet(g.n()), -1, VertexSet(g.n())};
    const long long x_cut = floor_rat((Rat(1) - sqrt_eps) * k);
    for (int v = 0; v < g.n(); ++v) {
        if (g.degree(v) <= x_cut) p.x.set(v);
        if (g.degree(v) >= k) p.y.set(v);
    }
    int best = -1, best_cnt = -1;
    for (int v = p.y.first(); v >= 0; v = p.y.next(v)) {
        int cnt = g.deg_into(v, p.x);
        if (best < 0 || cnt < best_cnt) {
            best = v;
            best_cnt = cnt;
        }
    }
    p.v_star = best;
    if (best >= 0) p.x_v_star = g.neighbors(best) & p.x;
    return p;
}

// ---------------------------------------------------------------------------
// Short connecting paths (unit-capacity flow on the <=3-step layered graph)

ShortPaths short_connecting_paths(const Graph& g, int x, int x_prime, const VertexSet& avoid,
                                  long long want) {
    ShortPaths out;
    if (x == x_prime) throw PreconditionError("short_connecting_paths: x == x'");
    // Node ids: per internal candidate an in/out pair, then source and sink.
    std::vector<int> cand;
    for (int v = 0; v < g.n(); ++v) {
        if (v == x || v == x_prime || avoid.test(v)) continue;
        if (!g.has_edge(x, v) && !g.has_edge(x_prime, v)) continue;
        cand.push_back(v);
    }
    const int m = int(cand.size());
    const int S = 2 * m, T = 2 * m + 1;
    auto in_node = [](int i) { return 2 * i; };
    auto out_node = [](int i) { return 2 * i + 1; };
    struct Edge { int to, cap; };
    std::vector<Edge> edges;
    std::vector<std::vector<int>> adj(2 * m + 2);
    auto add_arc = [&](int u, int w) {
        adj[u].push_back(int(edges.size()));
        edges.push_back({w, 1});
        adj[w].push_back(int(edges.size()));
        edges.push_back({u, 0});
    };
    for (int i = 0; i < m; ++i) {
        add_arc(in_node(i), out_node(i));
        if (g.has_edge(x, cand[i])) add_arc(S, in_node(i));
        if (g.has_edge(x_prime, cand[i])) add_arc(out_node(i), T);
    }
    for (int i = 0; i < m; ++i) {
        if (!g.has_edge(x, cand[i])) continue;
        for (int j = 0; j < m; ++j) {
            if (i == j || !g.has_edge(x_prime, cand[j])) continue;
            if (g.has_edge(cand[i], cand[j])) add_arc(out_node(i), in_node(j));
        }
    }
    // BFS augmentation finds shortest routes first, so 2-step paths win.
    long long flow = 0;
    while (true) {
        std::vector<int> pre(2 * m + 2, -1);
        std::deque<int> q{S};
        std::vector<bool> seen(2 * m + 2, false);
        seen[S] = true;
        while (!q.empty() && !seen[T]) {
            int u = q.front();
            q.pop_front();
            for (int ei : adj[u]) {
                int w = edges[ei].to;
                if (edges[ei].cap > 0 && !seen[w]) {
                    seen[w] = true;
                    pre[w] = ei;
                    q.push_back(w);
                }
            }
        }
        if (!seen[T]) break;
        for (int u = T; u != S;) {
            int ei = pre[u];
            edges[ei].cap -= 1;
            edges[ei ^ 1].cap += 1;
            u = edges[ei ^ 1].to;
        }
        ++flow;
    }
    out.max_possible = flow + (g.has_edge(x, x_prime) ? 1 : 0);
    if (g.has_edge(x, x_prime)) out.paths.push_back({x, x_prime});
    // Decompose the flow: every saturated S->in arc starts one path.
    auto arc_saturated = [&](int from, int to) {
        for (int ei : adj[from])
            if ((ei & 1) == 0 && edges[ei].to == to && edges[ei].cap == 0) return true;
        return false;
    };
    for (int i = 0; i < m; ++i) {
        if (!arc_saturated(S, in_node(i))) continue;
        if (arc_saturated(out_node(i), T)) {
            out.paths.push_back({x, cand[i], x_prime});
            continue;
        }
        for (int ei : adj[out_node(i)]) {
            if ((ei & 1) != 0 || edges[ei].cap != 0) continue;
            int w = edges[ei].to;
            if (w == in_node(i) || w == T || w == S) continue;
            out.paths.push_back({x, cand[i], cand[w / 2], x_prime});
            break;
        }
    }
    std::stable_sort(out.paths.begin(), out.paths.end(),
                     [](const auto& p1, const auto& p2) { return p1.size() < p2.size(); });
    out.shortfall = out.max_possible < want;
    if (!out.shortfall && (long long)out.paths.size() > want) out.paths.resize(want);
    return out;
}

// ---------------------------------------------------------------------------
// Reserved high-degree set Y'

ReserveResult reserve_high_degree_set(const Graph& g, const DegreeProfile& profile, int k,
                                      const Rat& eps, const Rat& sqrt_eps) {
    ReserveResult out{VertexSet(g.n()), VertexSet(g.n()), {}};
    const long long xsz = profile.x.count();
    const long long cap = floor_rat(5 * sqrt_eps * k);
    const long long zcap = floor_rat(2 * eps * k);
    std::vector<int> ys = profile.y.to_vector();
    std::sort(ys.begin(), ys.end(), [&](int u, int v) {
        if (g.degree(u) != g.degree(v)) return g.degree(u) > g.degree(v);
        return u < v;
    });
    bool big_y = (long long)ys.size() >= cap + 1;
    long long taken = 0;
    for (int v : ys) {
        if (v == profile.v_star) continue;
        if (taken >= cap) break;
        out.y_prime.set(v);
        ++taken;
    }
    stage(out.chain, big_y ? "reserve.case_large_Y" : "reserve.case_small_Y",
          Rat((long long)ys.size()), big_y ? ">=" : "<", Rat(cap + 1));
    stage(out.chain, "reserve.y_prime_size", Rat(out.y_prime.count()), "<=", Rat(cap));
    for (int v = 0; v < g.n(); ++v) {
        if (profile.x.test(v)) continue;
        if (g.deg_into(v, out.y_prime) < xsz) out.z_bad.set(v);
    }
    if (!stage(out.chain, "reserve.z_bad_size", Rat(out.z_bad.count()), "<=", Rat(zcap)))
        throw EmbedFailure("reserve_high_degree_set: |Z_bad| > 2 eps k (" + out.chain.failing() +
                           ")");
    return out;
}

// ---------------------------------------------------------------------------
// Near-complete host pipeline

namespace {

// Candidate choice for the pipeline's greedy placements: prefer images
// outside X, then maximum residual degree into unused vertices, then id.
int pipeline_pick(const Graph& g, const VertexSet& cand, const VertexSet& unused,
                  const VertexSet& x_set) {
    int best = -1, best_res = -1;
    bool best_in_x = true;
    for (int c = cand.first(); c >= 0; c = cand.next(c)) {
        bool in_x = x_set.test(c);
        int res = g.neighbors(c).count_and(unused);
        if (best < 0 || (best_in_x && !in_x) || (best_in_x == in_x && res > best_res)) {
            best = c;
            best_res = res;
            best_in_x = in_x;
        }
    }
    return best;
}

struct StarPipeline {
    const Graph& g;
    const RootedTree& t;
    int v_star;
    const VertexSet& x_set;
    Embedding emb;
    VertexSet unused;

    StarPipeline(const Graph& g_, const RootedTree& t_, int v_star_, const VertexSet& x_)
        : g(g_), t(t_), v_star(v_star_), x_set(x_), emb(t_.n_vertices(), g_.n()),
          unused(VertexSet::full(g_.n())) {}

    void place(int tv, int hv, long long options = -1) {
        emb.place(tv, hv, options);
        unused.reset(hv);
    }

    void place_greedy(int tv, int parent_image, const VertexSet& zone, const char* what) {
        VertexSet cand = g.neighbors(parent_image) & unused & zone;
        cand.reset(v_star);
        long long options = cand.count();
        int img = pipeline_pick(g, cand, unused, x_set);
        if (img < 0)
            throw EmbedFailure(std::string("embed_almost_complete: starvation placing ") + what);
        place(tv, img, options);
    }
};

}  // namespace

ExtremalRunResult embed_almost_complete(const Graph& g, int k, const RootedTree& t,
                                        const ExtremalConfig& cfg) {
    const int n = g.n();
    if (t.k() != k) throw PreconditionError("embed_almost_complete: T must have k edges");
    if (!(Rat(n) <= (Rat(1) + cfg.eps) * k))
        throw PreconditionError("embed_almost_complete: n <= (1+eps)k required");
    if (!average_degree_exceeds(g, k))
        throw PreconditionError("embed_almost_complete: d(G) > k-1 required");
    if (Rat(2 * g.min_degree()) < Rat(k))
        throw PreconditionError("embed_almost_complete: delta(G) >= k/2 required");
    const Rat delta_cap = cfg.delta_t_cap.value_or(sqrt_lower(Rat(k)) / 1000);
    if (Rat(t.max_degree()) > delta_cap)
        throw PreconditionError("embed_almost_complete: Delta(T) exceeds the configured cap");

    DegreeProfile pr = compute_degree_profile(g, k, cfg.sqrt_eps);
    CertificateChain chain;
    if (pr.v_star < 0)
        throw ContractViolation("embed_almost_complete: Y empty despite d(G) > k-1");

    stage(chain, "profile.k_vs_eps", Rat(k) * cfg.sqrt_eps, ">=", Rat(2));
    stage(chain, "profile.X_lt_2sqrtepsY", Rat(pr.x.count()), "<", 2 * cfg.sqrt_eps * pr.y.count());
    stage(chain, "profile.X_lt_3sqrtepsK", Rat(pr.x.count()), "<", 3 * cfg.sqrt_eps * k);

    auto finish_with_fallback = [&](const std::string& why) -> ExtremalRunResult {
        ExactResult ex = backtracking_embed(t, g, {}, cfg.fallback_budget);
        if (ex.status == ExactStatus::Found) {
            ExtremalRunResult r;
            r.emb = ex.emb;
            r.fallback_used = true;
            r.route = "fallback: " + why;
            r.chain = chain;
            return r;
        }
        throw EmbedFailure("embed_almost_complete: " + why +
                           (ex.status == ExactStatus::BudgetExhausted
                                ? " (fallback budget exhausted)"
                                : " (fallback proved non-containment)"));
    };

    // Route 1: X_{v*} empty; v* plus k of its neighbours already meets the
    // near-complete finisher's hypotheses.
    if (pr.x_v_star.empty()) {
        std::vector<int> nb = g.neighbors(pr.v_star).to_vector();
        std::sort(nb.begin(), nb.end(), [&](int u, int v) {
            if (g.degree(u) != g.degree(v)) return g.degree(u) > g.degree(v);
            return u < v;
        });
        VertexSet hv(n);
        hv.set(pr.v_star);
        for (int i = 0; i < k; ++i) hv.set(nb[i]);
        InducedSubgraph h = induced_subgraph(g, hv);
        int v_local = -1;
        for (std::size_t i = 0; i < h.to_host.size(); ++i)
            if (h.to_host[i] == pr.v_star) v_local = int(i);
        try {
            EmbedOutcome oc =
                near_complete_embed(t, h.graph, v_local, cfg.sqrt_eps, -1, cfg.enforce_nu_range);
            ExtremalRunResult r;
            r.emb = Embedding(t.n_vertices(), n);
            for (int tv = 0; tv < t.n_vertices(); ++tv)
                r.emb.place(tv, h.to_host[oc.emb.image[tv]], oc.emb.trace[tv]);
            r.fallback_used = oc.fallback_used;
            r.route = "near-complete (X_v* empty)";
            r.chain = chain;
            if (!verify_embedding(t, g, r.emb))
                throw ContractViolation("embed_almost_complete: pullback replay failed");
            return r;
        } catch (const ContractViolation& e) {
            return finish_with_fallback(e.what());
        } catch (const PreconditionError& e) {
            return finish_with_fallback(e.what());
        }
    }

    // Route 2: embed a small subtree T* so that the low-degree neighbourhood
    // of v* is used up, then finish on v*'s remaining neighbourhood.
    try {
        Rat gamma = 168 * cfg.sqrt_eps;
        if (gamma > 1) gamma = Rat(1);
        stage(chain, "cut.gamma_k", gamma * k, ">=", Rat(200));
        CutCertificate cut = find_cut_subtree(t, gamma);
        TreePiece star = induced_tree(t, cut.subtree, cut.anchor);
        const RootedTree& ts = star.tree;
        stage(chain, "cut.size_low", 2 * Rat(ts.n_vertices()), ">=", gamma * k);
        stage(chain, "cut.size_high", Rat(ts.n_vertices()), "<=", gamma * k);

        LeavesOrBarePaths split = leaves_or_bare_paths(ts, 3);
        StarPipeline pipe(g, t, pr.v_star, pr.x);
        const VertexSet zone_all = VertexSet::full(n);

        {
            VertexSet cand = VertexSet::full(n);
            cand.reset(pr.v_star);
            cand -= pr.x;
            int img = pipeline_pick(g, cand, pipe.unused, pr.x);
            if (img < 0) throw EmbedFailure("no admissible anchor image");
            stage(chain, "anchor.degree", Rat(g.degree(img)), ">=", (Rat(1) - cfg.sqrt_eps) * k);
            pipe.place(star.to_orig[ts.root()], img);
        }

        const long long x_used_target = pr.x_v_star.count();

        if (!split.is_leaves) {
            // Case 1: bare paths detour through unused X_{v*} vertices.
            stage(chain, "case1.X_lt_B", Rat(pr.x.count()), "<",
                  Rat((long long)split.paths.size()));
            std::vector<int> path_entry(ts.n_vertices(), -1);
            std::vector<std::vector<int>> paths;
            for (const auto& p : split.paths) {
                bool has_anchor = false;
                for (int v : p) has_anchor |= v == ts.root();
                if (has_anchor) continue;  // the anchor is embedded up front
                std::vector<int> q = p;
                if (ts.depth(q.front()) > ts.depth(q.back())) std::reverse(q.begin(), q.end());
                path_entry[q.front()] = int(paths.size());
                paths.push_back(q);
            }
            VertexSet x_star_unused = pr.x_v_star;
            for (int sv : ts.dfs_order()) {
                int tv = star.to_orig[sv];
                if (pipe.emb.placed(tv)) continue;
                int parent_img = pipe.emb.image[star.to_orig[ts.parent(sv)]];
                int pe = path_entry[sv];
                if (pe >= 0 && x_star_unused.any()) {
                    int x_target = x_star_unused.first();
                    VertexSet avoid = pipe.emb.used;
                    avoid.set(pr.v_star);
                    ShortPaths sp = short_connecting_paths(g, parent_img, x_target, avoid, 1);
                    if (sp.shortfall)
                        throw EmbedFailure("no connecting path into X_v*");
                    const std::vector<int>& route = sp.paths[0];
                    const std::vector<int>& bare = paths[pe];
                    std::size_t ri = 1;
                    for (std::size_t bi = 0; bi < bare.size(); ++bi) {
                        int btv = star.to_orig[bare[bi]];
                        if (ri < route.size()) {
                            pipe.place(btv, route[ri++]);
                        } else {
                            int prev = pipe.emb.image[star.to_orig[bare[bi - 1]]];
                            pipe.place_greedy(btv, prev, zone_all, "bare-path tail");
                        }
                    }
                    x_star_unused.reset(x_target);
                } else {
                    pipe.place_greedy(tv, parent_img, zone_all, "case-1 greedy");
                }
            }
            stage(chain, "case1.x_star_used", Rat(x_used_target - x_star_unused.count()), ">=",
                  Rat(std::min(x_used_target, (long long)paths.size())));
        } else {
            // Case 2: leaf-parents next to Y', pending leaves fill X.
            ReserveResult reserve = reserve_high_degree_set(g, pr, k, cfg.eps, cfg.sqrt_eps);
            for (auto& c : reserve.chain.checks) chain.checks.push_back(c);
            std::vector<int> parents;
            std::vector<std::vector<int>> pending(ts.n_vertices());
            for (int sv = 0; sv < ts.n_vertices(); ++sv) {
                if (sv == ts.root()) continue;
                for (int c : ts.children(sv))
                    if (ts.tree_degree(c) == 1) pending[sv].push_back(c);
                if (!pending[sv].empty()) parents.push_back(sv);
            }
            std::sort(parents.begin(), parents.end(), [&](int u, int v) {
                if (pending[u].size() != pending[v].size())
                    return pending[u].size() > pending[v].size();
                return u < v;
            });
            const long long xsz = pr.x.count();
            VertexSet u_set(ts.n_vertices()), l_set(ts.n_vertices());
            long long l_count = 0;
            for (int sv : parents) {
                if (l_count >= xsz) break;
                if (ts.parent(sv) >= 0 && u_set.test(ts.parent(sv))) continue;
                bool child_in_u = false;
                for (int c : ts.children(sv)) child_in_u |= u_set.test(c);
                if (child_in_u) continue;
                u_set.set(sv);
                for (int c : pending[sv]) {
                    l_set.set(c);
                    ++l_count;
                }
            }
            stage(chain, "case2.pending_leaves", Rat(l_count), ">=", Rat(xsz));
            stage(chain, "case2.U_size", Rat(u_set.count()), "<=", Rat(std::max(xsz, 1LL)));
            VertexSet u_parents(ts.n_vertices());
            for (int sv = u_set.first(); sv >= 0; sv = u_set.next(sv))
                if (ts.parent(sv) >= 0) u_parents.set(ts.parent(sv));

            VertexSet zone_default = VertexSet::full(n);
            zone_default -= reserve.y_prime;
            VertexSet zone_parent = zone_default;
            zone_parent -= pr.x;
            zone_parent -= reserve.z_bad;

            for (int sv : ts.dfs_order()) {
                int tv = star.to_orig[sv];
                if (pipe.emb.placed(tv) || l_set.test(sv)) continue;
                int parent_img = pipe.emb.image[star.to_orig[ts.parent(sv)]];
                if (u_set.test(sv)) {
                    VertexSet cand = g.neighbors(parent_img) & pipe.unused & reserve.y_prime;
                    long long options = cand.count();
                    int img = pipeline_pick(g, cand, pipe.unused, pr.x);
                    if (img < 0) throw EmbedFailure("Y' starved for a U member");
                    pipe.place(tv, img, options);
                } else if (u_parents.test(sv)) {
                    pipe.place_greedy(tv, parent_img, zone_parent, "U-parent");
                } else {
                    pipe.place_greedy(tv, parent_img, zone_default, "case-2 greedy");
                }
            }
            auto x_used = [&]() { return (long long)pipe.emb.used.count_and(pr.x); };
            for (int sv = l_set.first(); sv >= 0; sv = l_set.next(sv)) {
                int tv = star.to_orig[sv];
                int parent_img = pipe.emb.image[star.to_orig[ts.parent(sv)]];
                if (x_used() < x_used_target) {
                    VertexSet cand = g.neighbors(parent_img) & pipe.unused & pr.x;
                    long long options = cand.count();
                    int img = pipeline_pick(g, cand, pipe.unused, VertexSet(n));
                    if (img < 0) throw EmbedFailure("X starved for a pending leaf");
                    pipe.place(tv, img, options);
                } else {
                    pipe.place_greedy(tv, parent_img, zone_all, "leftover leaf");
                }
            }
            stage(chain, "case2.x_used", Rat(x_used()), ">=", Rat(x_used_target));
        }

        // Finisher: H = {v*, phi(t*)} plus fresh neighbours of v*.
        int anchor_tv = star.to_orig[ts.root()];
        int anchor_img = pipe.emb.image[anchor_tv];
        VertexSet rest = VertexSet::full(t.n_vertices());
        rest -= cut.subtree;
        rest.set(anchor_tv);
        bool finisher_fallback = false;
        if (rest.count() >= 2) {
            TreePiece tp = induced_tree(t, rest, anchor_tv);
            const int t_prime_n = tp.tree.n_vertices();
            VertexSet pool = g.neighbors(pr.v_star) & pipe.unused;
            pool -= pr.x_v_star;
            pool.reset(anchor_img);
            if (!stage(chain, "finish.pool", Rat(pool.count()), ">=", Rat(t_prime_n - 2)))
                throw EmbedFailure("N(v*) pool smaller than |T'|-2");
            std::vector<int> pl = pool.to_vector();
            std::sort(pl.begin(), pl.end(), [&](int u, int v) {
                if (g.degree(u) != g.degree(v)) return g.degree(u) > g.degree(v);
                return u < v;
            });
            VertexSet hv(n);
            hv.set(pr.v_star);
            hv.set(anchor_img);
            for (int i = 0; i < t_prime_n - 2; ++i) hv.set(pl[i]);
            InducedSubgraph h = induced_subgraph(g, hv);
            int v_local = -1, pin_local = -1;
            for (std::size_t i = 0; i < h.to_host.size(); ++i) {
                if (h.to_host[i] == pr.v_star) v_local = int(i);
                if (h.to_host[i] == anchor_img) pin_local = int(i);
            }
            if (!stage(chain, "finish.dominating", Rat(h.graph.degree(v_local)), "==",
                       Rat(h.graph.n() - 1)))
                throw EmbedFailure("v* does not dominate the finisher host");
            EmbedOutcome oc = near_complete_embed(tp.tree, h.graph, v_local, 86 * cfg.sqrt_eps,
                                                  pin_local, cfg.enforce_nu_range);
            finisher_fallback = oc.fallback_used;
            for (int sv = 0; sv < t_prime_n; ++sv) {
                int tv = tp.to_orig[sv];
                if (tv == anchor_tv) continue;
                pipe.place(tv, h.to_host[oc.emb.image[sv]], oc.emb.trace[sv]);
            }
        }

        ExtremalRunResult r;
        r.emb = pipe.emb;
        r.fallback_used = finisher_fallback;
        r.route =
            split.is_leaves ? "cut-subtree case 2 (leaves)" : "cut-subtree case 1 (bare paths)";
        r.chain = chain;
        if (!verify_embedding(t, g, r.emb))
            throw ContractViolation("embed_almost_complete: final replay failed");
        return r;
    } catch (const EmbedFailure& e) {
        return finish_with_fallback(e.what());
    } catch (const ContractViolation& e) {
        return finish_with_fallback(e.what());
    } catch (const PreconditionError& e) {
        // An inner lemma rejected desk-scale parameters; record and fall back.
        return finish_with_fallback(e.what());
    }
}

// ---------------------------------------------------------------------------
// Almost complete bipartite hosts

ExtremalRunResult embed_almost_complete_bipartite(const Graph& g, const Bipartition& p, int k,
                                                  int delta_cap, const RootedTree& t) {
    const Rat eps = Rat(1, 25LL * delta_cap * delta_cap);
    const Rat sqrt_eps = Rat(1, 5LL * delta_cap);  // exact square root
    if (t.k() != k)
        throw PreconditionError("embed_almost_complete_bipartite: T must have k edges");
    if (t.max_degree() > delta_cap)
        throw PreconditionError("embed_almost_complete_bipartite: Delta(T) > Delta");
    if (Rat(k) < 8LL * delta_cap * delta_cap)
        throw PreconditionError("embed_almost_complete_bipartite: k >= 8 Delta^2 required");
    VertexSet a = p.a, b = p.b;
    if (a.count() > b.count()) std::swap(a, b);
    const long long asz = a.count(), bsz = b.count();
    const long long n = g.n();
    if (!(Rat(bsz) <= (Rat(1) + eps) * k) || !(Rat(asz) <= (Rat(1) + eps) * k))
        throw PreconditionError("embed_almost_complete_bipartite: a side exceeds (1+eps)k");
    if (!average_degree_exceeds(g, k))
        throw PreconditionError("embed_almost_complete_bipartite: d(G) > k-1 required");
    if (Rat(2 * g.min_degree()) < Rat(k))
        throw PreconditionError("embed_almost_complete_bipartite: delta(G) >= k/2 required");
    if (!is_beta_bipartite(g, p, eps / 2))
        throw PreconditionError("embed_almost_complete_bipartite: not 1/(50 Delta^2)-bipartite");

    CertificateChain chain;
    const long long e_ab = g.edges_between(a, b);
    stage(chain, "bip.cross_edges", Rat(e_ab), ">=", (Rat(1) - eps) * k * n / 2);
    stage(chain, "bip.B_large", Rat(bsz), ">=", (Rat(1) - eps) * k);
    stage(chain, "bip.A_large", Rat(asz), ">=", (Rat(1) - 3 * eps) * k);
    Rat mean_a = Rat(e_ab, asz), mean_b = Rat(e_ab, bsz);
    stage(chain, "bip.meanA", mean_a, ">", (Rat(1) - eps) * k);
    stage(chain, "bip.meanB", mean_b, ">", (Rat(1) - 4 * eps) * k);
    if (!chain.all_ok())
        throw EmbedFailure("embed_almost_complete_bipartite: counting stage failed: " +
                           chain.failing());

    std::vector<int> av = a.to_vector(), bv = b.to_vector();
    std::vector<Rat> fa, fb;
    for (int v : av) fa.push_back(Rat(g.deg_into(v, b)));
    for (int v : bv) fb.push_back(Rat(g.deg_into(v, a)));
    VertexSet a_good(g.n()), b_good(g.n());
    try {
        VertexSet ga = concentration_bound(fa, (Rat(1) - eps) * k, 4 * eps);
        VertexSet gb = concentration_bound(fb, (Rat(1) - 4 * eps) * k, 9 * eps);
        for (int i = ga.first(); i >= 0; i = ga.next(i)) a_good.set(av[i]);
        for (int i = gb.first(); i >= 0; i = gb.next(i)) b_good.set(bv[i]);
    } catch (const PreconditionError& e) {
        throw EmbedFailure(std::string("embed_almost_complete_bipartite: concentration: ") +
                           e.what());
    }
    stage(chain, "bip.A0_small", Rat(asz - a_good.count()), "<=", 2 * sqrt_eps * asz);
    stage(chain, "bip.B0_small", Rat(bsz - b_good.count()), "<=", 3 * sqrt_eps * bsz);

    VertexSet hv = a_good | b_good;
    InducedSubgraph h = induced_subgraph(g, hv);
    VertexSet ha(h.graph.n()), hb(h.graph.n());
    for (std::size_t i = 0; i < h.to_host.size(); ++i)
        (a_good.test(h.to_host[i]) ? ha : hb).set(int(i));
    long long min_cross = h.graph.n();
    for (int v = 0; v < h.graph.n(); ++v)
        min_cross = std::min<long long>(min_cross, h.graph.deg_into(v, ha.test(v) ? hb : ha));
    if (!stage(chain, "bip.H_min_degree", Rat(min_cross), ">=", (Rat(1) - 5 * sqrt_eps) * k))
        throw EmbedFailure("embed_almost_complete_bipartite: delta(H) below (1-5 sqrt(eps))k");

    ColourClasses cls = colour_classes(t);
    const long long csz = cls.c.count(), dsz = cls.d.count();
    stage(chain, "bip.colour_fact", Rat(std::min(csz, dsz)) * t.max_degree(), ">=", Rat(k));
    BipOrientation orient;
    if (csz <= ha.count() && dsz <= hb.count() && min_cross >= std::max(csz, dsz))
        orient = BipOrientation::CtoA;
    else if (csz <= hb.count() && dsz <= ha.count() && min_cross >= std::max(csz, dsz))
        orient = BipOrientation::CtoB;
    else
        throw EmbedFailure("embed_almost_complete_bipartite: no orientation fits H");
    const VertexSet& root_side = orient == BipOrientation::CtoA ? ha : hb;
    int root_img = -1, best_deg = -1;
    for (int v = root_side.first(); v >= 0; v = root_side.next(v)) {
        if (h.graph.degree(v) > best_deg) {
            best_deg = h.graph.degree(v);
            root_img = v;
        }
    }
    Embedding local = greedy_embed_bipartite(t, h.graph, Bipartition(ha, hb), 0, orient, root_img);

    ExtremalRunResult r;
    r.emb = Embedding(t.n_vertices(), g.n());
    for (int tv = 0; tv < t.n_vertices(); ++tv)
        r.emb.place(tv, h.to_host[local.image[tv]], local.trace[tv]);
    r.route = "bipartite greedy on trimmed host";
    r.chain = chain;
    if (!verify_embedding(t, g, r.emb))
        throw ContractViolation("embed_almost_complete_bipartite: pullback replay failed");
    return r;
}

}  // namespace treesos
