#include "treesos/dense_embed.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "treesos/concentration.hpp"
#include "treesos/greedy.hpp"

namespace treesos {

// ---------------------------------------------------------------------------
// Structure extraction (seed cluster X, matchings M_W and M_V, pair (A,B))

FindStructureResult find_structure(const Graph& cleaned, const RegularPartition& p, int k,
                                   const Rat& delta, const CheckMode& mode) {
    const int n = cleaned.n();
    {
        long long high = 0;
        for (int v = 0; v < n; ++v)
            if (Rat(cleaned.degree(v)) >= (Rat(1) + delta) * k) ++high;
        if (Rat(high) < delta * n)
            throw PreconditionError("find_structure: too few high-degree vertices");
        if (Rat(cleaned.min_degree()) < (Rat(1) + delta) * k / 2)
            throw PreconditionError("find_structure: delta(G) >= (1+delta)k/2 required");
    }
    FindStructureResult out;
    const long long t_param = ceil_rat((Rat(1) + delta) * k / 2);
    out.base = matching_structure(cleaned, p, t_param, mode);
    const Graph& g2 = out.base.g2.graph;
    const RegularPartition& hp = out.base.halved;
    const Graph& rg = out.base.reduced.graph;
    const int ell = hp.cluster_count();
    const long long nprime = (long long)hp.cluster_size() * ell;

    StructureCertificate& cert = out.cert;
    // Seed cluster: any cluster holding a vertex of degree >= (1+delta/2)k has
    // reduced degree >= (1+delta/2)k |R'|/n' on the cleaned graph; take the
    // one of maximum reduced degree among those.
    const Rat high_deg = (Rat(1) + delta / 2) * k;
    std::vector<int> cluster_of(g2.n(), -1);
    for (int c = 0; c < ell; ++c)
        for (int v = hp.clusters[c].first(); v >= 0; v = hp.clusters[c].next(v)) cluster_of[v] = c;
    int best = -1;
    for (int v = 0; v < g2.n(); ++v) {
        if (Rat(g2.degree(v)) < high_deg) continue;
        int c = cluster_of[v];
        if (best < 0 || rg.degree(c) > rg.degree(best) ||
            (rg.degree(c) == rg.degree(best) && c < best))
            best = c;
    }
    if (best < 0) throw EmbedFailure("find_structure: no qualifying seed cluster X");
    cert.x_cluster = best;
    stage(cert.properties, "structure.X_degree", Rat(rg.degree(best)), ">=",
          high_deg * ell / nprime);

    const VertexSet nx = rg.neighbors(best);
    std::vector<int> role(ell, 0);  // 1 = in M, 2 = in I
    for (auto [c, d] : out.base.ms.matching) role[c] = role[d] = 1;
    for (int c : out.base.ms.independent) role[c] = 2;

    // M_W: matching edges with both ends next to X, then a maximal extension
    // by I-to-matched pairs inside N(X).
    VertexSet in_mw(ell);
    for (auto [c, d] : out.base.ms.matching) {
        if (nx.test(c) && nx.test(d)) {
            cert.m_w.push_back({c, d});
            in_mw.set(c);
            in_mw.set(d);
        }
    }
    for (int i = 0; i < ell; ++i) {
        if (role[i] != 2 || !nx.test(i) || in_mw.test(i)) continue;
        for (int m = rg.neighbors(i).first(); m >= 0; m = rg.neighbors(i).next(m)) {
            if (role[m] != 1 || !nx.test(m) || in_mw.test(m)) continue;
            cert.m_w.push_back({i, m});
            in_mw.set(i);
            in_mw.set(m);
            break;
        }
    }
    // A: independent clusters next to X left out of M_W; B: their neighbours.
    VertexSet a_set(ell), b_set(ell);
    for (int i = 0; i < ell; ++i)
        if (role[i] == 2 && nx.test(i) && !in_mw.test(i)) a_set.set(i);
    for (int i = a_set.first(); i >= 0; i = a_set.next(i))
        for (int m = rg.neighbors(i).first(); m >= 0; m = rg.neighbors(i).next(m))
            if (!in_mw.test(m) && !a_set.test(m)) b_set.set(m);
    cert.a_part = a_set.to_vector();
    cert.b_part = b_set.to_vector();
    // M_V: matching edges avoiding V(M_W) with an endpoint next to X, stored
    // as (inside-N(X), outside).
    for (auto [c, d] : out.base.ms.matching) {
        if (in_mw.test(c) || in_mw.test(d)) continue;
        bool cin = nx.test(c), din = nx.test(d);
        if (!cin && !din) continue;
        if (cin && din)
            throw ContractViolation("find_structure: M-edge inside N(X) escaped M_W");
        cert.m_v.push_back(cin ? std::make_pair(c, d) : std::make_pair(d, c));
    }

    // Properties (I)-(IV).
    {
        VertexSet in_mv(ell);
        for (auto [c, d] : cert.m_v) {
            in_mv.set(c);
            in_mv.set(d);
        }
        stage(cert.properties, "structure.I_mw_mv_disjoint", Rat((in_mw & in_mv).count()), "==",
              Rat(0));
        stage(cert.properties, "structure.I_a_mv_disjoint", Rat((a_set & in_mv).count()), "==",
              Rat(0));
        stage(cert.properties, "structure.II_mw_in_nx", Rat((in_mw & nx).count()), "==",
              Rat(in_mw.count()));
        stage(cert.properties, "structure.II_a_in_nx", Rat((a_set & nx).count()), "==",
              Rat(a_set.count()));
        long long mv_exact_one = 0;
        for (auto [c, d] : cert.m_v) mv_exact_one += nx.test(c) && !nx.test(d);
        stage(cert.properties, "structure.II_mv_one_end", Rat(mv_exact_one), "==",
              Rat((long long)cert.m_v.size()));
        stage(cert.properties, "structure.III_mass",
              Rat(2 * (long long)cert.m_w.size()) + Rat((long long)cert.m_v.size()) +
                  Rat(a_set.count()),
              ">=", (Rat(1) + delta / 2) * k * ell / nprime);
        Rat iv_rhs = (Rat(1) + delta / 2) * Rat(k, 2) * Rat(ell, nprime) -
                     Rat((long long)cert.m_w.size());
        bool iv_ok = true;
        for (int a = a_set.first(); a >= 0; a = a_set.next(a)) {
            long long deg_ab = rg.neighbors(a).count_and(b_set);
            if (Rat(deg_ab) < iv_rhs) iv_ok = false;
        }
        stage(cert.properties, "structure.IV_a_degree", Rat(iv_ok ? 1 : 0), "==", Rat(1));
    }
    if (!cert.properties.all_ok())
        throw EmbedFailure("find_structure: certificate failed: " + cert.properties.failing());
    return out;
}

// ---------------------------------------------------------------------------
// Balancing lemma

std::vector<int> balance_components(const std::vector<BalanceItem>& items, const Rat& m_cap,
                                    const Rat& lambda) {
    for (const auto& it : items) {
        if (it.a < 0 || it.b < 0 || it.a + it.b > lambda)
            throw PreconditionError("balance_components: need 0 <= a_i, b_i and a_i+b_i <= lambda");
    }
    std::vector<int> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    // b/a ascending; a = 0 sorts last (ratio +infinity), ties by index.
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        const auto& x = items[i];
        const auto& y = items[j];
        bool xinf = x.a == 0, yinf = y.a == 0;
        if (xinf != yinf) return yinf;
        if (!xinf && x.b * y.a != y.b * x.a) return x.b * y.a < y.b * x.a;
        return i < j;
    });
    std::vector<int> chosen;
    Rat total = 0;
    for (int i : order) {
        if (total + items[i].a + items[i].b > m_cap) break;
        total += items[i].a + items[i].b;
        chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end());

    // Replay both conclusions before returning.
    Rat sum_all = 0, sa_all = 0, sb_all = 0, sa_j = 0, sb_j = 0;
    for (const auto& it : items) {
        sum_all += it.a + it.b;
        sa_all += it.a;
        sb_all += it.b;
    }
    for (int i : chosen) {
        sa_j += items[i].a;
        sb_j += items[i].b;
    }
    Rat lower = Rat(m_cap - lambda);
    if (sum_all < lower) lower = sum_all;
    if (!(lower <= sa_j + sb_j && sa_j + sb_j <= m_cap))
        throw ContractViolation("balance_components: mass window failed");
    if (!(sa_j * sb_all >= sa_all * sb_j))
        throw ContractViolation("balance_components: ratio condition failed");
    return chosen;
}

// ---------------------------------------------------------------------------
// The E1-E4 placement loop

namespace {

struct LoopAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LinearLoop {
    const Graph& g2;
    const RegularPartition& hp;
    const StructureCertificate& cert;
    const RootedTree& t2;

    int ell, half;
    Rat eps2, se;
    Rat c_e2, c_good, c_case1;
    std::vector<int> cluster_of;
    std::vector<VertexSet> unused;     // per cluster
    std::vector<VertexSet> typical_x;  // per cluster: vertices typical to cluster X
    VertexSet a_class, b_class;        // tree colour classes (A = odd, B = root's)
    VertexSet in_mw_cl, in_mv_in, in_mv_out, in_a, in_b;
    Embedding emb;
    long long step_no = 0;

    LinearLoop(const Graph& g2_, const RegularPartition& hp_, const StructureCertificate& cert_,
               const RootedTree& t2_, const LinearConfig& cfg)
        : g2(g2_), hp(hp_), cert(cert_), t2(t2_), emb(t2_.n_vertices(), g2_.n()) {
        ell = hp.cluster_count();
        half = hp.cluster_size();
        eps2 = hp.eps;
        se = sqrt_upper(eps2);
        Rat q4 = root4_upper(cfg.eps);
        c_e2 = cfg.c_e2.value_or(5 * q4);
        c_good = cfg.c_good.value_or(7 * q4);
        c_case1 = cfg.c_case1.value_or(10 * q4);
        cluster_of.assign(g2.n(), -1);
        for (int c = 0; c < ell; ++c) {
            unused.push_back(hp.clusters[c]);
            for (int v = hp.clusters[c].first(); v >= 0; v = hp.clusters[c].next(v))
                cluster_of[v] = c;
        }
        // Typicality toward the full seed cluster, used for the (E1) masks.
        typical_x.assign(ell, VertexSet(g2.n()));
        const VertexSet& xc = hp.clusters[cert.x_cluster];
        for (int c = 0; c < ell; ++c) {
            if (c == cert.x_cluster) continue;
            const Rat thr = (hp.density[c][cert.x_cluster] - eps2) * half;
            for (int v = hp.clusters[c].first(); v >= 0; v = hp.clusters[c].next(v))
                if (Rat(g2.deg_into(v, xc)) > thr) typical_x[c].set(v);
        }
        ColourClasses cls = colour_classes(t2);
        b_class = cls.c;  // root's parity class (S lives here)
        a_class = cls.d;
        in_mw_cl = VertexSet(ell);
        in_mv_in = VertexSet(ell);
        in_mv_out = VertexSet(ell);
        in_a = VertexSet(ell);
        in_b = VertexSet(ell);
        for (auto [c, d] : cert.m_w) {
            in_mw_cl.set(c);
            in_mw_cl.set(d);
        }
        for (auto [c, d] : cert.m_v) {
            in_mv_in.set(c);
            in_mv_out.set(d);
        }
        for (int c : cert.a_part) in_a.set(c);
        for (int c : cert.b_part) in_b.set(c);
    }

    bool good(int c) const { return Rat(unused[c].count()) >= c_good * half; }
    bool typical_to_unused(int v, int c) const {
        if (cluster_of[v] == c) return false;
        const Rat thr = (hp.density[cluster_of[v]][c] - eps2) * unused[c].count();
        return Rat(g2.deg_into(v, unused[c])) > thr;
    }

    void check_e2() const {
        for (int c = 0; c < ell; ++c)
            if (!(Rat(unused[c].count()) > c_e2 * half))
                throw LoopAbort("E2 violated at step " + std::to_string(step_no) + " (cluster " +
                                std::to_string(c) + ", unused " +
                                std::to_string(unused[c].count()) + ")");
    }
    void check_e4() const {
        for (auto [c, d] : cert.m_w) {
            long long diff = unused[c].count() - unused[d].count();
            if (diff < 0) diff = -diff;
            if (!(Rat(diff) <= eps2 * half))
                throw LoopAbort("E4 violated at step " + std::to_string(step_no) + " (edge " +
                                std::to_string(c) + "-" + std::to_string(d) + ")");
        }
    }

    void place(int tv, int hv, long long options = -1) {
        emb.place(tv, hv, options);
        unused[cluster_of[hv]].reset(hv);
    }

    // Embed a component piece into the pair (c_cl, d_cl): its root goes to
    // the reserved spot r_img in c_cl, even piece-levels to c_cl, odd to d_cl.
    void embed_component(const TreePiece& piece, int c_cl, int d_cl, int r_img,
                         const VertexSet& c_res, const VertexSet& d_res) {
        const RootedTree& pt = piece.tree;
        VertexSet in_piece(t2.n_vertices());
        for (int v : piece.to_orig) in_piece.set(v);
        std::vector<VertexSet> allowed(pt.n_vertices());
        for (int sv = 0; sv < pt.n_vertices(); ++sv) {
            int tv = piece.to_orig[sv];
            bool s_parent = false;  // has a child in S (outside the piece)
            for (int ch : t2.children(tv))
                if (!in_piece.test(ch)) s_parent = true;
            if (s_parent)
                allowed[sv] = typical_x[pt.depth(sv) % 2 == 0 ? c_cl : d_cl];
        }
        VertexSet z = c_res | d_res;
        z.reset(r_img);
        PairEmbedOptions opt(std::min(eps2, Rat(1, 25)));
        opt.strict_ranges = false;
        opt.candidate_floor = Rat(1);
        opt.root_pin = r_img;
        opt.allowed = &allowed;
        Embedding pe = regular_pair_tree_embed(g2, hp.clusters[c_cl], hp.clusters[d_cl],
                                               unused[c_cl], unused[d_cl], z, pt, opt);
        for (int sv = 0; sv < pt.n_vertices(); ++sv) {
            int tv = piece.to_orig[sv];
            if (emb.placed(tv))
                throw ContractViolation("linear loop: component vertex already placed");
            place(tv, pe.image[sv], pe.trace[sv]);
        }
    }
};

}  // namespace

DenseRunResult embed_linear_degree(const Graph& g, int k, const Rat& delta, const RootedTree& t,
                                   const LinearConfig& cfg) {
    const int n = g.n();
    if (Rat(g.min_degree()) < (Rat(1) + delta) * k / 2)
        throw PreconditionError("embed_linear_degree: delta(G) >= (1+delta)k/2 required");
    {
        long long high = 0;
        for (int v = 0; v < n; ++v)
            if (Rat(g.degree(v)) >= (Rat(1) + delta) * k) ++high;
        if (Rat(high) < delta * n)
            throw PreconditionError("embed_linear_degree: too few high-degree vertices");
    }
    const Rat rho = cfg.rho_value(cfg.max_clusters);
    if (Rat(t.max_degree()) > rho * k)
        throw PreconditionError("embed_linear_degree: Delta(T) > rho*k");

    CertificateChain chain;
    auto fallback = [&](const std::string& why) -> DenseRunResult {
        ExactResult ex = backtracking_embed(t, g, {}, cfg.fallback_budget);
        if (ex.status == ExactStatus::Found) {
            DenseRunResult r;
            r.emb = ex.emb;
            r.fallback_used = true;
            r.route = "fallback: " + why;
            r.chain = chain;
            return r;
        }
        throw EmbedFailure("embed_linear_degree: " + why +
                           (ex.status == ExactStatus::BudgetExhausted ? " (budget exhausted)"
                                                                      : " (no embedding exists)"));
    };

    try {
        RefinementResult ref = refine_partition(g, cfg.eps, cfg.eta, cfg.max_clusters, cfg.mode);
        FindStructureResult fs =
            find_structure(ref.cleaned.graph, ref.partition, k, delta, cfg.mode);
        for (auto& c : fs.cert.properties.checks) chain.checks.push_back(c);
        const Graph& g2 = fs.base.g2.graph;
        const RegularPartition& hp = fs.base.halved;
        const Graph& rg = fs.base.reduced.graph;
        const int ell = hp.cluster_count();
        const int half = hp.cluster_size();

        // Root the tree in its smaller colour class so S sits in B.
        ColourClasses cls0 = colour_classes(t);
        int r = cls0.c.count() <= cls0.d.count() ? cls0.c.first() : cls0.d.first();
        RootedTree t2 = t.rerooted(r);

        const Rat beta = cfg.beta.value_or(cfg.eps / ell);
        CutCertificate cut = even_cut_set(t2, beta, false);
        stage(chain, "cut.S_small", Rat(cut.cut_set.count()), "<", beta * k);
        bool comps_ok = true;
        for (const auto& comp : cut.components) comps_ok &= Rat(comp.count()) <= beta * k;
        stage(chain, "cut.components_small", Rat(comps_ok ? 1 : 0), "==", Rat(1));
        if (!chain.all_ok()) throw LoopAbort("even cut-set postconditions failed");

        // Balance the components into P1 (pair zones) and P2 (the M_W zone).
        ColourClasses cls2 = colour_classes(t2);
        const long long u_w = 2LL * (long long)fs.cert.m_w.size() * half;
        const long long u_v = 2LL * (long long)fs.cert.m_v.size() * half;
        const long long u_a = (long long)fs.cert.a_part.size() * half;
        Rat q4 = root4_upper(cfg.eps);
        const Rat c_m = cfg.c_m.value_or(11 * q4);
        const Rat c_size2 = cfg.c_size2.value_or(10 * q4);
        const Rat m_cap = Rat(k) - (Rat(1) - c_m) * u_w;
        const Rat lambda = beta * k;
        std::vector<BalanceItem> items;
        for (const auto& comp : cut.components)
            items.push_back({Rat(comp.count_and(cls2.d)), Rat(comp.count_and(cls2.c))});
        std::vector<int> p1 = balance_components(items, m_cap, lambda);
        std::vector<bool> in_p1(items.size(), false);
        for (int i : p1) in_p1[i] = true;
        Rat sum_p1 = 0, sum_p2 = 0;
        for (std::size_t i = 0; i < items.size(); ++i)
            (in_p1[i] ? sum_p1 : sum_p2) += items[i].a + items[i].b;
        stage(chain, "balance.p2_mass", sum_p2, "<=", (Rat(1) - c_size2) * u_w);
        stage(chain, "balance.p1_mass", sum_p1, "<=",
              (Rat(1) - c_size2) * (Rat(u_v) / 2 + Rat(u_a)));
        if (!chain.all_ok()) throw LoopAbort("component balancing failed: " + chain.failing());

        LinearLoop loop(g2, hp, fs.cert, t2, cfg);

        // Component tops hang off their S-parent.
        std::vector<int> top_of(items.size(), -1);
        std::vector<int> s_parent_of(items.size(), -1);
        for (std::size_t i = 0; i < cut.components.size(); ++i) {
            const VertexSet& comp = cut.components[i];
            for (int v = comp.first(); v >= 0; v = comp.next(v)) {
                int pv = t2.parent(v);
                if (pv >= 0 && cut.cut_set.test(pv)) {
                    if (top_of[i] != -1)
                        throw ContractViolation("linear loop: component with two tops");
                    top_of[i] = v;
                    s_parent_of[i] = pv;
                }
            }
            if (top_of[i] < 0) throw ContractViolation("linear loop: component with no top");
        }
        std::vector<int> s_order = cut.cut_set.to_vector();
        std::sort(s_order.begin(), s_order.end(), [&](int x, int y) {
            if (t2.depth(x) != t2.depth(y)) return t2.depth(x) < t2.depth(y);
            return x < y;
        });

        VertexSet ycl(ell);
        {
            VertexSet nx = rg.neighbors(fs.cert.x_cluster);
            for (int c = nx.first(); c >= 0; c = nx.next(c))
                if (loop.in_mw_cl.test(c) || loop.in_mv_in.test(c) || loop.in_mv_out.test(c) ||
                    loop.in_a.test(c))
                    ycl.set(c);
        }
        const long long res_size = std::max<long long>(1, ceil_rat(2 * hp.eps * half + rho * k));

        for (int s_v : s_order) {
            ++loop.step_no;
            loop.check_e2();
            // Seed supply X': unused X-vertices typical to most of the family.
            std::vector<int> x_prime;
            {
                const long long y_cnt = ycl.count();
                const VertexSet& ux = loop.unused[fs.cert.x_cluster];
                for (int v = ux.first(); v >= 0; v = ux.next(v)) {
                    long long typ_cnt = 0;
                    for (int c = ycl.first(); c >= 0; c = ycl.next(c))
                        typ_cnt += loop.typical_to_unused(v, c);
                    if (Rat(typ_cnt) >= (Rat(1) - loop.se) * y_cnt) x_prime.push_back(v);
                }
                if (Rat((long long)x_prime.size()) < (Rat(1) - 4 * loop.se) * half)
                    throw LoopAbort("seed supply X' too small at step " +
                                    std::to_string(loop.step_no));
            }
            int v_j = -1;
            if (s_v == t2.root()) {
                int bestdeg = -1;
                for (int v : x_prime)
                    if (g2.degree(v) > bestdeg) {
                        bestdeg = g2.degree(v);
                        v_j = v;
                    }
            } else {
                int w = loop.emb.image[t2.parent(s_v)];
                if (w < 0) throw ContractViolation("linear loop: S-parent not embedded");
                int bestdeg = -1;
                for (int v : x_prime) {
                    if (!g2.has_edge(w, v)) continue;
                    if (g2.degree(v) > bestdeg) {
                        bestdeg = g2.degree(v);
                        v_j = v;
                    }
                }
            }
            if (v_j < 0)
                throw LoopAbort("E1: no typical seed adjacent to the parent at step " +
                                std::to_string(loop.step_no));
            loop.place(s_v, v_j);

            // Reservations for every cluster the seed is typical to.
            std::vector<VertexSet> reserve(ell, VertexSet(g2.n()));
            std::vector<bool> has_res(ell, false);
            for (int c = 0; c < ell; ++c) {
                if (c == fs.cert.x_cluster) continue;
                if (!loop.typical_to_unused(v_j, c)) continue;
                VertexSet pool = g2.neighbors(v_j) & loop.unused[c];
                if (pool.count() < res_size) continue;
                long long got = 0;
                for (int v = pool.first(); v >= 0 && got < res_size; v = pool.next(v)) {
                    reserve[c].set(v);
                    ++got;
                }
                has_res[c] = true;
            }

            // Embed every pending component hanging off s_v.
            for (std::size_t ci = 0; ci < items.size(); ++ci) {
                if (s_parent_of[ci] != s_v) continue;
                TreePiece piece = induced_tree(t2, cut.components[ci], top_of[ci]);
                const long long need_a = ceil_rat(items[ci].a);
                const long long need_b = ceil_rat(items[ci].b);
                auto capacity_ok = [&](int c_cl, int d_cl) {
                    return loop.unused[c_cl].count() - (has_res[c_cl] ? res_size : 0) >= need_a &&
                           loop.unused[d_cl].count() - (has_res[d_cl] ? res_size : 0) >= need_b;
                };
                if (in_p1[ci]) {
                    long long unused_mv = 0;
                    for (auto [c, d] : fs.cert.m_v)
                        unused_mv += loop.unused[c].count() + loop.unused[d].count();
                    bool case1 = Rat(unused_mv) > (Rat(1) - loop.c_case1) * Rat(u_v) / 2;
                    int cc = -1, dd = -1;
                    long long best_u = -1;
                    if (case1) {
                        for (auto [c, d] : fs.cert.m_v) {
                            if (!loop.good(c) || !loop.good(d)) continue;
                            if (!has_res[c]) continue;
                            if (!capacity_ok(c, d)) continue;
                            long long u = loop.unused[c].count() + loop.unused[d].count();
                            if (u > best_u) {
                                best_u = u;
                                cc = c;
                                dd = d;
                            }
                        }
                        if (cc < 0)
                            throw LoopAbort("case 1: no good usable M_V edge at step " +
                                            std::to_string(loop.step_no));
                    } else {
                        long long unused_a = 0;
                        for (int c : fs.cert.a_part) unused_a += loop.unused[c].count();
                        if (!(Rat(unused_a) >= loop.c_case1 * u_a))
                            throw LoopAbort("case 2: script-A supply exhausted at step " +
                                            std::to_string(loop.step_no));
                        for (int c : fs.cert.a_part) {
                            if (!loop.good(c) || !has_res[c]) continue;
                            for (int d = rg.neighbors(c).first(); d >= 0;
                                 d = rg.neighbors(c).next(d)) {
                                if (!loop.in_b.test(d) || !loop.good(d)) continue;
                                if (!capacity_ok(c, d)) continue;
                                long long u = loop.unused[c].count() + loop.unused[d].count();
                                if (u > best_u) {
                                    best_u = u;
                                    cc = c;
                                    dd = d;
                                }
                            }
                        }
                        if (cc < 0)
                            throw LoopAbort("case 2: no good (A,B) pair at step " +
                                            std::to_string(loop.step_no));
                    }
                    VertexSet pool = reserve[cc] & loop.unused[cc];
                    if (pool.empty()) throw LoopAbort("case 1/2: reservation exhausted");
                    loop.embed_component(piece, cc, dd, pool.first(), reserve[cc], reserve[dd]);
                } else {
                    // Case 3: a good M_W edge, root side chosen to keep E4.
                    int cc = -1, dd = -1;
                    long long best_u = -1;
                    for (auto [c, d] : fs.cert.m_w) {
                        if (!loop.good(c) || !loop.good(d)) continue;
                        if (!has_res[c] || !has_res[d]) continue;
                        if (!loop.typical_to_unused(v_j, c) || !loop.typical_to_unused(v_j, d))
                            continue;
                        long long u = std::min(loop.unused[c].count(), loop.unused[d].count());
                        if (u > best_u) {
                            best_u = u;
                            cc = c;
                            dd = d;
                        }
                    }
                    if (cc < 0)
                        throw LoopAbort("case 3: no good usable M_W edge at step " +
                                        std::to_string(loop.step_no));
                    int c_cl = cc, d_cl = dd;
                    if (loop.unused[dd].count() > loop.unused[cc].count()) std::swap(c_cl, d_cl);
                    if (!capacity_ok(c_cl, d_cl) && capacity_ok(d_cl, c_cl))
                        std::swap(c_cl, d_cl);
                    VertexSet pool = reserve[c_cl] & loop.unused[c_cl];
                    if (pool.empty()) throw LoopAbort("case 3: reservation exhausted");
                    loop.embed_component(piece, c_cl, d_cl, pool.first(), reserve[c_cl],
                                         reserve[d_cl]);
                    loop.check_e4();
                }
            }
        }
        if (!loop.emb.complete(t2)) throw ContractViolation("linear loop: incomplete embedding");
        if (!verify_embedding(t2, g2, loop.emb))
            throw ContractViolation("linear loop: replay verification failed");

        // Zone containment (E3) replay.
        {
            bool e3 = true;
            for (std::size_t ci = 0; ci < items.size(); ++ci) {
                const VertexSet& comp = cut.components[ci];
                for (int v = comp.first(); v >= 0; v = comp.next(v)) {
                    int c = loop.cluster_of[loop.emb.image[v]];
                    if (!in_p1[ci]) {
                        e3 &= loop.in_mw_cl.test(c);
                    } else if (cls2.d.test(v)) {
                        e3 &= loop.in_a.test(c) || loop.in_mv_in.test(c);
                    } else {
                        e3 &= loop.in_b.test(c) || loop.in_mv_out.test(c);
                    }
                }
            }
            stage(chain, "loop.E3_zones", Rat(e3 ? 1 : 0), "==", Rat(1));
            if (!e3) throw LoopAbort("E3 zone containment failed on replay");
        }

        DenseRunResult result;
        result.emb = Embedding(t.n_vertices(), n);
        for (int tv = 0; tv < t.n_vertices(); ++tv) {
            int hv = ref.cleaned.to_host[fs.base.g2.to_host[loop.emb.image[tv]]];
            result.emb.place(tv, hv, loop.emb.trace[tv]);
        }
        result.route = "linear-degree loop";
        result.chain = chain;
        if (!verify_embedding(t, g, result.emb))
            throw ContractViolation("embed_linear_degree: pullback replay failed");
        return result;
    } catch (const LoopAbort& e) {
        return fallback(e.what());
    } catch (const EmbedFailure& e) {
        return fallback(e.what());
    } catch (const PreconditionError& e) {
        return fallback(e.what());
    }
}

// ---------------------------------------------------------------------------
// Average-degree boost

DenseRunResult embed_avg_boost(const Graph& g, int k, const Rat& delta, const RootedTree& t,
                               const LinearConfig& cfg) {
    const int n = g.n();
    if (!(Rat(2 * g.edge_count()) >= (Rat(1) + delta) * k * n))
        throw PreconditionError("embed_avg_boost: d(G) >= (1+delta)k required");
    if (!(n >= k && Rat(k) >= delta * n))
        throw PreconditionError("embed_avg_boost: n >= k >= delta*n required");
    CertificateChain chain;

    InducedSubgraph core = peel_min_degree(g, (Rat(1) + delta) * k / 2);
    const Graph& gp = core.graph;
    stage(chain, "boost.peel_nonempty", Rat(gp.n()), ">", Rat(0));
    if (gp.n() > 0)
        stage(chain, "boost.peel_density", Rat(2 * gp.edge_count()), ">=",
              (Rat(1) + delta) * k * gp.n());
    if (!chain.all_ok())
        throw ContractViolation("embed_avg_boost: peeling lost the average degree");

    const Rat d3 = delta * delta * delta;
    const Rat d12 = d3 * d3 * d3 * d3;
    long long high = 0;
    for (int v = 0; v < gp.n(); ++v)
        if (Rat(gp.degree(v)) >= (Rat(1) + d12) * k) ++high;
    DenseRunResult result;
    if (Rat(high) >= d12 * gp.n()) {
        DenseRunResult inner = embed_linear_degree(gp, k, d12, t, cfg);
        result.emb = Embedding(t.n_vertices(), n);
        for (int tv = 0; tv < t.n_vertices(); ++tv)
            result.emb.place(tv, core.to_host[inner.emb.image[tv]], inner.emb.trace[tv]);
        result.fallback_used = inner.fallback_used;
        result.route = "avg-boost -> " + inner.route;
        result.chain = inner.chain;
    } else {
        // Concentration: only a small tail sits below (1-delta^3)(1+delta)k.
        std::vector<Rat> degs;
        for (int v = 0; v < gp.n(); ++v) degs.push_back(Rat(gp.degree(v)));
        DichotomyCase dc =
            concentration_dichotomy(WeightedFunction::uniform(degs), (Rat(1) + delta) * k, d12);
        stage(chain, "boost.case_ii", Rat(dc != DichotomyCase::CaseI ? 1 : 0), "==", Rat(1));
        const Rat keep_thr = (Rat(1) - d3) * (Rat(1) + delta) * k;
        VertexSet keep(gp.n());
        for (int v = 0; v < gp.n(); ++v)
            if (Rat(gp.degree(v)) > keep_thr) keep.set(v);
        stage(chain, "boost.removed_few", Rat(gp.n() - keep.count()), "<=", d3 * gp.n());
        InducedSubgraph trimmed = induced_subgraph(gp, keep);
        stage(chain, "boost.trimmed_min_degree", Rat(trimmed.graph.min_degree()), ">=", Rat(k));
        if (!chain.all_ok()) throw EmbedFailure("embed_avg_boost: " + chain.failing());
        int root_img = 0;
        for (int v = 1; v < trimmed.graph.n(); ++v)
            if (trimmed.graph.degree(v) > trimmed.graph.degree(root_img)) root_img = v;
        Embedding inner = greedy_embed_h(t, trimmed.graph, 0, root_img);
        result.emb = Embedding(t.n_vertices(), n);
        for (int tv = 0; tv < t.n_vertices(); ++tv)
            result.emb.place(tv, core.to_host[trimmed.to_host[inner.image[tv]]], inner.trace[tv]);
        result.route = "avg-boost -> trim + greedy";
        result.chain = chain;
    }
    if (!verify_embedding(t, g, result.emb))
        throw ContractViolation("embed_avg_boost: pullback replay failed");
    return result;
}

// ---------------------------------------------------------------------------
// Non-bipartite structure and embedder

NonbipStructure nonbip_structure(const Graph& cleaned, const RegularPartition& p, int k,
                                 const Rat& eta, const CheckMode& mode) {
    NonbipStructure out;
    const Rat seta = sqrt_lower(eta);  // stricter matching target
    long long t_param = ceil_rat((Rat(1) - 3 * seta) * k / 2);
    if (t_param < 1) t_param = 1;
    out.base = matching_structure(cleaned, p, t_param, mode);
    const Graph& g2 = out.base.g2.graph;
    out.i_set = VertexSet(g2.n());
    out.v1 = VertexSet(g2.n());
    out.v2 = VertexSet(g2.n());
    for (int c : out.base.ms.independent) out.i_set |= out.base.halved.clusters[c];
    for (int c : out.base.ms.v1) out.v1 |= out.base.halved.clusters[c];
    for (int c : out.base.ms.v2) out.v2 |= out.base.halved.clusters[c];

    const Rat q2 = sqrt_upper(eta);
    const Rat q4 = root4_upper(eta);
    const Rat q8 = root8_upper(eta);
    const long long n = cleaned.n();
    for (int i = 0; i < 2; ++i) {
        const VertexSet& vi = i == 0 ? out.v1 : out.v2;
        std::string tag = i == 0 ? "nonbip.a_V1" : "nonbip.a_V2";
        stage(out.report, tag + "_low", Rat(vi.count()), ">=", (Rat(1) - 3 * q2) * k / 2);
        stage(out.report, tag + "_high", Rat(vi.count()), "<=", (Rat(1) + 3 * q2) * k / 2);
    }
    stage(out.report, "nonbip.b_I_independent", Rat(g2.edges_within(out.i_set)), "==", Rat(0));
    stage(out.report, "nonbip.b_no_I_V2", Rat(g2.edges_between(out.i_set, out.v2)), "==", Rat(0));
    {
        long long cnt = 0;
        const Rat thr = (Rat(1) - 5 * q4) * n;
        for (int v = out.v1.first(); v >= 0; v = out.v1.next(v))
            if (Rat(g2.degree(v)) >= thr) ++cnt;
        stage(out.report, "nonbip.c_V1_degrees", Rat(cnt), ">=",
              (Rat(1) - 4 * q4) * out.v1.count());
    }
    {
        long long cnt = 0;
        const Rat thr = (Rat(1) - 3 * q8) * k;
        for (int v = out.v2.first(); v >= 0; v = out.v2.next(v))
            if (Rat(g2.degree(v)) >= thr) ++cnt;
        stage(out.report, "nonbip.d_V2_degrees", Rat(cnt), ">=",
              (Rat(1) - 2 * q8) * out.v2.count());
    }
    out.all_hold = out.report.all_ok();
    return out;
}

DenseRunResult embed_nonbip_dense(const Graph& cleaned, const NonbipStructure& s, const Rat& delta,
                                  const Rat& eta, const RootedTree& t, long long fallback_budget) {
    if (!s.all_hold)
        throw PreconditionError("embed_nonbip_dense: structure properties not verified");
    const Graph& g2 = s.base.g2.graph;
    const int k = t.k();
    CertificateChain chain;

    auto fallback = [&](const std::string& why) -> DenseRunResult {
        ExactResult ex = backtracking_embed(t, cleaned, {}, fallback_budget);
        if (ex.status == ExactStatus::Found) {
            DenseRunResult r;
            r.emb = ex.emb;
            r.fallback_used = true;
            r.route = "fallback: " + why;
            r.chain = chain;
            return r;
        }
        throw EmbedFailure("embed_nonbip_dense: " + why);
    };

    try {
        const Rat q2 = sqrt_upper(eta);
        const Rat q4 = root4_upper(eta);
        const Rat q8 = root8_upper(eta);
        const long long n = cleaned.n();
        VertexSet u1(g2.n()), u2(g2.n());
        for (int v = s.v1.first(); v >= 0; v = s.v1.next(v))
            if (Rat(g2.degree(v)) >= (Rat(1) - 5 * q4) * n) u1.set(v);
        for (int v = s.v2.first(); v >= 0; v = s.v2.next(v))
            if (Rat(g2.degree(v)) >= (Rat(1) - 3 * q8) * k) u2.set(v);
        {
            bool ok = true;
            const long long isz = s.i_set.count();
            for (int v = u1.first(); v >= 0; v = u1.next(v))
                ok &= Rat(g2.deg_into(v, s.i_set)) >= (Rat(1) - q2) * isz;
            stage(chain, "nonbip.deg_into_I", Rat(ok ? 1 : 0), "==", Rat(1));
        }
        VertexSet h_set = u1 | u2;
        InducedSubgraph h = induced_subgraph(g2, h_set);
        VertexSet hu1(h.graph.n());
        std::vector<int> to_h(g2.n(), -1);
        for (std::size_t i = 0; i < h.to_host.size(); ++i) {
            to_h[h.to_host[i]] = int(i);
            if (u1.test(h.to_host[i])) hu1.set(int(i));
        }
        stage(chain, "nonbip.H_min_degree", Rat(h.graph.min_degree()), ">=",
              (Rat(1) - 6 * q8) * k);
        {
            bool ok = true;
            for (int v = 0; v < h.graph.n(); ++v)
                ok &= h.graph.deg_into(v, hu1) >= t.max_degree();
            stage(chain, "nonbip.H_sees_U1", Rat(ok ? 1 : 0), "==", Rat(1));
        }
        if (!chain.all_ok()) throw EmbedFailure("degree stages failed: " + chain.failing());

        CutCertificate cut = find_cut_subtree(t, Rat(1, 2));
        TreePiece star = induced_tree(t, cut.subtree, cut.anchor);
        const RootedTree& ts = star.tree;
        LeavesOrBarePaths split = leaves_or_bare_paths(ts, 3);

        const long long i_target = ceil_rat(delta * k / 100);
        Embedding emb(t.n_vertices(), g2.n());
        VertexSet unused_h = VertexSet::full(h.graph.n());
        VertexSet unused_i = s.i_set;
        long long i_used = 0;

        auto place_h = [&](int tv, int h_img, long long opts = -1) {
            emb.place(tv, h.to_host[h_img], opts);
            unused_h.reset(h_img);
        };
        auto greedy_h = [&](int tv, int parent_g2img, const char* what) {
            int ph = to_h[parent_g2img];
            if (ph < 0) throw EmbedFailure(std::string("parent image left H placing ") + what);
            VertexSet cand = h.graph.neighbors(ph) & unused_h;
            long long opts = cand.count();
            int bst = -1, best_res = -1;
            for (int c = cand.first(); c >= 0; c = cand.next(c)) {
                int res = h.graph.neighbors(c).count_and(unused_h);
                if (res > best_res) {
                    best_res = res;
                    bst = c;
                }
            }
            if (bst < 0) throw EmbedFailure(std::string("H starved placing ") + what);
            place_h(tv, bst, opts);
        };

        {
            int bst = -1, bd = -1;
            for (int v = 0; v < h.graph.n(); ++v)
                if (h.graph.degree(v) > bd) {
                    bd = h.graph.degree(v);
                    bst = v;
                }
            place_h(star.to_orig[ts.root()], bst);
        }

        long long supply = 0;
        if (!split.is_leaves) {
            // Case 1: bare paths take a U1 - I - U1 detour until the target.
            supply = (long long)split.paths.size();
            std::vector<int> path_at(ts.n_vertices(), -1);
            std::vector<std::vector<int>> paths;
            for (const auto& pth : split.paths) {
                bool has_anchor = false;
                for (int v : pth) has_anchor |= v == ts.root();
                if (has_anchor) {
                    --supply;
                    continue;
                }
                std::vector<int> q = pth;
                if (ts.depth(q.front()) > ts.depth(q.back())) std::reverse(q.begin(), q.end());
                path_at[q.front()] = int(paths.size());
                paths.push_back(q);
            }
            for (int sv : ts.dfs_order()) {
                int tv = star.to_orig[sv];
                if (emb.placed(tv)) continue;
                int parent_img = emb.image[star.to_orig[ts.parent(sv)]];
                int pi = path_at[sv];
                if (pi >= 0 && i_used < i_target) {
                    const std::vector<int>& bare = paths[pi];
                    greedy_h(tv, parent_img, "bare-path entry");
                    int u1a = -1;
                    {
                        int ph = to_h[emb.image[tv]];
                        VertexSet cand = h.graph.neighbors(ph) & unused_h & hu1;
                        int bres = -1;
                        for (int c = cand.first(); c >= 0; c = cand.next(c)) {
                            int res = h.graph.neighbors(c).count_and(unused_h);
                            if (res > bres) {
                                bres = res;
                                u1a = c;
                            }
                        }
                    }
                    if (u1a < 0) throw EmbedFailure("no U1 image for the detour start");
                    place_h(star.to_orig[bare[1]], u1a);
                    int u2v = -1, u3 = -1;
                    VertexSet i_adj = g2.neighbors(h.to_host[u1a]) & unused_i;
                    VertexSet u1_pool = unused_h & hu1;
                    for (int c3 = u1_pool.first(); c3 >= 0; c3 = u1_pool.next(c3)) {
                        VertexSet common = g2.neighbors(h.to_host[c3]) & i_adj;
                        if (common.any()) {
                            u3 = c3;
                            u2v = common.first();
                            break;
                        }
                    }
                    if (u2v < 0) throw EmbedFailure("no I detour (common neighbour) found");
                    emb.place(star.to_orig[bare[2]], u2v);
                    unused_i.reset(u2v);
                    ++i_used;
                    place_h(star.to_orig[bare[3]], u3);
                } else {
                    greedy_h(tv, parent_img, "case-1 greedy");
                }
            }
        } else {
            // Case 2: leaf-parents in U1, leaves in I until the target.
            supply = split.leaves.count();
            VertexSet leaf_parents(ts.n_vertices());
            for (int sv = 0; sv < ts.n_vertices(); ++sv) {
                if (sv == ts.root()) continue;
                for (int c : ts.children(sv))
                    if (ts.tree_degree(c) == 1) leaf_parents.set(sv);
            }
            for (int sv : ts.dfs_order()) {
                int tv = star.to_orig[sv];
                if (emb.placed(tv)) continue;
                int parent_sv = ts.parent(sv);
                int parent_img = emb.image[star.to_orig[parent_sv]];
                bool is_leaf = ts.tree_degree(sv) == 1 && sv != ts.root();
                if (is_leaf && leaf_parents.test(parent_sv) && i_used < i_target) {
                    VertexSet cand = g2.neighbors(parent_img) & unused_i;
                    if (cand.any()) {
                        int img = cand.first();
                        emb.place(tv, img);
                        unused_i.reset(img);
                        ++i_used;
                        continue;
                    }
                }
                if (leaf_parents.test(sv) && i_used < i_target) {
                    int ph = to_h[parent_img];
                    if (ph < 0) throw EmbedFailure("parent image left H placing leaf-parent");
                    VertexSet cand = h.graph.neighbors(ph) & unused_h & hu1;
                    long long opts = cand.count();
                    int bst = -1, bres = -1;
                    for (int c = cand.first(); c >= 0; c = cand.next(c)) {
                        int res = g2.deg_into(h.to_host[c], unused_i);
                        if (res > bres) {
                            bres = res;
                            bst = c;
                        }
                    }
                    if (bst < 0) throw EmbedFailure("U1 starved for a leaf-parent");
                    place_h(tv, bst, opts);
                } else {
                    greedy_h(tv, parent_img, "case-2 greedy");
                }
            }
        }
        stage(chain, "nonbip.i_used", Rat(i_used), ">=",
              Rat(std::min<long long>(i_target, supply)));

        // Finish T - (T* - t*) greedily inside the unused part of H.
        VertexSet rest = VertexSet::full(t.n_vertices());
        rest -= cut.subtree;
        rest.set(cut.anchor);
        if (rest.count() >= 2) {
            TreePiece tp = induced_tree(t, rest, cut.anchor);
            int anchor_h = to_h[emb.image[cut.anchor]];
            VertexSet hseg = unused_h;
            hseg.set(anchor_h);
            InducedSubgraph hp2 = induced_subgraph(h.graph, hseg);
            int v_local = -1;
            for (std::size_t i = 0; i < hp2.to_host.size(); ++i)
                if (hp2.to_host[i] == anchor_h) v_local = int(i);
            stage(chain, "nonbip.Hprime_min_degree", Rat(hp2.graph.min_degree()), ">=",
                  Rat(tp.tree.k()));
            Embedding fin = greedy_embed_h(tp.tree, hp2.graph, 0, v_local);
            for (int sv = 0; sv < tp.tree.n_vertices(); ++sv) {
                int tv = tp.to_orig[sv];
                if (tv == cut.anchor) continue;
                emb.place(tv, h.to_host[hp2.to_host[fin.image[sv]]], fin.trace[sv]);
            }
        }
        if (!verify_embedding(t, g2, emb))
            throw ContractViolation("embed_nonbip_dense: replay failed on G'");
        DenseRunResult r;
        r.emb = Embedding(t.n_vertices(), cleaned.n());
        for (int tv = 0; tv < t.n_vertices(); ++tv)
            r.emb.place(tv, s.base.g2.to_host[emb.image[tv]], emb.trace[tv]);
        r.route = split.is_leaves ? "nonbip case 2 (leaves)" : "nonbip case 1 (bare paths)";
        r.chain = chain;
        if (!verify_embedding(t, cleaned, r.emb))
            throw ContractViolation("embed_nonbip_dense: pullback replay failed");
        return r;
    } catch (const EmbedFailure& e) {
        return fallback(e.what());
    } catch (const PreconditionError& e) {
        return fallback(e.what());
    } catch (const ContractViolation& e) {
        return fallback(e.what());
    }
}

// ---------------------------------------------------------------------------
// Bipartite reduced-graph embedders

DenseRunResult bipartite_forest_embed(const Graph& cleaned, const RegularPartition& p,
                                      const ReducedGraph& r, const std::vector<int>& v_sub,
                                      const std::vector<int>& b_side, long long k1, long long k2,
                                      const RootedTree& t, const BipForestOptions& opt) {
    CertificateChain chain;
    const int ell = p.cluster_count();
    const long long nprime = (long long)p.cluster_size() * ell;
    const Rat se = sqrt_upper(opt.eps);
    {
        bool deg_ok = true;
        for (int c : v_sub)
            deg_ok &= Rat(r.graph.degree(c)) >= (Rat(1) + 100 * se) * k2 * ell / nprime;
        stage(chain, "forest.cond_i", Rat(deg_ok ? 1 : 0), "==", Rat(1));
        stage(chain, "forest.cond_ii", Rat((long long)v_sub.size()), ">=",
              (Rat(1) + 100 * se) * k1 * ell / nprime);
    }
    ColourClasses cls = colour_classes(t);
    stage(chain, "forest.classA", Rat(std::max(cls.c.count(), cls.d.count())), "<=", Rat(k1));
    stage(chain, "forest.classB", Rat(std::min(cls.c.count(), cls.d.count())), "<=", Rat(k2));
    if (!chain.all_ok()) throw PreconditionError("bipartite_forest_embed: " + chain.failing());

    bool c_is_a = cls.c.count() >= cls.d.count();
    const VertexSet& a_class = c_is_a ? cls.c : cls.d;
    VertexSet zone_a(cleaned.n()), zone_b(cleaned.n());
    for (int c : v_sub) zone_a |= p.clusters[c];
    for (int c : b_side) zone_b |= p.clusters[c];

    auto fallback = [&](const std::string& why) -> DenseRunResult {
        std::vector<VertexSet> allowed(t.n_vertices());
        for (int tv = 0; tv < t.n_vertices(); ++tv)
            allowed[tv] = a_class.test(tv) ? zone_a : zone_b;
        ExactResult ex = backtracking_embed(t, cleaned, {}, opt.fallback_budget,
                                            SearchOrder::Primary, &allowed);
        if (ex.status == ExactStatus::Found) {
            DenseRunResult r2;
            r2.emb = ex.emb;
            r2.fallback_used = true;
            r2.route = "fallback: " + why;
            r2.chain = chain;
            return r2;
        }
        throw EmbedFailure("bipartite_forest_embed: " + why +
                           (ex.status == ExactStatus::BudgetExhausted
                                ? " (budget exhausted)"
                                : " (zone-respecting embedding absent)"));
    };

    try {
        std::vector<VertexSet> unused(ell);
        for (int c = 0; c < ell; ++c) unused[c] = p.clusters[c];
        std::vector<int> cluster_of(cleaned.n(), -1);
        for (int c = 0; c < ell; ++c)
            for (int v = p.clusters[c].first(); v >= 0; v = p.clusters[c].next(v))
                cluster_of[v] = c;
        VertexSet vb_mask(ell);
        for (int c : b_side) vb_mask.set(c);

        Embedding emb(t.n_vertices(), cleaned.n());
        const int m = p.cluster_size();
        Rat beta = std::min(Rat(m, 2LL * std::max(t.k(), 1)), Rat(1, 2));
        bool single_piece = Rat(t.k()) * beta < 1 || t.n_vertices() <= std::max(2, m / 2);
        std::vector<VertexSet> comps;
        VertexSet s_set(t.n_vertices());
        if (single_piece) {
            comps.push_back(VertexSet::full(t.n_vertices()));
        } else {
            CutCertificate cut = cut_set(t, beta);
            s_set = cut.cut_set;
            comps = cut.components;
        }

        auto choose_pair = [&](bool root_in_a, int adj_img) -> std::pair<int, int> {
            int bc = -1, bd = -1;
            long long best = -1;
            for (int c : v_sub) {
                for (int d = r.graph.neighbors(c).first(); d >= 0;
                     d = r.graph.neighbors(c).next(d)) {
                    if (!vb_mask.test(d)) continue;
                    if (adj_img >= 0) {
                        const VertexSet& root_cl = root_in_a ? unused[c] : unused[d];
                        if (!(cleaned.neighbors(adj_img) & root_cl).any()) continue;
                    }
                    long long head = std::min(unused[c].count(), unused[d].count());
                    if (head > best) {
                        best = head;
                        bc = c;
                        bd = d;
                    }
                }
            }
            return {bc, bd};
        };

        if (single_piece) {
            bool root_in_a = a_class.test(t.root());
            auto [c, d] = choose_pair(root_in_a, -1);
            if (c < 0) throw EmbedFailure("no usable (V,B) pair");
            PairEmbedOptions po(std::min(opt.eps, Rat(1, 25)));
            po.strict_ranges = false;
            po.candidate_floor = Rat(1);
            int cc = root_in_a ? c : d, dd = root_in_a ? d : c;
            emb = regular_pair_tree_embed(cleaned, p.clusters[cc], p.clusters[dd], unused[cc],
                                          unused[dd], VertexSet(cleaned.n()), t, po);
        } else {
            std::vector<int> order = s_set.to_vector();
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                if (t.depth(x) != t.depth(y)) return t.depth(x) < t.depth(y);
                return x < y;
            });
            std::vector<int> top_of(comps.size(), -1), sp(comps.size(), -1);
            for (std::size_t i = 0; i < comps.size(); ++i) {
                for (int v = comps[i].first(); v >= 0; v = comps[i].next(v)) {
                    int pv = t.parent(v);
                    if (pv < 0 || s_set.test(pv)) {
                        top_of[i] = v;
                        sp[i] = pv;
                    }
                }
            }
            auto place_single = [&](int tv) {
                bool in_a = a_class.test(tv);
                const VertexSet& zone = in_a ? zone_a : zone_b;
                VertexSet cand(cleaned.n());
                if (tv == t.root() || emb.image[t.parent(tv)] < 0) {
                    cand = zone;
                } else {
                    cand = cleaned.neighbors(emb.image[t.parent(tv)]) & zone;
                }
                cand -= emb.used;
                long long opts = cand.count();
                int bst = -1, bres = -1;
                for (int c = cand.first(); c >= 0; c = cand.next(c)) {
                    if (cleaned.degree(c) > bres) {
                        bres = cleaned.degree(c);
                        bst = c;
                    }
                }
                if (bst < 0) throw EmbedFailure("forest walk starved placing an S vertex");
                emb.place(tv, bst, opts);
                unused[cluster_of[bst]].reset(bst);
            };
            for (int sv : order) {
                place_single(sv);
                for (std::size_t i = 0; i < comps.size(); ++i) {
                    if (sp[i] != sv) continue;
                    TreePiece piece = induced_tree(t, comps[i], top_of[i]);
                    bool root_in_a = a_class.test(top_of[i]);
                    auto [c, d] = choose_pair(root_in_a, emb.image[sv]);
                    if (c < 0) throw EmbedFailure("no usable (V,B) pair for a component");
                    PairEmbedOptions po(std::min(opt.eps, Rat(1, 25)));
                    po.strict_ranges = false;
                    po.candidate_floor = Rat(1);
                    std::vector<VertexSet> allowed(piece.tree.n_vertices());
                    allowed[0] = cleaned.neighbors(emb.image[sv]);
                    po.allowed = &allowed;
                    int cc = root_in_a ? c : d, dd = root_in_a ? d : c;
                    Embedding pe =
                        regular_pair_tree_embed(cleaned, p.clusters[cc], p.clusters[dd],
                                                unused[cc], unused[dd], VertexSet(cleaned.n()),
                                                piece.tree, po);
                    for (int pv = 0; pv < piece.tree.n_vertices(); ++pv) {
                        int tv = piece.to_orig[pv];
                        emb.place(tv, pe.image[pv], pe.trace[pv]);
                        unused[cluster_of[pe.image[pv]]].reset(pe.image[pv]);
                    }
                }
            }
        }
        for (int tv = 0; tv < t.n_vertices(); ++tv) {
            const VertexSet& zone = a_class.test(tv) ? zone_a : zone_b;
            if (!zone.test(emb.image[tv])) throw EmbedFailure("zone containment failed on replay");
        }
        if (!verify_embedding(t, cleaned, emb))
            throw ContractViolation("bipartite_forest_embed: replay failed");
        DenseRunResult res;
        res.emb = emb;
        res.route = single_piece ? "forest: single pair" : "forest: cut walk";
        res.chain = chain;
        return res;
    } catch (const EmbedFailure& e) {
        return fallback(e.what());
    } catch (const PreconditionError& e) {
        return fallback(e.what());
    }
}

DenseRunResult embed_bip_reduced(const Graph& cleaned, const RegularPartition& p,
                                 const ReducedGraph& r, int k, const Rat& delta, const Rat& eta,
                                 const RootedTree& t, const BipForestOptions& opt) {
    CertificateChain chain;
    const int ell = p.cluster_count();
    const long long nprime = (long long)p.cluster_size() * ell;
    std::vector<int> side(ell, -1);
    {
        std::deque<int> q{0};
        side[0] = 0;
        while (!q.empty()) {
            int c = q.front();
            q.pop_front();
            for (int d = r.graph.neighbors(c).first(); d >= 0; d = r.graph.neighbors(c).next(d)) {
                if (side[d] < 0) {
                    side[d] = 1 - side[c];
                    q.push_back(d);
                } else if (side[d] == side[c]) {
                    throw PreconditionError("embed_bip_reduced: reduced graph not bipartite");
                }
            }
        }
        for (int c = 0; c < ell; ++c)
            if (side[c] < 0)
                throw PreconditionError("embed_bip_reduced: reduced graph not connected");
    }
    std::vector<int> script_a, script_b;
    for (int c = 0; c < ell; ++c) (side[c] == 0 ? script_a : script_b).push_back(c);
    if (script_a.size() < script_b.size()) std::swap(script_a, script_b);

    const Rat seta = sqrt_upper(eta);
    stage(chain, "bipred.i_density", Rat(2 * cleaned.edge_count()), ">=",
          (Rat(1) - 3 * seta) * k * cleaned.n());
    stage(chain, "bipred.ii_mindeg", Rat(cleaned.min_degree()), ">=",
          (Rat(1) - 3 * seta) * k / 2);
    stage(chain, "bipred.iii_A_mass", Rat((long long)script_a.size() * p.cluster_size()), ">=",
          (Rat(1) + delta) * k);
    if (!chain.all_ok()) throw PreconditionError("embed_bip_reduced: " + chain.failing());

    ColourClasses cls = colour_classes(t);
    long long a_sz = std::max(cls.c.count(), cls.d.count());
    long long b_sz = std::min(cls.c.count(), cls.d.count());
    bool in_window = (Rat(1) - 4 * seta) * k / 2 < Rat(b_sz) && 2 * b_sz <= k + 1 &&
                     k + 1 <= 2 * a_sz && Rat(a_sz) <= (Rat(1) + 4 * seta) * k / 2;

    DenseRunResult res;
    if (!in_window) {
        stage(chain, "bipred.direct_mindeg", Rat(cleaned.min_degree()), ">=",
              (Rat(1) + 100 * sqrt_upper(opt.eps)) * b_sz);
        res = bipartite_forest_embed(cleaned, p, r, script_a, script_b, a_sz, b_sz, t, opt);
        res.route = "bip-reduced direct: " + res.route;
    } else {
        const Rat thr = (Rat(1) + seta) * Rat(k, 2) * Rat(ell, nprime);
        std::vector<int> va, vb;
        for (int c : script_a)
            if (Rat(r.graph.degree(c)) >= thr) va.push_back(c);
        for (int c : script_b)
            if (Rat(r.graph.degree(c)) >= thr) vb.push_back(c);
        stage(chain, "bipred.va_vb_count", Rat((long long)(va.size() + vb.size())), ">=",
              (Rat(1) + seta) * k * ell / nprime);
        if (Rat(2 * (long long)va.size()) >= (Rat(1) + seta) * k * ell / nprime && !va.empty()) {
            res = bipartite_forest_embed(cleaned, p, r, va, script_b, a_sz, b_sz, t, opt);
            res.route = "bip-reduced V_A: " + res.route;
        } else if (!vb.empty()) {
            res = bipartite_forest_embed(cleaned, p, r, vb, script_a, a_sz, b_sz, t, opt);
            res.route = "bip-reduced V_B: " + res.route;
        } else {
            throw EmbedFailure("embed_bip_reduced: counting stage failed: " + chain.failing());
        }
    }
    res.chain.checks.insert(res.chain.checks.begin(), chain.checks.begin(), chain.checks.end());
    return res;
}

}  // namespace treesos
