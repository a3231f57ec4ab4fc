#include "treesos/regularity.hpp"

#include <algorithm>
#include <array>
#include <map>

#include <json.hpp>

#include "treesos/rng.hpp"

namespace treesos {

Rat pair_density(const Graph& g, const VertexSet& a, const VertexSet& b) {
    long long ca = a.count(), cb = b.count();
    if (ca == 0 || cb == 0) throw PreconditionError("pair_density: empty side");
    return Rat(g.edges_between(a, b), ca * cb);
}

namespace {

bool significant(long long sub, long long whole, const Rat& eps) {
    return Rat(sub) > eps * whole;
}

// Straightforward recomputation used to re-verify any witness before return.
bool witness_checks(const Graph& g, const VertexSet& a, const VertexSet& b, const Rat& eps,
                    const PairWitness& w) {
    if (!w.x.is_subset_of(a) || !w.y.is_subset_of(b)) return false;
    if (!significant(w.x.count(), a.count(), eps)) return false;
    if (!significant(w.y.count(), b.count(), eps)) return false;
    Rat d = pair_density(g, a, b);
    Rat dxy = pair_density(g, w.x, w.y);
    Rat dev = dxy >= d ? dxy - d : d - dxy;
    return dev >= eps;
}

PairVerdict check_exhaustive(const Graph& g, const VertexSet& a, const VertexSet& b,
                             const Rat& eps, int bound) {
    std::vector<int> av = a.to_vector(), bv = b.to_vector();
    // Enumerate subsets of the smaller side; extremising the other side is
    // exact: for fixed X and fixed |Y|, density is extremal on the top/bottom
    // |Y| vertices ranked by degree into X.
    bool swapped = false;
    if (bv.size() < av.size()) {
        std::swap(av, bv);
        swapped = true;
    }
    const int na = int(av.size()), nb = int(bv.size());
    if (na > bound)
        throw PreconditionError("check_regular_pair: side exceeds exhaustive bound");
    std::vector<std::uint32_t> adj_mask(nb, 0);
    for (int j = 0; j < nb; ++j)
        for (int i = 0; i < na; ++i)
            if (g.has_edge(bv[j], av[i])) adj_mask[j] |= std::uint32_t(1) << i;

    const long long e_ab = g.edges_between(a, b);
    const long long ca = a.count(), cb = b.count();
    // |d(X,Y) - d| >= eps  <=>  |sum*ca*cb - e_ab*s*px| * q >= p * s*px*ca*cb
    const BigInt p = numerator(eps), q = denominator(eps);
    long long min_px = 0;
    while (!significant(min_px, na, eps)) ++min_px;
    long long min_s = 0;
    while (!significant(min_s, nb, eps)) ++min_s;

    std::vector<int> idx(nb);
    std::vector<int> degx(nb);
    for (std::uint32_t mask = 1; mask < (std::uint32_t(1) << na); ++mask) {
        int px = std::popcount(mask);
        if (px < min_px) continue;
        for (int j = 0; j < nb; ++j) {
            degx[j] = std::popcount(adj_mask[j] & mask);
            idx[j] = j;
        }
        std::sort(idx.begin(), idx.end(), [&](int u, int v) {
            if (degx[u] != degx[v]) return degx[u] < degx[v];
            return u < v;
        });
        std::vector<long long> prefix(nb + 1, 0);
        for (int j = 0; j < nb; ++j) prefix[j + 1] = prefix[j] + degx[idx[j]];
        for (int s = int(min_s); s <= nb; ++s) {
            long long bot = prefix[s];
            long long top = prefix[nb] - prefix[nb - s];
            auto deviates = [&](long long sum) {
                BigInt lhs = BigInt(sum) * ca * cb - BigInt(e_ab) * s * px;
                if (lhs < 0) lhs = -lhs;
                return lhs * q >= p * s * px * ca * cb;
            };
            long long which = deviates(top) ? top : (deviates(bot) ? bot : -1);
            if (which < 0) continue;
            PairWitness w{VertexSet(g.n()), VertexSet(g.n())};
            for (int i = 0; i < na; ++i)
                if ((mask >> i) & 1) w.x.set(av[i]);
            if (which == top) {
                for (int j = nb - s; j < nb; ++j) w.y.set(bv[idx[j]]);
            } else {
                for (int j = 0; j < s; ++j) w.y.set(bv[idx[j]]);
            }
            // Normalise so w.x always refers to side a, then re-verify.
            if (swapped) std::swap(w.x, w.y);
            if (!witness_checks(g, a, b, eps, w))
                throw ContractViolation("check_regular_pair: witness failed re-verification");
            PairVerdict v;
            v.kind = VerdictKind::Witness;
            v.witness = w;
            return v;
        }
    }
    return {VerdictKind::Certified, std::nullopt};
}

PairVerdict check_sampled(const Graph& g, const VertexSet& a, const VertexSet& b, const Rat& eps,
                          std::uint64_t seed, int trials) {
    std::vector<int> av = a.to_vector(), bv = b.to_vector();
    Rng rng(seed);
    const Rat d = pair_density(g, a, b);
    const long long asz = static_cast<long long>(av.size());
    const long long bsz = static_cast<long long>(bv.size());
    long long min_sa = 0;
    while (!significant(min_sa, asz, eps)) ++min_sa;
    long long min_sb = 0;
    while (!significant(min_sb, bsz, eps)) ++min_sb;
    if (min_sa > asz || min_sb > bsz) return {VerdictKind::Heuristic, std::nullopt};
    for (int trial = 0; trial < trials; ++trial) {
        long long sa = min_sa + static_cast<long long>(rng.below(asz - min_sa + 1));
        long long sb = min_sb + static_cast<long long>(rng.below(bsz - min_sb + 1));
        for (long long i = 0; i < sa; ++i)
            std::swap(av[i], av[i + rng.below(asz - i)]);
        for (long long i = 0; i < sb; ++i)
            std::swap(bv[i], bv[i + rng.below(bsz - i)]);
        VertexSet x(g.n()), y(g.n());
        for (long long i = 0; i < sa; ++i) x.set(av[i]);
        for (long long i = 0; i < sb; ++i) y.set(bv[i]);
        Rat dxy = pair_density(g, x, y);
        Rat dev = dxy >= d ? dxy - d : d - dxy;
        if (dev >= eps) {
            PairWitness w{x, y};
            if (!witness_checks(g, a, b, eps, w))
                throw ContractViolation("check_regular_pair: sampled witness failed re-verification");
            PairVerdict v;
            v.kind = VerdictKind::Witness;
            v.witness = w;
            return v;
        }
    }
    return {VerdictKind::Heuristic, std::nullopt};
}

}  // namespace

PairVerdict check_regular_pair(const Graph& g, const VertexSet& a, const VertexSet& b,
                               const Rat& eps, const CheckMode& mode) {
    if (a.count() == 0 || b.count() == 0)
        throw PreconditionError("check_regular_pair: empty side");
    if (mode.exhaustive) return check_exhaustive(g, a, b, eps, mode.exhaustive_bound);
    return check_sampled(g, a, b, eps, mode.seed, mode.trials);
}

VertexSet typical_vertices(const Graph& g, const VertexSet& a, const VertexSet& y,
                           long long b_size, const Rat& d, const Rat& eps, bool certified) {
    long long ysize = y.count();
    if (!significant(ysize, b_size, eps))
        throw PreconditionError("typical_vertices: Y is not significant");
    VertexSet out(g.n());
    const Rat threshold = (d - eps) * ysize;
    for (int x = a.first(); x >= 0; x = a.next(x))
        if (Rat(g.deg_into(x, y)) > threshold) out.set(x);
    if (certified) {
        long long atypical = a.count() - out.count();
        if (Rat(atypical) > eps * a.count())
            throw ContractViolation("typical_vertices: Fact 1(i) count failed on certified pair");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partition refinement

RefinementResult refine_partition(const Graph& g, const Rat& eps, const Rat& eta,
                                  int max_clusters, const CheckMode& mode) {
    const int n = g.n();
    long long m0 = std::max<long long>(2, ceil_rat(Rat(1) / eps));
    if (m0 * 2 > n)
        throw PreconditionError("refine_partition: graph too small for 1/eps clusters of size 2");

    // Initial equipartition: contiguous id blocks. Deterministic.
    std::vector<std::vector<int>> clusters;
    int s = int(n / m0);
    for (long long c = 0; c < m0; ++c) {
        std::vector<int> cl;
        for (int i = int(c) * s; i < int(c + 1) * s; ++i) cl.push_back(i);
        clusters.push_back(std::move(cl));
    }

    int rounds = 0;
    std::vector<std::vector<PairVerdict>> verdicts;
    while (true) {
        const int ell = int(clusters.size());
        CheckMode pair_mode = mode;
        pair_mode.exhaustive = mode.exhaustive && s <= mode.exhaustive_bound;
        verdicts.assign(ell, std::vector<PairVerdict>(ell));
        std::vector<VertexSet> split(ell, VertexSet(n));
        bool any_witness = false;
        for (int i = 0; i < ell; ++i) {
            for (int j = i + 1; j < ell; ++j) {
                CheckMode m2 = pair_mode;
                m2.seed = mode.seed ^ (std::uint64_t(rounds) << 40) ^ (std::uint64_t(i) << 20) ^
                          std::uint64_t(j);
                VertexSet ci = VertexSet::of(n, clusters[i]);
                VertexSet cj = VertexSet::of(n, clusters[j]);
                PairVerdict v = check_regular_pair(g, ci, cj, eps, m2);
                verdicts[i][j] = verdicts[j][i] = v;
                if (v.kind == VerdictKind::Witness) {
                    any_witness = true;
                    if (split[i].empty()) split[i] = v.witness->x;
                    if (split[j].empty()) split[j] = v.witness->y;
                }
            }
        }
        if (!any_witness) break;
        ++rounds;
        // Split every witnessed cluster by its first witness set and re-chop
        // all atoms to the halved size.
        int s2 = s / 2;
        if (s2 < 1)
            throw ContractViolation("refine_partition: cannot halve unit clusters");
        std::vector<std::vector<int>> atoms;
        for (int c = 0; c < ell; ++c) {
            std::vector<int> in, outside;
            for (int v : clusters[c])
                (split[c].test(v) ? in : outside).push_back(v);
            if (!in.empty()) atoms.push_back(std::move(in));
            if (!outside.empty()) atoms.push_back(std::move(outside));
        }
        std::vector<std::vector<int>> next;
        for (auto& atom : atoms) {
            for (std::size_t at = 0; at + s2 <= atom.size(); at += s2)
                next.emplace_back(atom.begin() + at, atom.begin() + at + s2);
        }
        if (int(next.size()) > max_clusters)
            throw EmbedFailure("refine_partition: witness splitting exceeded max_clusters");
        clusters = std::move(next);
        s = s2;
    }

    // Cleanup: keep only edges of dense pairs, drop leftover vertices.
    const int ell = int(clusters.size());
    VertexSet retained(n);
    std::vector<int> cluster_of(n, -1);
    for (int c = 0; c < ell; ++c)
        for (int v : clusters[c]) {
            retained.set(v);
            cluster_of[v] = c;
        }
    std::vector<std::vector<Rat>> dens(ell, std::vector<Rat>(ell, Rat(0)));
    for (int i = 0; i < ell; ++i)
        for (int j = i + 1; j < ell; ++j) {
            Rat d = pair_density(g, VertexSet::of(n, clusters[i]), VertexSet::of(n, clusters[j]));
            dens[i][j] = dens[j][i] = d;
        }

    RefinementResult result;
    result.rounds = rounds;
    std::vector<int> to_host = retained.to_vector();
    std::vector<int> to_sub(n, -1);
    for (std::size_t i = 0; i < to_host.size(); ++i) to_sub[to_host[i]] = int(i);
    Graph cleaned(int(to_host.size()));
    long long removed_edges = 0;
    for (int u = 0; u < n; ++u) {
        if (!retained.test(u)) continue;
        const VertexSet& nb = g.neighbors(u);
        for (int v = nb.next(u); v >= 0; v = nb.next(v)) {
            if (!retained.test(v)) continue;
            int cu = cluster_of[u], cv = cluster_of[v];
            if (cu != cv && dens[cu][cv] >= eta)
                cleaned.add_edge(to_sub[u], to_sub[v]);
            else
                ++removed_edges;
        }
    }
    result.discarded_vertices = n - retained.count();
    result.removed_edges = removed_edges;
    if (Rat(result.discarded_vertices) > eps * n)
        throw EmbedFailure("refine_partition: leftover discard exceeds eps*n");
    const Rat loss_cap = (eta + eps) * n;
    for (int u = 0; u < n; ++u) {
        if (!retained.test(u)) continue;
        if (Rat(g.degree(u) - cleaned.degree(to_sub[u])) > loss_cap)
            throw EmbedFailure("refine_partition: per-vertex degree loss exceeds (eta+eps)n");
    }

    result.cleaned.graph = std::move(cleaned);
    result.cleaned.to_host = std::move(to_host);
    RegularPartition& part = result.partition;
    part.eps = eps;
    part.eta = eta;
    for (int c = 0; c < ell; ++c) {
        VertexSet cl(result.cleaned.graph.n());
        for (int v : clusters[c]) cl.set(to_sub[v]);
        part.clusters.push_back(cl);
    }
    part.verdicts.assign(ell, std::vector<PairVerdict>(ell));
    part.density.assign(ell, std::vector<Rat>(ell, Rat(0)));
    for (int i = 0; i < ell; ++i)
        for (int j = 0; j < ell; ++j) {
            if (i == j) continue;
            if (dens[i][j] >= eta) {
                part.density[i][j] = dens[i][j];
                PairVerdict v = verdicts[i][j];
                if (v.witness) {
                    PairWitness w{VertexSet(result.cleaned.graph.n()),
                                  VertexSet(result.cleaned.graph.n())};
                    for (int x = v.witness->x.first(); x >= 0; x = v.witness->x.next(x))
                        w.x.set(to_sub[x]);
                    for (int y = v.witness->y.first(); y >= 0; y = v.witness->y.next(y))
                        w.y.set(to_sub[y]);
                    v.witness = w;
                }
                part.verdicts[i][j] = v;
            } else {
                // Sparse pair: edges removed, density exactly zero, trivially regular.
                part.density[i][j] = Rat(0);
                part.verdicts[i][j] = {VerdictKind::Certified, std::nullopt};
            }
        }
    return result;
}

std::pair<ReducedGraph, Fact3Report> build_reduced(const Graph& cleaned,
                                                   const RegularPartition& p, const Rat& eta) {
    const int ell = p.cluster_count();
    ReducedGraph rg;
    rg.eta = eta;
    rg.graph = Graph(ell);
    for (int i = 0; i < ell; ++i)
        for (int j = i + 1; j < ell; ++j)
            if (p.density[i][j] >= eta) rg.graph.add_edge(i, j);
    Fact3Report report;
    const long long nprime = (long long)p.cluster_size() * ell;
    for (int c = 0; c < ell; ++c) {
        long long degsum = 0;
        for (int v = p.clusters[c].first(); v >= 0; v = p.clusters[c].next(v))
            degsum += cleaned.degree(v);
        // deg_R(C) >= avgdeg(C) * |R| / n', exact on the cleaned graph.
        Rat lhs = Rat(rg.graph.degree(c));
        Rat rhs = Rat(degsum, p.clusters[c].count()) * Rat(ell, nprime);
        report.per_cluster.push_back({lhs, rhs});
        if (lhs < rhs) report.holds = false;
    }
    if (!report.holds)
        throw ContractViolation("build_reduced: cluster degree bound failed on cleaned graph");
    return {rg, report};
}

// ---------------------------------------------------------------------------
// Regular-pair tree embedding

Embedding regular_pair_tree_embed(const Graph& g, const VertexSet& a, const VertexSet& b,
                                  const VertexSet& x, const VertexSet& y, const VertexSet& z,
                                  const RootedTree& t, const PairEmbedOptions& opt) {
    const long long m = a.count();
    if (m != b.count()) throw PreconditionError("regular_pair_tree_embed: |A| != |B|");
    if (a.intersects(b)) throw PreconditionError("regular_pair_tree_embed: sides overlap");
    if (!x.is_subset_of(a) || !y.is_subset_of(b))
        throw PreconditionError("regular_pair_tree_embed: X,Y must be subsets of A,B");
    if (!(opt.eps > 0))
        throw PreconditionError("regular_pair_tree_embed: eps > 0 required");
    const Rat d = pair_density(g, a, b);
    VertexSet avail_a = x - z, avail_b = y - z;
    if (opt.strict_ranges) {
        if (!(opt.eps <= Rat(1, 25)))
            throw PreconditionError("regular_pair_tree_embed: eps <= 1/25 required");
        if (Rat(t.n_vertices()) > opt.eps * m)
            throw PreconditionError("regular_pair_tree_embed: |T| exceeds beta*m");
        const Rat min_d = opt.min_density.value_or(5 * opt.sqrt_eps);
        if (d < min_d)
            throw PreconditionError("regular_pair_tree_embed: pair density below threshold");
        if (!(Rat(avail_a.count()) > opt.sqrt_eps * m && Rat(avail_b.count()) > opt.sqrt_eps * m))
            throw PreconditionError("regular_pair_tree_embed: min(|X\\Z|,|Y\\Z|) <= sqrt(eps)m");
    } else if (opt.min_density && d < *opt.min_density) {
        throw PreconditionError("regular_pair_tree_embed: pair density below threshold");
    }

    ColourClasses cls = colour_classes(t);
    bool c_to_a = true;
    if (opt.root_pin >= 0) {
        if (a.test(opt.root_pin))
            c_to_a = true;
        else if (b.test(opt.root_pin))
            c_to_a = false;
        else
            throw PreconditionError("regular_pair_tree_embed: pin outside the pair");
        if (!g.neighbors(opt.root_pin).capacity())
            throw PreconditionError("regular_pair_tree_embed: bad pin");
    }

    Embedding emb(t.n_vertices(), g.n());
    const Rat floor_cnt = opt.candidate_floor.value_or(2 * opt.eps * m);
    auto side_avail = [&](int tv) -> VertexSet& {
        bool in_c = cls.c.test(tv);
        return (in_c == c_to_a) ? avail_a : avail_b;
    };
    auto other_avail = [&](int tv) -> VertexSet& {
        bool in_c = cls.c.test(tv);
        return (in_c == c_to_a) ? avail_b : avail_a;
    };

    int step = 0;
    for (int tv : t.dfs_order()) {
        ++step;
        VertexSet& mine = side_avail(tv);
        VertexSet& other = other_avail(tv);
        if (tv == t.root() && opt.root_pin >= 0) {
            if (emb.used.test(opt.root_pin))
                throw PreconditionError("regular_pair_tree_embed: pin already used");
            emb.place(tv, opt.root_pin);
            continue;
        }
        VertexSet cand = tv == t.root() ? mine : (g.neighbors(emb.image[t.parent(tv)]) & mine);
        if (opt.allowed && !(*opt.allowed)[tv].empty()) cand &= (*opt.allowed)[tv];
        // Keep only images typical to the other side's current availability,
        // so the next level retains a full candidate supply.
        VertexSet filtered(g.n());
        const Rat threshold = (d - opt.eps) * other.count();
        for (int v2 = cand.first(); v2 >= 0; v2 = cand.next(v2))
            if (Rat(g.deg_into(v2, other)) > threshold) filtered.set(v2);
        long long options = filtered.count();
        if (Rat(options) < floor_cnt)
            throw EmbedFailure("regular_pair_tree_embed: placement starvation at step " +
                               std::to_string(step) + " (tree vertex " + std::to_string(tv) +
                               ", candidates " + std::to_string(options) + ")");
        int best = -1, best_res = -1;
        for (int v2 = filtered.first(); v2 >= 0; v2 = filtered.next(v2)) {
            int res = g.deg_into(v2, other);
            if (res > best_res) {
                best = v2;
                best_res = res;
            }
        }
        emb.place(tv, best, options);
        mine.reset(best);
    }
    PinList pins;
    if (opt.root_pin >= 0) pins.push_back({t.root(), opt.root_pin});
    if (!verify_embedding(t, g, emb, pins))
        throw ContractViolation("regular_pair_tree_embed: replay verification failed");
    for (int tv = 0; tv < t.n_vertices(); ++tv) {
        if (tv == t.root() && opt.root_pin >= 0) continue;
        bool in_c = cls.c.test(tv);
        const VertexSet& zone_side = (in_c == c_to_a) ? x : y;
        if (!zone_side.test(emb.image[tv]) || z.test(emb.image[tv]))
            throw ContractViolation("regular_pair_tree_embed: image escaped (X u Y) \\ Z");
    }
    return emb;
}

// ---------------------------------------------------------------------------
// Matching structure

bool verify_matching_structure(const Graph& reduced, const MatchingStructure& ms,
                               int half_size, long long t_param, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    const int ell = reduced.n();
    std::vector<int> role(ell, 0);  // 0 unseen, 1 matched, 2 independent
    for (auto [c, d2] : ms.matching) {
        if (c < 0 || c >= ell || d2 < 0 || d2 >= ell || c == d2) return fail("bad matching pair");
        if (!reduced.has_edge(c, d2)) return fail("matching pair is not a reduced edge");
        if (role[c] || role[d2]) return fail("matching not vertex-disjoint");
        role[c] = role[d2] = 1;
    }
    for (int c : ms.independent) {
        if (c < 0 || c >= ell || role[c]) return fail("independent family overlaps matching");
        role[c] = 2;
    }
    for (int c = 0; c < ell; ++c)
        if (!role[c]) return fail("coverage: cluster in neither M nor I");
    for (std::size_t i = 0; i < ms.independent.size(); ++i)
        for (std::size_t j = i + 1; j < ms.independent.size(); ++j)
            if (reduced.has_edge(ms.independent[i], ms.independent[j]))
                return fail("independent family has an internal edge");
    if (2LL * (long long)ms.matching.size() * half_size < 2 * t_param)
        return fail("|union V(M)| < 2t");
    std::vector<int> side(ell, 0);
    for (int c : ms.v1) side[c] = 1;
    for (int c : ms.v2) {
        if (side[c]) return fail("V1 and V2 overlap");
        side[c] = 2;
    }
    for (auto [c, d2] : ms.matching)
        if (!((side[c] == 1 && side[d2] == 2) || (side[c] == 2 && side[d2] == 1)))
            return fail("matching edge does not cross V1/V2");
    for (int c = 0; c < ell; ++c)
        if (role[c] == 1 && side[c] == 0) return fail("matched cluster missing from V1/V2");
    for (int i : ms.independent) {
        const VertexSet& nb = reduced.neighbors(i);
        for (int c = nb.first(); c >= 0; c = nb.next(c))
            if (side[c] != 1) return fail("N(I) escapes V1");
    }
    return true;
}

MatchingStructureResult matching_structure(const Graph& g, const RegularPartition& p,
                                           long long t_param, const CheckMode& mode) {
    const int ell = p.cluster_count();
    const int s = p.cluster_size();
    if (g.n() < 2 * t_param + ell)
        throw PreconditionError("matching_structure: |G| >= 2t + l required");
    if (g.min_degree() < t_param + ell)
        throw PreconditionError("matching_structure: delta(G) >= t + l required");

    // Original-scale reduced graph for the matching.
    Graph reduced0(ell);
    for (int i = 0; i < ell; ++i)
        for (int j = i + 1; j < ell; ++j)
            if (p.density[i][j] >= p.eta) reduced0.add_edge(i, j);
    std::vector<std::pair<int, int>> m0 = maximum_matching(reduced0);
    std::vector<int> partner(ell, -1);
    for (auto [c, d2] : m0) {
        partner[c] = d2;
        partner[d2] = c;
    }
    std::vector<int> indep0;
    for (int c = 0; c < ell; ++c)
        if (partner[c] < 0) indep0.push_back(c);
    for (std::size_t i = 0; i < indep0.size(); ++i)
        for (std::size_t j = i + 1; j < indep0.size(); ++j)
            if (reduced0.has_edge(indep0[i], indep0[j]))
                throw ContractViolation("matching_structure: unmatched set not independent");

    // Triangle repair: a matching edge with both ends adjacent to I shares a
    // single common I-neighbour J (otherwise an augmenting path would exist);
    // J's halves absorb one endpoint half each and J leaves I.
    std::vector<bool> in_indep(ell, false);
    for (int c : indep0) in_indep[c] = true;
    auto sees_indep = [&](int c) {
        const VertexSet& nb = reduced0.neighbors(c);
        for (int u = nb.first(); u >= 0; u = nb.next(u))
            if (in_indep[u]) return u;
        return -1;
    };
    struct HalfEdge { int c, d2; };           // halved matching edges, by (cluster, half)
    // Describe halves as 2*cluster + {0,1}.
    std::vector<HalfEdge> half_edges;
    std::vector<int> half_side;  // filled later
    std::vector<bool> edge_done(m0.size(), false);
    std::vector<bool> consumed(ell, false);  // I-clusters pulled into the matching
    bool changed = true;
    std::vector<std::array<int, 3>> triangles;  // (c, d, j)
    while (changed) {
        changed = false;
        for (std::size_t e = 0; e < m0.size(); ++e) {
            if (edge_done[e]) continue;
            auto [c, d2] = m0[e];
            int jc = sees_indep(c), jd = sees_indep(d2);
            if (jc >= 0 && jd >= 0) {
                if (jc != jd)
                    throw ContractViolation(
                        "matching_structure: augmenting path survived maximum matching");
                triangles.push_back({c, d2, jc});
                in_indep[jc] = false;
                consumed[jc] = true;
                edge_done[e] = true;
                changed = true;
            }
        }
    }

    // Halve every cluster; odd leftovers are discarded (at most one each).
    const int half = s / 2;
    if (half < 1) throw PreconditionError("matching_structure: clusters too small to halve");
    MatchingStructureResult out;
    VertexSet keep(g.n());
    std::vector<std::vector<int>> half_members(2 * ell);
    for (int c = 0; c < ell; ++c) {
        std::vector<int> ids = p.clusters[c].to_vector();
        for (int i = 0; i < 2 * half; ++i) {
            keep.set(ids[i]);
            half_members[2 * c + (i >= half ? 1 : 0)].push_back(ids[i]);
        }
    }
    out.g2 = induced_subgraph(g, keep);
    const Graph& g2 = out.g2.graph;
    std::vector<int> to_sub(g.n(), -1);
    for (std::size_t i = 0; i < out.g2.to_host.size(); ++i) to_sub[out.g2.to_host[i]] = int(i);

    RegularPartition& hp = out.halved;
    hp.eps = 5 * p.eps;
    hp.eta = p.eta - p.eps;
    for (auto& mem : half_members) {
        VertexSet cl(g2.n());
        for (int v : mem) cl.set(to_sub[v]);
        hp.clusters.push_back(cl);
    }
    const int hell = 2 * ell;
    hp.density.assign(hell, std::vector<Rat>(hell, Rat(0)));
    hp.verdicts.assign(hell, std::vector<PairVerdict>(hell));
    for (int i = 0; i < hell; ++i)
        for (int j = i + 1; j < hell; ++j) {
            Rat d = pair_density(g2, hp.clusters[i], hp.clusters[j]);
            hp.density[i][j] = hp.density[j][i] = d;
            PairVerdict v;
            if (half <= mode.exhaustive_bound && mode.exhaustive) {
                v = check_regular_pair(g2, hp.clusters[i], hp.clusters[j], hp.eps,
                                        mode);
            } else if (i / 2 != j / 2 &&
                       p.verdicts[i / 2][j / 2].kind == VerdictKind::Certified &&
                       Rat(half) * 5 >= Rat(s) * 2) {
                // Subpair regularity: proportion >= 2/5 gives 2eps/alpha <= 5eps.
                v = {VerdictKind::Certified, std::nullopt};
            } else {
                CheckMode m2 = mode;
                m2.exhaustive = false;
                m2.seed = mode.seed ^ (std::uint64_t(i) << 24) ^ std::uint64_t(j);
                v = check_regular_pair(g2, hp.clusters[i], hp.clusters[j], hp.eps, m2);
            }
            hp.verdicts[i][j] = hp.verdicts[j][i] = v;
        }

    auto [rg, fact3] = build_reduced(g2, hp, hp.eta);
    out.reduced = rg;

    // Assemble the halved matching structure.
    MatchingStructure& ms = out.ms;
    std::vector<int> hrole(hell, 0);
    auto add_edge = [&](int hc, int hd, bool c_in_v1) {
        ms.matching.push_back({hc, hd});
        (c_in_v1 ? ms.v1 : ms.v2).push_back(hc);
        (c_in_v1 ? ms.v2 : ms.v1).push_back(hd);
        hrole[hc] = hrole[hd] = 1;
    };
    for (std::size_t e = 0; e < m0.size(); ++e) {
        if (edge_done[e]) continue;
        auto [c, d2] = m0[e];
        // At most one endpoint still sees I; that endpoint (or c by default)
        // goes to V1 so that N(I) stays inside V1.
        bool c_sees = sees_indep(c) >= 0;
        bool d_sees = sees_indep(d2) >= 0;
        if (c_sees && d_sees)
            throw ContractViolation("matching_structure: unrepaired bad edge");
        bool c_in_v1 = c_sees || !d_sees;
        add_edge(2 * c, 2 * d2, c_in_v1);
        add_edge(2 * c + 1, 2 * d2 + 1, c_in_v1);
    }
    for (auto [c, d2, j] : triangles) {
        add_edge(2 * c, 2 * j, true);
        add_edge(2 * d2, 2 * j + 1, true);
        add_edge(2 * c + 1, 2 * d2 + 1, true);
    }
    for (int c = 0; c < ell; ++c) {
        if (partner[c] >= 0 || consumed[c]) continue;
        ms.independent.push_back(2 * c);
        ms.independent.push_back(2 * c + 1);
        hrole[2 * c] = hrole[2 * c + 1] = 2;
    }
    std::string why;
    if (!verify_matching_structure(rg.graph, ms, half, t_param, &why))
        throw EmbedFailure("matching_structure: structure verification failed: " + why);
    return out;
}

// ---------------------------------------------------------------------------
// Partition JSON

std::string RegularPartition::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["eps"] = rat_str(eps);
    j["eta"] = rat_str(eta);
    j["clusters"] = nlohmann::json::array();
    for (const auto& c : clusters) j["clusters"].push_back(c.to_vector());
    j["density"] = nlohmann::json::array();
    for (const auto& row : density) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& d : row) r.push_back(rat_str(d));
        j["density"].push_back(r);
    }
    j["verdicts"] = nlohmann::json::array();
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        for (std::size_t k = i + 1; k < verdicts.size(); ++k) {
            nlohmann::json v;
            v["i"] = i;
            v["j"] = k;
            switch (verdicts[i][k].kind) {
                case VerdictKind::Certified: v["kind"] = "certified"; break;
                case VerdictKind::Heuristic: v["kind"] = "heuristic"; break;
                case VerdictKind::Witness: v["kind"] = "witness"; break;
            }
            if (verdicts[i][k].witness) {
                v["witness_x"] = verdicts[i][k].witness->x.to_vector();
                v["witness_y"] = verdicts[i][k].witness->y.to_vector();
            }
            j["verdicts"].push_back(v);
        }
    }
    return j.dump(2);
}

RegularPartition RegularPartition::from_json(const std::string& text, int n) {
    nlohmann::json j = nlohmann::json::parse(text);
    RegularPartition p;
    p.eps = rat_parse(j.at("eps").get<std::string>());
    p.eta = rat_parse(j.at("eta").get<std::string>());
    for (const auto& c : j.at("clusters"))
        p.clusters.push_back(VertexSet::of(n, c.get<std::vector<int>>()));
    const int ell = int(p.clusters.size());
    p.density.assign(ell, std::vector<Rat>(ell, Rat(0)));
    for (int i = 0; i < ell; ++i)
        for (int k = 0; k < ell; ++k)
            p.density[i][k] = rat_parse(j.at("density")[i][k].get<std::string>());
    p.verdicts.assign(ell, std::vector<PairVerdict>(ell));
    for (const auto& v : j.at("verdicts")) {
        int i = v.at("i").get<int>(), k = v.at("j").get<int>();
        PairVerdict pv;
        std::string kind = v.at("kind").get<std::string>();
        pv.kind = kind == "certified" ? VerdictKind::Certified
                  : kind == "witness" ? VerdictKind::Witness
                                      : VerdictKind::Heuristic;
        if (v.contains("witness_x")) {
            pv.witness = PairWitness{VertexSet::of(n, v.at("witness_x").get<std::vector<int>>()),
                                     VertexSet::of(n, v.at("witness_y").get<std::vector<int>>())};
        }
        p.verdicts[i][k] = p.verdicts[k][i] = pv;
    }
    return p;
}

Rat rat_parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(BigInt(s));
    return Rat(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
}

}  // namespace treesos
