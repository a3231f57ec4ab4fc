#ifndef TREESOS_DENSE_EMBED_HPP
#define TREESOS_DENSE_EMBED_HPP

#include <optional>
#include <string>

#include "treesos/extremal_embed.hpp"
#include "treesos/regularity.hpp"

namespace treesos {

// ---------------------------------------------------------------------------
// Reduced-graph structure (cluster X, matchings M_W/M_V, bipartite (A,B))

struct StructureCertificate {
    int x_cluster = -1;
    std::vector<std::pair<int, int>> m_w;  // matching inside N(X)
    std::vector<std::pair<int, int>> m_v;  // (endpoint in N(X), endpoint outside)
    std::vector<int> a_part;               // independent clusters in N(X) off M_W
    std::vector<int> b_part;               // N(a_part) off M_W
    CertificateChain properties;           // evaluated (I)-(IV)
};

struct FindStructureResult {
    MatchingStructureResult base;  // halved partition, reduced graph, (M, I, V1, V2)
    StructureCertificate cert;
};

/// Halve the partition via the matching structure and extract the seed
/// cluster X plus (M_W, M_V, A, B) with properties (I)-(IV) verified.
FindStructureResult find_structure(const Graph& cleaned, const RegularPartition& p, int k,
                                   const Rat& delta, const CheckMode& mode);

// ---------------------------------------------------------------------------
// Balancing lemma

struct BalanceItem {
    Rat a;
    Rat b;
};

/// Maximal prefix of the b/a-ascending order fitting below m_cap. Exact
/// rationals; items with a = 0 order last. Guarantees
/// min(m_cap - lambda, sum(a+b)) <= sum_J(a+b) <= m_cap and the ratio bound.
std::vector<int> balance_components(const std::vector<BalanceItem>& items, const Rat& m_cap,
                                    const Rat& lambda);

// ---------------------------------------------------------------------------
// Main dense pipelines

struct LinearConfig {
    Rat eps = Rat(1, 16);
    Rat eta = Rat(1, 8);
    CheckMode mode;
    int max_clusters = 64;
    // Overridable constants; defaults follow the eps-functional forms, which
    // are meaningful only for tiny eps. Tests pin desk-scale values.
    std::optional<Rat> rho;      // Delta(T) <= rho*k
    std::optional<Rat> beta;     // tree-cut parameter (default eps/|R'|)
    std::optional<Rat> c_e2;     // E2 floor coefficient (default 5 eps^(1/4))
    std::optional<Rat> c_good;   // good-cluster coefficient (default 7 eps^(1/4))
    std::optional<Rat> c_case1;  // case-1 switch (default 10 eps^(1/4))
    std::optional<Rat> c_m;      // M = k - (1-c_m)|U V(M_W)| (default 11 eps^(1/4))
    std::optional<Rat> c_size2;  // P2 mass bound (default 10 eps^(1/4))
    long long fallback_budget = 100'000'000;

    Rat rho_value(int max_cl) const {
        if (rho) return *rho;
        return eps * eps / (16LL * max_cl * max_cl);
    }
};

struct DenseRunResult {
    Embedding emb;
    bool fallback_used = false;
    std::string route;
    CertificateChain chain;
};

/// Host with delta(G) >= (1+delta)k/2 and >= ceil(delta n) vertices of degree
/// >= (1+delta)k: regularise, extract the structure, cut T evenly, balance the
/// pieces and run the placement loop maintaining E1-E4. Starvation names the
/// violated invariant and falls back to exact search (recorded).
DenseRunResult embed_linear_degree(const Graph& g, int k, const Rat& delta, const RootedTree& t,
                                   const LinearConfig& cfg);

/// d(G) >= (1+delta)k: peel, then either dispatch to embed_linear_degree or
/// delete the concentration-certified low-degree tail and finish greedily.
DenseRunResult embed_avg_boost(const Graph& g, int k, const Rat& delta, const RootedTree& t,
                               const LinearConfig& cfg);

// ---------------------------------------------------------------------------
// Non-bipartite structure + embedder

struct NonbipStructure {
    MatchingStructureResult base;
    VertexSet i_set, v1, v2;  // vertex sets over base.g2 ids
    CertificateChain report;  // evaluated (a)-(d)
    bool all_hold = false;
};

/// Attempts the I/V1/V2 extraction and reports which of the four structure
/// properties hold; extraction never aborts on a failed property.
NonbipStructure nonbip_structure(const Graph& cleaned, const RegularPartition& p, int k,
                                 const Rat& eta, const CheckMode& mode);

/// Dense non-bipartite embedder over a verified structure; routes bare paths
/// (or leaves) through I until ceil(delta k/100) I-vertices are used, then
/// finishes greedily.
DenseRunResult embed_nonbip_dense(const Graph& cleaned, const NonbipStructure& s, const Rat& delta,
                                  const Rat& eta, const RootedTree& t, long long fallback_budget);

// ---------------------------------------------------------------------------
// Bipartite reduced-graph embedders

struct BipForestOptions {
    Rat eps;                    // partition eps
    long long fallback_budget = 100'000'000;
    explicit BipForestOptions(const Rat& e) : eps(e) {}
};

/// Contract-level realisation of the bipartite reduced-graph forest embedder:
/// A-class into the chosen clusters of script-A, B-class into script-B, built
/// from cut_set pieces placed across regular pairs; success is verified and a
/// genuine NotFound propagates as failure.
DenseRunResult bipartite_forest_embed(const Graph& cleaned, const RegularPartition& p,
                                      const ReducedGraph& r, const std::vector<int>& v_sub,
                                      const std::vector<int>& b_side, long long k1, long long k2,
                                      const RootedTree& t, const BipForestOptions& opt);

/// Dispatch for a connected bipartite reduced graph: the unbalanced tree goes
/// directly through the forest embedder; balanced trees go through the
/// high-degree cluster sets V_A / V_B whose existence the counting stage
/// asserts.
DenseRunResult embed_bip_reduced(const Graph& cleaned, const RegularPartition& p,
                                 const ReducedGraph& r, int k, const Rat& delta, const Rat& eta,
                                 const RootedTree& t, const BipForestOptions& opt);

// ---------------------------------------------------------------------------
// Theorem-level dispatcher

struct DispatchConfig {
    Rat nu = Rat(1, 16);      // near-extremal proximity
    Rat eps = Rat(1, 16);     // regularity eps
    Rat eta = Rat(1, 8);      // density threshold
    Rat theta = Rat(1, 8);    // average-degree boost threshold
    Rat delta = Rat(1, 8);    // k >= delta n
    int delta_max = 3;        // tree maximum degree
    CheckMode mode;
    LinearConfig linear;
    long long fallback_budget = 100'000'000;
    int jobs = 1;
    bool emit_certificate = false;
};

struct TreeRunReport {
    std::string tree;  // canonical form
    bool success = false;
    bool fallback_used = false;
    std::string route;
    std::string failure;  // empty on success
};

struct DispatchReport {
    int k = 0;
    int delta_max = 0;
    std::vector<TreeRunReport> per_tree;
    std::vector<std::string> notes;  // route-level diagnostics
    bool all_succeeded() const;
    std::string to_json() const;
};

/// Runs the theorem's decision tree for every T in T(k, Delta): near-complete
/// host, near-complete bipartite host, or the reduced-graph routes with
/// component redistribution and the cross-component split. Every failure
/// report carries the route and stage.
DispatchReport embed_dispatch(const Graph& g, int k, const DispatchConfig& cfg);

}  // namespace treesos

#endif
