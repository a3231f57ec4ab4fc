#ifndef TREESOS_REGULARITY_HPP
#define TREESOS_REGULARITY_HPP

#include <optional>
#include <string>
#include <vector>

#include "treesos/embedding.hpp"
#include "treesos/graph.hpp"
#include "treesos/rational.hpp"
#include "treesos/tree.hpp"

namespace treesos {

// ---------------------------------------------------------------------------
// Pair regularity

enum class VerdictKind { Certified, Heuristic, Witness };

/// Witness pair (X,Y) with |X| > eps|A|, |Y| > eps|B| and |d(X,Y)-d(A,B)| >= eps.
struct PairWitness {
    VertexSet x;
    VertexSet y;
};

struct PairVerdict {
    VerdictKind kind = VerdictKind::Heuristic;
    std::optional<PairWitness> witness;
};

struct CheckMode {
    bool exhaustive = true;
    int exhaustive_bound = 16;   // max side size for subset enumeration
    std::uint64_t seed = 0;      // sampled mode
    int trials = 2000;
};

/// Exact pair density e(A,B)/(|A||B|).
Rat pair_density(const Graph& g, const VertexSet& a, const VertexSet& b);

/// Regularity check. Exhaustive mode enumerates subsets of the smaller side
/// and extremises the other side, which is exact; sampled mode never returns
/// Certified. Any returned witness is re-verified before return.
PairVerdict check_regular_pair(const Graph& g, const VertexSet& a, const VertexSet& b,
                               const Rat& eps, const CheckMode& mode);

/// {x in A : deg(x,Y) > (d-eps)|Y|}. Y must be significant (|Y| > eps|B|,
/// b_size = |B|). With certified = true the Fact-1(i) count |A\result| <=
/// eps|A| is asserted.
VertexSet typical_vertices(const Graph& g, const VertexSet& a, const VertexSet& y,
                           long long b_size, const Rat& d, const Rat& eps,
                           bool certified = false);

// ---------------------------------------------------------------------------
// Partitions

struct RegularPartition {
    std::vector<VertexSet> clusters;  // equal sizes, disjoint
    Rat eps;
    Rat eta;
    std::vector<std::vector<Rat>> density;          // symmetric, exact
    std::vector<std::vector<PairVerdict>> verdicts; // [i][j], i < j meaningful

    int cluster_count() const { return int(clusters.size()); }
    int cluster_size() const { return clusters.empty() ? 0 : clusters[0].count(); }

    std::string to_json() const;
    static RegularPartition from_json(const std::string& text, int n);
};

struct RefinementResult {
    InducedSubgraph cleaned;      // G' (intra-cluster and sparse-pair edges gone)
    RegularPartition partition;   // over cleaned.graph's vertex ids
    int rounds = 0;
    long long discarded_vertices = 0;
    long long removed_edges = 0;
};

/// Iterative-refinement stand-in for the regularity lemma: split clusters by
/// verified witness pairs until no witness is found, then discard leftovers
/// and clean sparse/intra edges. Enforced bounds: |G|-|G'| <= eps|G| and
/// per-vertex degree loss <= (eta+eps)|G|; failure to meet them aborts with
/// a diagnostic error.
RefinementResult refine_partition(const Graph& g, const Rat& eps, const Rat& eta,
                                  int max_clusters, const CheckMode& mode);

struct ReducedGraph {
    Graph graph;  // vertices are cluster indices
    Rat eta;
};

struct Fact3Report {
    bool holds = true;
    // Per cluster: reduced degree vs average-degree bound, exact rationals.
    std::vector<std::pair<Rat, Rat>> per_cluster;  // (lhs, rhs) of deg >= avg*t
};

/// Reduced graph (edges where density >= eta) plus the degree-consistency
/// report: deg_R(C) >= avgdeg_{G'}(C) * |R|/n' holds exactly on the cleaned
/// graph and is checked per cluster.
std::pair<ReducedGraph, Fact3Report> build_reduced(const Graph& cleaned,
                                                   const RegularPartition& p, const Rat& eta);

// ---------------------------------------------------------------------------
// Regular-pair tree embedding

struct PairEmbedOptions {
    Rat eps;
    Rat sqrt_eps;                    // rational upper bound on sqrt(eps)
    std::optional<Rat> min_density;  // default 5*sqrt_eps
    int root_pin = -1;               // optional host pin for the tree root
    // Optional per-tree-vertex host masks (e.g. keeping S-parents typical to
    // a seed cluster). Indexed by tree vertex; empty mask = unrestricted.
    const std::vector<VertexSet>* allowed = nullptr;
    // The lemma's numeric window (eps <= 1/25, |T| <= eps m, availability
    // > sqrt(eps) m, d >= 5 sqrt(eps)). The dense loop runs the same machinery
    // at configured desk parameters with these checks off and its own floor.
    bool strict_ranges = true;
    std::optional<Rat> candidate_floor;  // default 2 eps m
    PairEmbedOptions(const Rat& e) : eps(e), sqrt_eps(sqrt_upper(e)) {}
};

/// Embeds T into (X u Y) \ Z across a regular pair, colour classes to sides,
/// recording in the trace how many admissible images each vertex had. The
/// 2*eps*m candidate floor is enforced; starvation throws EmbedFailure with
/// the failing step.
Embedding regular_pair_tree_embed(const Graph& g, const VertexSet& a, const VertexSet& b,
                                  const VertexSet& x, const VertexSet& y, const VertexSet& z,
                                  const RootedTree& t, const PairEmbedOptions& opt);

// ---------------------------------------------------------------------------
// Matching structure (reduced-graph matching + independent family)

struct MatchingStructure {
    std::vector<std::pair<int, int>> matching;  // cluster-index pairs of M
    std::vector<int> independent;               // I
    std::vector<int> v1, v2;                    // partition of V(M), N(I) inside v1
};

struct MatchingStructureResult {
    InducedSubgraph g2;        // relative to the input (cleaned) graph
    RegularPartition halved;   // 2l parts, (5 eps, eta - eps)
    ReducedGraph reduced;      // of the halved partition
    MatchingStructure ms;
};

/// Halves the partition and extracts (M, I, V1, V2) with: coverage of V(G'),
/// |union V(M)| >= 2t, I independent and pairwise non-adjacent, N(I) in V1,
/// every M-edge crossing V1/V2. All properties are machine-verified before
/// return. Requires |G| >= 2t+l and delta(G) >= t+l.
MatchingStructureResult matching_structure(const Graph& g, const RegularPartition& p,
                                           long long t_param, const CheckMode& mode);

/// Independent verifier for the structure above (separate code path).
bool verify_matching_structure(const Graph& reduced, const MatchingStructure& ms,
                               int half_size, long long t_param, std::string* why = nullptr);

/// Maximum matching in a small general graph (blossom algorithm).
std::vector<std::pair<int, int>> maximum_matching(const Graph& g);

}  // namespace treesos

#endif
