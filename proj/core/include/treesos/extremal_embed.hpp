#ifndef TREESOS_EXTREMAL_EMBED_HPP
#define TREESOS_EXTREMAL_EMBED_HPP

#include <optional>

#include "treesos/embedding.hpp"
#include "treesos/greedy.hpp"
#include "treesos/report.hpp"

namespace treesos {

/// Low/high degree split of a near-complete host around the pivot v*.
struct DegreeProfile {
    VertexSet x;         // degree <= floor((1-sqrt(eps))k)
    VertexSet y;         // degree >= k
    int v_star = -1;     // Y-vertex minimising |N(v) n X|
    VertexSet x_v_star;  // N(v*) n X
};

DegreeProfile compute_degree_profile(const Graph& g, int k, const Rat& sqrt_eps);

struct ExtremalConfig {
    Rat eps;             // proximity parameter (paper default 10^-11; desk-configurable)
    Rat sqrt_eps;        // rational upper bound on sqrt(eps)
    std::optional<Rat> delta_t_cap;  // cap on Delta(T); default sqrt(k)/1000
    bool enforce_nu_range = false;   // hard 1/200 window for the finisher
    long long fallback_budget = 200'000'000;

    explicit ExtremalConfig(const Rat& e) : eps(e), sqrt_eps(sqrt_upper(e)) {}
};

struct ExtremalRunResult {
    Embedding emb;
    bool fallback_used = false;
    std::string route;       // which branch of the pipeline ran
    CertificateChain chain;  // every inequality the run relied on
};

/// Near-complete host embedder: n <= (1+eps)k, d(G) > k-1, delta(G) >= k/2.
/// Follows the profile -> cut-subtree -> bare-path/leaf case split -> finisher
/// pipeline, checking each inequality it uses; starvation falls back to exact
/// search and is recorded.
ExtremalRunResult embed_almost_complete(const Graph& g, int k, const RootedTree& t,
                                        const ExtremalConfig& cfg);

/// Near-complete balanced-bipartite host embedder (eps := 1/(25 Delta^2)).
ExtremalRunResult embed_almost_complete_bipartite(const Graph& g, const Bipartition& p, int k,
                                                  int delta_cap, const RootedTree& t);

/// Internally disjoint x-x' paths of length <= 3 avoiding `avoid` internally.
/// Shortest paths are preferred; `max_possible` is the exact maximum (unit
/// flow), so a shortfall is a counted certificate.
struct ShortPaths {
    std::vector<std::vector<int>> paths;  // each includes x and x'
    long long max_possible = 0;
    bool shortfall = false;
};
ShortPaths short_connecting_paths(const Graph& g, int x, int x_prime, const VertexSet& avoid,
                                  long long want);

/// Reserved high-degree set Y' (<= floor(5 sqrt(eps) k) vertices) such that
/// all but at most floor(2 eps k) vertices of G-X have >= |X| neighbours in
/// Y'. Implements both cases of the counting argument.
struct ReserveResult {
    VertexSet y_prime;
    VertexSet z_bad;
    CertificateChain chain;
};
ReserveResult reserve_high_degree_set(const Graph& g, const DegreeProfile& profile, int k,
                                      const Rat& eps, const Rat& sqrt_eps);

}  // namespace treesos

#endif
