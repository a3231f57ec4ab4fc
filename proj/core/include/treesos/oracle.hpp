#ifndef TREESOS_ORACLE_HPP
#define TREESOS_ORACLE_HPP

#include <string>
#include <vector>

#include "treesos/backtrack.hpp"
#include "treesos/graph_enum.hpp"
#include "treesos/tree.hpp"

namespace treesos {

/// Exact containment decision. Unlimited search at oracle scale (n <= 10);
/// beyond that the budget guards the search and an exhausted budget throws.
bool contains_tree(const Graph& g, const RootedTree& t,
                   long long budget = std::numeric_limits<long long>::max());

struct Counterexample {
    std::string graph6;
    int k = 0;
    std::string tree;
};

struct VerifyReport {
    int n_max = 0;
    std::string source;
    long long graphs = 0;
    long long instances = 0;  // (graph, k, tree) triples checked
    long long verified = 0;
    std::vector<Counterexample> counterexamples;
    std::vector<std::pair<int, std::string>> enumeration_check;  // per n: count vs Burnside
    bool enumeration_ok = true;
    long long runtime_ms = -1;  // emitted only when timings are requested

    std::string to_json(bool include_runtime = false) const;
};

/// Sweeps every graph up to isomorphism with n <= n_max, every k with
/// 2e(G) > (k-1)n, every k-edge tree; reports all counterexamples (none are
/// expected). Enumeration counts are cross-checked against Burnside.
VerifyReport verify_erdos_sos(int n_max, int jobs = 1);

/// Same sweep over an external graph6 corpus instead of the internal
/// enumeration (k and trees chosen per graph as above).
VerifyReport verify_erdos_sos_corpus(const std::vector<Graph>& corpus, int jobs = 1);

struct RamseyFailure {
    int sample = 0;
    std::string reason;
};

struct RamseyReport {
    int ell = 0, k = 0, delta_max = 0, samples = 0, host_n = 0;
    std::uint64_t seed = 0;
    long long trees = 0;
    long long verified_samples = 0;
    std::vector<RamseyFailure> failures;
    long long runtime_ms = -1;

    std::string to_json(bool include_runtime = false) const;
};

/// Seeded l-colourings of K_{l(k-1)+2}: the majority colour must have average
/// degree > k-1 (checked) and contain every tree of T(k,Delta) in that single
/// colour simultaneously. Any failure is a red flag against the oracle.
RamseyReport ramsey_sample_check(int ell, int k, int delta_max, int samples, std::uint64_t seed);

}  // namespace treesos

#endif
