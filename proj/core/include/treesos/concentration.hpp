#ifndef TREESOS_CONCENTRATION_HPP
#define TREESOS_CONCENTRATION_HPP

#include <vector>

#include "treesos/bitset.hpp"
#include "treesos/graph.hpp"
#include "treesos/rational.hpp"

namespace treesos {

/// Non-negative function over [N] with a probability measure (uniform unless
/// given). All arithmetic on this type is exact.
struct WeightedFunction {
    std::vector<Rat> values;
    std::vector<Rat> measure;

    static WeightedFunction uniform(std::vector<Rat> vals);
    static WeightedFunction weighted(std::vector<Rat> vals, std::vector<Rat> mu);

    int size() const { return int(values.size()); }
    Rat sup_norm() const;
    Rat expectation() const;
    void validate() const;  // mu >= 0, sum(mu) = 1, f >= 0
};

enum class DichotomyCase { CaseI, CaseII, Both };

/// Exact evaluation of the two-sided concentration dichotomy:
///   (i)  mu({f > (1+sqrt(eps)) t}) >= eps
///   (ii) mu({f > (1-eps^(1/4)) t}) >= 1 - eps^(1/4)
/// under sqrt(eps)*||f||_inf < t <= E_mu(f). The irrational thresholds use
/// rational over-approximations (rounded up), which tightens (i) and loosens
/// (ii); at least one case must hold and the function faults otherwise.
DichotomyCase concentration_dichotomy(const WeightedFunction& wf, const Rat& t, const Rat& eps);

/// Returns {n : f(n) >= (1-sqrt(eps)) t} and asserts it has >= (1-sqrt(eps))N
/// members; requires t <= mean(f), ||f||_inf <= (1+eps)t, 0 < eps < 1/2.
/// sqrt(eps) is an over-approximation, which grows the returned set and
/// weakens the size bound in the same direction, so the assertion is sound.
VertexSet concentration_bound(const std::vector<Rat>& f, const Rat& t, const Rat& eps);

}  // namespace treesos

#endif
