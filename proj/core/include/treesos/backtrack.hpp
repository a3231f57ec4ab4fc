#ifndef TREESOS_BACKTRACK_HPP
#define TREESOS_BACKTRACK_HPP

#include <limits>

#include "treesos/embedding.hpp"

namespace treesos {

enum class ExactStatus { Found, NotFound, BudgetExhausted };

struct ExactResult {
    ExactStatus status = ExactStatus::NotFound;
    Embedding emb;               // valid iff status == Found
    long long expansions = 0;    // nodes expanded by the search
};

/// Candidate orderings for the exact search. Primary prefers high-degree host
/// vertices first; Complement is the reversed heuristic, used to cross-check
/// decisions against an independent exploration order.
enum class SearchOrder { Primary, Complement };

/// Exact subtree-containment search. Deterministic given its inputs; NotFound
/// is a proof of non-containment under the pins. `allowed`, when present,
/// restricts each tree vertex to a host-vertex mask (internal extension used
/// by the pipeline fallbacks).
ExactResult backtracking_embed(const RootedTree& t, const Graph& g, const PinList& pins = {},
                               long long budget = std::numeric_limits<long long>::max(),
                               SearchOrder order = SearchOrder::Primary,
                               const std::vector<VertexSet>* allowed = nullptr);

}  // namespace treesos

#endif
