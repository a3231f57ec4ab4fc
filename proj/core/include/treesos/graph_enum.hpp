#ifndef TREESOS_GRAPH_ENUM_HPP
#define TREESOS_GRAPH_ENUM_HPP

#include <vector>

#include "treesos/graph.hpp"

namespace treesos {

/// All graphs on exactly n vertices up to isomorphism, in a deterministic
/// order. Built by vertex augmentation with invariant-bucketed isomorphism
/// rejection; the count is cross-checkable against count_graphs_burnside.
std::vector<Graph> enumerate_graphs(int n);

/// Exact isomorphism test (backtracking over degree-compatible images).
bool graphs_isomorphic(const Graph& a, const Graph& b);

/// Number of graphs on n labelled vertices up to isomorphism via Burnside's
/// lemma over S_n acting on vertex pairs. Fully independent of the
/// enumerator; used as its correctness oracle.
BigInt count_graphs_burnside(int n);

/// Relabels g by the permutation perm (image of vertex v is perm[v]).
Graph permute_graph(const Graph& g, const std::vector<int>& perm);

}  // namespace treesos

#endif
