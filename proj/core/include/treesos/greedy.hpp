#ifndef TREESOS_GREEDY_HPP
#define TREESOS_GREEDY_HPP

#include "treesos/backtrack.hpp"
#include "treesos/embedding.hpp"

namespace treesos {

/// Greedy embedding with an exception budget. T must have k-h edges for
/// k := T.k()+h; requires delta(G) >= Delta(T)+h and at most h vertices of
/// degree < k. The root is placed on v, its children on degree->=k neighbours
/// of v, and every later vertex on a degree->=k vertex. Failure under the
/// preconditions is impossible and faults.
Embedding greedy_embed_h(const RootedTree& t, const Graph& g, int h, int v);

/// Which host side receives the tree colour class C (the root's class).
enum class BipOrientation { CtoA, CtoB };

/// Bipartite variant: C goes to one side, D to the other, root at v on C's
/// side. Degrees are counted across the bipartition only.
Embedding greedy_embed_bipartite(const RootedTree& t, const Graph& g, const Bipartition& p,
                                 int h, BipOrientation orient, int v);

struct EmbedOutcome {
    Embedding emb;
    bool fallback_used = false;
};

/// Spanning-or-near-spanning embedding into a (k+1)-vertex host of minimum
/// degree >= (1-2nu)k containing a dominating vertex v. The root image may be
/// pinned to any vertex other than v (root_image = -1 leaves it free).
/// Strategy: greedy skeleton placement holding the leaves back, then an
/// augmenting-path matching of leaves onto unused hosts; exact search with
/// the placed skeleton pinned is the recorded fallback.
/// enforce_nu_range toggles the hard 0 < nu < 1/200 window; the relaxed mode
/// keeps every structural check but lets desk-scale nu through.
EmbedOutcome near_complete_embed(const RootedTree& t, const Graph& h, int v, const Rat& nu,
                                 int root_image = -1, bool enforce_nu_range = true);

}  // namespace treesos

#endif
