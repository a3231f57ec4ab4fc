#ifndef TREESOS_EMBEDDING_HPP
#define TREESOS_EMBEDDING_HPP

#include <vector>

#include "treesos/graph.hpp"
#include "treesos/tree.hpp"

namespace treesos {

/// Partial injective, edge-preserving map from tree vertices to host vertices.
/// trace[v] records how many candidate images were available when v was
/// placed (-1 when not applicable, e.g. pinned vertices).
struct Embedding {
    std::vector<int> image;        // tree vertex -> host vertex, -1 if unset
    VertexSet used;                // image of the map
    std::vector<long long> trace;  // candidate counts at placement time

    Embedding() = default;
    Embedding(int tree_n, int host_n)
        : image(tree_n, -1), used(host_n), trace(tree_n, -1) {}

    bool placed(int tv) const { return image[tv] >= 0; }
    void place(int tv, int hv, long long candidates = -1) {
        image[tv] = hv;
        used.set(hv);
        trace[tv] = candidates;
    }
    void unplace(int tv) {
        used.reset(image[tv]);
        image[tv] = -1;
        trace[tv] = -1;
    }
    bool complete(const RootedTree& t) const {
        for (int v = 0; v < t.n_vertices(); ++v)
            if (image[v] < 0) return false;
        return true;
    }
};

/// Pin list: tree vertex -> required host image.
using PinList = std::vector<std::pair<int, int>>;

/// Independent replay verifier: injectivity, edge preservation, completeness,
/// pin respect and used-set consistency, all recomputed from scratch.
bool verify_embedding(const RootedTree& t, const Graph& g, const Embedding& emb,
                      const PinList& pins = {});

/// Same replay for a partial embedding (edges between placed vertices only).
bool verify_partial_embedding(const RootedTree& t, const Graph& g, const Embedding& emb,
                              const PinList& pins = {});

}  // namespace treesos

#endif
