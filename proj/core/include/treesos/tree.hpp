#ifndef TREESOS_TREE_HPP
#define TREESOS_TREE_HPP

#include <string>
#include <vector>

#include "treesos/bitset.hpp"
#include "treesos/graph.hpp"
#include "treesos/rational.hpp"

namespace treesos {

/// Rooted tree with k edges on vertices 0..k. Trees grow from the root down;
/// "below" follows the paper's orientation.
class RootedTree {
public:
    RootedTree() = default;
    /// parents[v] = parent of v, parents[root] = -1. Validates shape.
    RootedTree(int root, std::vector<int> parents);

    int k() const { return int(parent_.size()) - 1; }
    int n_vertices() const { return int(parent_.size()); }
    int root() const { return root_; }
    int parent(int v) const { return parent_[v]; }
    const std::vector<int>& children(int v) const { return children_[v]; }
    /// Degree in the underlying free tree.
    int tree_degree(int v) const {
        return int(children_[v].size()) + (v == root_ ? 0 : 1);
    }
    int max_degree() const;
    int depth(int v) const { return depth_[v]; }
    int subtree_size(int v) const { return subtree_size_[v]; }
    bool is_leaf(int v) const { return tree_degree(v) <= 1; }

    /// Parent always precedes child in both orders; ties resolved by vertex id.
    const std::vector<int>& dfs_order() const { return dfs_order_; }
    std::vector<int> bfs_order() const;

    RootedTree rerooted(int new_root) const;

    /// Canonical form of the underlying free tree (centroid-rooted AHU string).
    std::string free_canonical_string() const;

    /// Text format: "k root p0 p1 ... pk" (root's own entry is -1).
    std::string to_text() const;
    static RootedTree from_text(const std::string& line);

private:
    int root_ = 0;
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<int> depth_;
    std::vector<int> subtree_size_;
    std::vector<int> dfs_order_;
};

/// One representative per isomorphism class of free trees with k edges and
/// maximum degree <= delta_max, in a fixed deterministic order.
std::vector<RootedTree> enumerate_trees(int k, int delta_max);

/// Seeded random tree with k edges (uniform attachment), optionally capped
/// at maximum degree delta_max.
RootedTree random_tree(int k, std::uint64_t seed, int delta_max = 1 << 30);

/// Connected piece of T induced by `verts`, rerooted at `root`.
/// to_orig[i] maps the piece's vertex i back to T's vertex id.
struct TreePiece {
    RootedTree tree;
    std::vector<int> to_orig;
};
TreePiece induced_tree(const RootedTree& t, const VertexSet& verts, int root);

/// Proper 2-colouring of the tree: C = root's parity class, D = the rest.
/// The bound min{|C|,|D|} >= k / Delta(T) always holds and is asserted.
struct ColourClasses {
    VertexSet c;
    VertexSet d;
};
ColourClasses colour_classes(const RootedTree& t);

/// Certificate produced by the tree-cut lemmas; verified by replay before use.
struct CutCertificate {
    enum class Kind { Subtree, CutSet };
    Kind kind = Kind::Subtree;
    VertexSet subtree;  // T*, when kind == Subtree
    int anchor = -1;    // t*, when kind == Subtree
    VertexSet cut_set;  // S, when kind == CutSet
    std::vector<VertexSet> components;  // components of T - T* (or T - S)
};

/// Small subtree (T*,t*) with gamma*k/2 <= |T*| <= gamma*k and every
/// component of T - T* adjacent to t*. Requires k >= 200/gamma.
CutCertificate find_cut_subtree(const RootedTree& t, const Rat& gamma);

/// Either at least |T|/4ell leaves, or at least |T|/4ell vertex-disjoint bare
/// paths of length exactly ell (ell > 2). The returned branch is verified.
struct LeavesOrBarePaths {
    bool is_leaves = false;
    VertexSet leaves;
    std::vector<std::vector<int>> paths;  // each path as a vertex sequence
};
LeavesOrBarePaths leaves_or_bare_paths(const RootedTree& t, int ell);

/// Set S containing the root with |S| <= 1/beta + 2 such that every component
/// of T - S has at most beta*k vertices. Requires k >= 1/beta.
CutCertificate cut_set(const RootedTree& t, const Rat& beta);

/// Variant of cut_set whose members all lie at even distance from the root,
/// |S| < beta*k. Requires k >= 1/beta, 0 < beta < 1/2, Delta(T) <= beta^2*k/2.
/// With check_preconditions = false the construction runs anyway and only the
/// postconditions decide (the callers of the dense pipeline use this).
CutCertificate even_cut_set(const RootedTree& t, const Rat& beta,
                            bool check_preconditions = true);

// Replay verifiers. Independent code paths from the constructors above: they
// recompute components from scratch and check every promised property.
bool verify_cut_subtree(const RootedTree& t, const CutCertificate& cert, const Rat& gamma);
bool verify_cut_set(const RootedTree& t, const CutCertificate& cert, const Rat& beta);
bool verify_even_cut_set(const RootedTree& t, const CutCertificate& cert, const Rat& beta);
bool verify_leaves_or_bare_paths(const RootedTree& t, int ell, const LeavesOrBarePaths& res);

}  // namespace treesos

#endif
