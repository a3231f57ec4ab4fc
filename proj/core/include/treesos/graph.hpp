#ifndef TREESOS_GRAPH_HPP
#define TREESOS_GRAPH_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "treesos/bitset.hpp"
#include "treesos/rational.hpp"

namespace treesos {

/// Thrown when an operation's stated precondition is violated by the caller.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when an internally guaranteed step fails; indicates a bug, not bad input.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// A pipeline or heuristic stage could not proceed; carries the failing step.
struct EmbedFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Undirected simple graph on dense 0-indexed vertices. Adjacency rows are
/// bitsets, so edge queries and neighbourhood set algebra are O(n/64).
class Graph {
public:
    Graph() = default;
    explicit Graph(int n) : n_(n), adj_(n, VertexSet(n)), degree_(n, 0) {}

    int n() const { return n_; }
    long long edge_count() const { return edges_; }

    bool has_edge(int u, int v) const { return u != v && adj_[u].test(v); }
    void add_edge(int u, int v) {
        if (u == v) throw std::invalid_argument("loop edge");
        if (adj_[u].test(v)) return;
        adj_[u].set(v);
        adj_[v].set(u);
        ++degree_[u];
        ++degree_[v];
        ++edges_;
    }
    void remove_edge(int u, int v) {
        if (u == v || !adj_[u].test(v)) return;
        adj_[u].reset(v);
        adj_[v].reset(u);
        --degree_[u];
        --degree_[v];
        --edges_;
    }

    int degree(int v) const { return degree_[v]; }
    const VertexSet& neighbors(int v) const { return adj_[v]; }
    int deg_into(int v, const VertexSet& s) const { return adj_[v].count_and(s); }

    int min_degree() const;
    int max_degree() const;

    /// Edges with both ends inside s.
    long long edges_within(const VertexSet& s) const;
    /// e(X,Y); edges inside X∩Y count twice, matching the e_H(X,Y) convention.
    long long edges_between(const VertexSet& x, const VertexSet& y) const;

    bool operator==(const Graph& o) const { return n_ == o.n_ && adj_ == o.adj_; }

    static Graph complete(int n);
    static Graph complete_bipartite(int a, int b);
    static Graph disjoint_union(const Graph& g, const Graph& h);

private:
    int n_ = 0;
    std::vector<VertexSet> adj_;
    std::vector<int> degree_;
    long long edges_ = 0;
};

/// Subgraph together with the relabelling back into its host:
/// to_host[v] is the host vertex that v corresponds to.
struct InducedSubgraph {
    Graph graph;
    std::vector<int> to_host;
};

InducedSubgraph induced_subgraph(const Graph& g, const VertexSet& verts);

/// Bipartition (A,B) of the full vertex set; disjointness and coverage are
/// checked on construction.
struct Bipartition {
    VertexSet a;
    VertexSet b;
    Bipartition(VertexSet a_, VertexSet b_);
};

/// True iff 2·e(G) > (k-1)·n, i.e. d(G) > k-1, in exact integer arithmetic.
bool average_degree_exceeds(const Graph& g, long long k);

/// Unique maximal subgraph of minimum degree >= threshold (possibly empty).
InducedSubgraph peel_min_degree(const Graph& g, const Rat& threshold);

/// True iff e(A)+e(B) <= beta * e(G); an edgeless graph counts as bipartite.
bool is_beta_bipartite(const Graph& g, const Bipartition& p, const Rat& beta);

/// Greedy local-search bipartition minimising intra-class edges; used by the
/// dispatcher to probe beta-bipartiteness. Deterministic.
Bipartition find_bipartition(const Graph& g);

enum class ExtremalKind { Clique, BalancedBipartite };

/// K_k, K_{k-1,k-1}, or a disjoint union of such pieces.
Graph generate_extremal(ExtremalKind kind, int k);
Graph generate_extremal_union(const std::vector<std::pair<ExtremalKind, int>>& parts);

/// Erdos-Renyi G(n, num/den) with seeded randomness.
Graph random_graph(int n, std::uint64_t seed, std::uint64_t num, std::uint64_t den);

}  // namespace treesos

#endif
