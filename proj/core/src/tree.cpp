#include "treesos/tree.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "treesos/rng.hpp"

namespace treesos {

RootedTree::RootedTree(int root, std::vector<int> parents)
    : root_(root), parent_(std::move(parents)) {
    int n = int(parent_.size());
    if (n < 2) throw std::invalid_argument("tree needs at least one edge");
    if (root_ < 0 || root_ >= n || parent_[root_] != -1)
        throw std::invalid_argument("root/parent array mismatch");
    children_.assign(n, {});
    for (int v = 0; v < n; ++v) {
        if (v == root_) continue;
        if (parent_[v] < 0 || parent_[v] >= n || parent_[v] == v)
            throw std::invalid_argument("bad parent entry");
        children_[parent_[v]].push_back(v);
    }
    for (auto& c : children_) std::sort(c.begin(), c.end());
    // Depth-first walk doubles as the acyclicity/connectivity check.
    depth_.assign(n, -1);
    dfs_order_.clear();
    dfs_order_.reserve(n);
    std::vector<int> stack{root_};
    depth_[root_] = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        dfs_order_.push_back(v);
        for (auto it = children_[v].rbegin(); it != children_[v].rend(); ++it) {
            if (depth_[*it] != -1) throw std::invalid_argument("parent array has a cycle");
            depth_[*it] = depth_[v] + 1;
            stack.push_back(*it);
        }
    }
    if (int(dfs_order_.size()) != n) throw std::invalid_argument("parent array not connected");
    subtree_size_.assign(n, 1);
    for (auto it = dfs_order_.rbegin(); it != dfs_order_.rend(); ++it)
        if (*it != root_) subtree_size_[parent_[*it]] += subtree_size_[*it];
}

int RootedTree::max_degree() const {
    int d = 0;
    for (int v = 0; v < n_vertices(); ++v) d = std::max(d, tree_degree(v));
    return d;
}

std::vector<int> RootedTree::bfs_order() const {
    std::vector<int> order;
    order.reserve(n_vertices());
    std::deque<int> q{root_};
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        order.push_back(v);
        for (int c : children_[v]) q.push_back(c);
    }
    return order;
}

RootedTree RootedTree::rerooted(int new_root) const {
    std::vector<int> np(n_vertices(), -1);
    int v = new_root;
    int prev = -1;
    // Reverse the path from new_root up to the old root.
    while (v != -1) {
        int up = parent_[v];
        np[v] = prev;
        prev = v;
        v = up;
    }
    for (int u = 0; u < n_vertices(); ++u)
        if (np[u] == -1 && u != new_root) np[u] = parent_[u];
    return RootedTree(new_root, np);
}

namespace {

std::string ahu_string(const RootedTree& t, int v, int from) {
    std::vector<std::string> parts;
    if (v != t.root() && t.parent(v) != from && t.parent(v) >= 0)
        parts.push_back(ahu_string(t, t.parent(v), v));
    for (int c : t.children(v))
        if (c != from) parts.push_back(ahu_string(t, c, v));
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (auto& p : parts) out += p;
    out += ")";
    return out;
}

std::vector<int> centroids(const RootedTree& t) {
    int n = t.n_vertices();
    std::vector<int> best;
    int best_weight = n + 1;
    for (int v = 0; v < n; ++v) {
        // Weight = largest piece of T - v, computed from rooted subtree sizes.
        int w = v == t.root() ? 0 : n - t.subtree_size(v);
        for (int c : t.children(v)) w = std::max(w, t.subtree_size(c));
        if (w < best_weight) {
            best_weight = w;
            best = {v};
        } else if (w == best_weight) {
            best.push_back(v);
        }
    }
    return best;
}

}  // namespace

std::string RootedTree::free_canonical_string() const {
    std::string best;
    for (int c : centroids(*this)) {
        std::string s = ahu_string(*this, c, -1);
        if (best.empty() || s < best) best = s;
    }
    return best;
}

std::string RootedTree::to_text() const {
    std::ostringstream out;
    out << k() << " " << root_;
    for (int v = 0; v < n_vertices(); ++v) out << " " << parent_[v];
    return out.str();
}

RootedTree RootedTree::from_text(const std::string& line) {
    std::istringstream in(line);
    int k, root;
    if (!(in >> k >> root) || k < 1) throw std::invalid_argument("tree text: bad header");
    std::vector<int> parents(k + 1);
    for (int v = 0; v <= k; ++v)
        if (!(in >> parents[v])) throw std::invalid_argument("tree text: truncated");
    return RootedTree(root, parents);
}

RootedTree random_tree(int k, std::uint64_t seed, int delta_max) {
    if (k < 1 || delta_max < 1 || (k >= 2 && delta_max < 2))
        throw std::invalid_argument("random_tree: unsatisfiable parameters");
    Rng rng(seed);
    std::vector<int> parents(k + 1, -1);
    std::vector<int> deg(k + 1, 0);
    std::vector<int> open{0};  // vertices with spare degree capacity
    for (int v = 1; v <= k; ++v) {
        int at = rng.below_int(int(open.size()));
        int p = open[at];
        parents[v] = p;
        if (++deg[p] >= delta_max) {
            open[at] = open.back();
            open.pop_back();
        }
        deg[v] = 1;
        if (deg[v] < delta_max) open.push_back(v);
        if (open.empty() && v < k) throw std::invalid_argument("random_tree: degree cap too tight");
    }
    return RootedTree(0, parents);
}

TreePiece induced_tree(const RootedTree& t, const VertexSet& verts, int root) {
    if (!verts.test(root)) throw std::invalid_argument("induced_tree: root outside the piece");
    TreePiece piece;
    std::vector<int> to_piece(t.n_vertices(), -1);
    std::deque<int> q{root};
    to_piece[root] = 0;
    piece.to_orig.push_back(root);
    std::vector<int> parents{-1};
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        auto visit = [&](int u) {
            if (u < 0 || !verts.test(u) || to_piece[u] >= 0) return;
            to_piece[u] = int(piece.to_orig.size());
            piece.to_orig.push_back(u);
            parents.push_back(to_piece[v]);
            q.push_back(u);
        };
        visit(t.parent(v));
        for (int c : t.children(v)) visit(c);
    }
    if (int(piece.to_orig.size()) != verts.count())
        throw std::invalid_argument("induced_tree: piece is not connected");
    piece.tree = RootedTree(0, parents);
    return piece;
}

ColourClasses colour_classes(const RootedTree& t) {
    ColourClasses out{VertexSet(t.n_vertices()), VertexSet(t.n_vertices())};
    for (int v = 0; v < t.n_vertices(); ++v) (t.depth(v) % 2 == 0 ? out.c : out.d).set(v);
    int mn = std::min(out.c.count(), out.d.count());
    if (Rat(mn) * t.max_degree() < Rat(t.k()))
        throw ContractViolation("colour_classes: min class below k/Delta");
    return out;
}

// ---------------------------------------------------------------------------
// Cut subtree (T*, t*)

CutCertificate find_cut_subtree(const RootedTree& t, const Rat& gamma) {
    const int k = t.k();
    if (!(gamma > 0 && gamma <= 1) || Rat(k) * gamma < 200)
        throw PreconditionError("find_cut_subtree: need 0 < gamma <= 1 and k >= 200/gamma");
    const Rat cap = gamma * k;        // |T*| <= cap
    const Rat half = cap / 2;         // |T*| >= half

    auto max_child = [&](int v) {
        int best = -1;
        for (int c : t.children(v))
            if (best == -1 || t.subtree_size(c) > t.subtree_size(best)) best = c;
        return best;
    };

    int v = t.root();
    int anchor = -1;
    VertexSet sub(t.n_vertices());
    while (true) {
        // Invariant: subtree_size(v) > cap (holds at the root since cap <= k).
        int c = max_child(v);
        if (Rat(t.subtree_size(c)) > cap) {
            v = c;
            continue;
        }
        if (Rat(t.subtree_size(c)) >= half) {
            // The walk's natural stop: the whole subtree below c fits the window.
            anchor = c;
            std::vector<int> stack{c};
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                sub.set(u);
                for (int w : t.children(u)) stack.push_back(w);
            }
            break;
        }
        // All children of v are small; grow T* around v itself.
        anchor = v;
        sub.set(v);
        long long total = 1;
        std::vector<int> kids = t.children(v);
        std::sort(kids.begin(), kids.end(), [&](int a, int b) {
            if (t.subtree_size(a) != t.subtree_size(b))
                return t.subtree_size(a) > t.subtree_size(b);
            return a < b;
        });
        for (int c2 : kids) {
            if (Rat(total + t.subtree_size(c2)) > cap) continue;
            total += t.subtree_size(c2);
            std::vector<int> stack{c2};
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                sub.set(u);
                for (int w : t.children(u)) stack.push_back(w);
            }
        }
        break;
    }

    CutCertificate cert;
    cert.kind = CutCertificate::Kind::Subtree;
    cert.subtree = sub;
    cert.anchor = anchor;
    // Components of T - T*: each unabsorbed child subtree of the anchor plus
    // the piece above it.
    {
        VertexSet rest = VertexSet::full(t.n_vertices());
        rest -= sub;
        std::vector<bool> seen(t.n_vertices(), false);
        for (int s = rest.first(); s >= 0; s = rest.next(s)) {
            if (seen[s]) continue;
            VertexSet comp(t.n_vertices());
            std::vector<int> stack{s};
            seen[s] = true;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                comp.set(u);
                auto push = [&](int w) {
                    if (w >= 0 && rest.test(w) && !seen[w]) {
                        seen[w] = true;
                        stack.push_back(w);
                    }
                };
                push(t.parent(u));
                for (int w : t.children(u)) push(w);
            }
            cert.components.push_back(comp);
        }
    }
    if (!verify_cut_subtree(t, cert, gamma))
        throw ContractViolation("find_cut_subtree: construction failed its own postconditions");
    return cert;
}

bool verify_cut_subtree(const RootedTree& t, const CutCertificate& cert, const Rat& gamma) {
    if (cert.kind != CutCertificate::Kind::Subtree) return false;
    const int n = t.n_vertices();
    if (cert.anchor < 0 || cert.anchor >= n || !cert.subtree.test(cert.anchor)) return false;
    long long size = cert.subtree.count();
    if (!(Rat(2 * size) >= gamma * t.k() && Rat(size) <= gamma * t.k())) return false;
    // T* must be connected.
    {
        VertexSet seen(n);
        std::vector<int> stack{cert.anchor};
        seen.set(cert.anchor);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            auto push = [&](int w) {
                if (w >= 0 && cert.subtree.test(w) && !seen.test(w)) {
                    seen.set(w);
                    stack.push_back(w);
                }
            };
            push(t.parent(u));
            for (int w : t.children(u)) push(w);
        }
        if (!(seen == cert.subtree)) return false;
    }
    // Recompute components of T - T* from scratch; each must touch the anchor.
    VertexSet rest = VertexSet::full(n);
    rest -= cert.subtree;
    VertexSet seen(n);
    for (int s = rest.first(); s >= 0; s = rest.next(s)) {
        if (seen.test(s)) continue;
        VertexSet comp(n);
        std::vector<int> stack{s};
        seen.set(s);
        bool touches_anchor = false;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            comp.set(u);
            auto visit = [&](int w) {
                if (w < 0) return;
                if (cert.subtree.test(w)) {
                    if (w == cert.anchor) touches_anchor = true;
                    return;
                }
                if (!seen.test(w)) {
                    seen.set(w);
                    stack.push_back(w);
                }
            };
            visit(t.parent(u));
            for (int w : t.children(u)) visit(w);
        }
        if (!touches_anchor) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Leaves / bare paths dichotomy

LeavesOrBarePaths leaves_or_bare_paths(const RootedTree& t, int ell) {
    if (ell <= 2) throw PreconditionError("leaves_or_bare_paths: ell > 2 required");
    const int n = t.n_vertices();
    const Rat need = Rat(n) / (4 * ell);

    LeavesOrBarePaths out;
    VertexSet leaves(n);
    for (int v = 0; v < n; ++v)
        if (t.tree_degree(v) == 1) leaves.set(v);
    if (Rat(leaves.count()) >= need) {
        out.is_leaves = true;
        out.leaves = leaves;
        if (!verify_leaves_or_bare_paths(t, ell, out))
            throw ContractViolation("leaves_or_bare_paths: leaf witness failed verification");
        return out;
    }

    // Walk every maximal run of degree-2 vertices and chop it greedily into
    // vertex-disjoint paths of exactly ell edges. Run endpoints (leaves or
    // branch vertices) may serve as path endpoints when still unused.
    VertexSet used(n);
    auto degree2 = [&](int v) { return t.tree_degree(v) == 2; };
    std::vector<std::vector<int>> chains;
    {
        VertexSet seen(n);
        for (int v = 0; v < n; ++v) {
            if (!degree2(v) || seen.test(v)) continue;
            // Expand the run of degree-2 vertices through v.
            std::vector<int> chain{v};
            seen.set(v);
            auto extend = [&](bool front) {
                while (true) {
                    int end = front ? chain.front() : chain.back();
                    int prev = chain.size() >= 2
                                   ? (front ? chain[1] : chain[chain.size() - 2])
                                   : -1;
                    int next = -1;
                    auto consider = [&](int w) {
                        if (w >= 0 && w != prev && degree2(w) && !seen.test(w)) next = w;
                    };
                    consider(t.parent(end));
                    for (int c : t.children(end)) consider(c);
                    if (next < 0) break;
                    seen.set(next);
                    if (front)
                        chain.insert(chain.begin(), next);
                    else
                        chain.push_back(next);
                }
            };
            extend(false);
            extend(true);
            // Attach the non-degree-2 endpoints on both sides, if any.
            auto boundary = [&](int end, int prev) {
                int b = -1;
                auto consider = [&](int w) {
                    if (w >= 0 && w != prev && !degree2(w)) b = w;
                };
                consider(t.parent(end));
                for (int c : t.children(end)) consider(c);
                return b;
            };
            int fb = boundary(chain.front(), chain.size() >= 2 ? chain[1] : -1);
            int bb = boundary(chain.back(), chain.size() >= 2 ? chain[chain.size() - 2] : -1);
            if (fb >= 0) chain.insert(chain.begin(), fb);
            if (bb >= 0) chain.push_back(bb);
            chains.push_back(std::move(chain));
        }
    }
    std::sort(chains.begin(), chains.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return a < b;
              });
    for (const auto& chain : chains) {
        std::size_t start = 0;
        while (start + ell < chain.size()) {
            bool ok = true;
            for (int i = 0; i <= ell && ok; ++i) ok = !used.test(chain[start + i]);
            // Interior vertices must be degree 2; only chain endpoints can fail.
            for (int i = 1; i < ell && ok; ++i) ok = degree2(chain[start + i]);
            if (ok) {
                std::vector<int> path(chain.begin() + start, chain.begin() + start + ell + 1);
                for (int v : path) used.set(v);
                out.paths.push_back(std::move(path));
                start += ell + 1;
            } else {
                ++start;
            }
        }
    }
    if (Rat((long long)out.paths.size()) < need)
        throw ContractViolation("leaves_or_bare_paths: dichotomy shortfall");
    if (!verify_leaves_or_bare_paths(t, ell, out))
        throw ContractViolation("leaves_or_bare_paths: path witness failed verification");
    return out;
}

bool verify_leaves_or_bare_paths(const RootedTree& t, int ell, const LeavesOrBarePaths& res) {
    const int n = t.n_vertices();
    const Rat need = Rat(n) / (4 * ell);
    if (res.is_leaves) {
        if (Rat(res.leaves.count()) < need) return false;
        for (int v = res.leaves.first(); v >= 0; v = res.leaves.next(v))
            if (t.tree_degree(v) != 1) return false;
        return true;
    }
    if (Rat((long long)res.paths.size()) < need) return false;
    VertexSet used(n);
    for (const auto& path : res.paths) {
        if (int(path.size()) != ell + 1) return false;
        for (std::size_t i = 0; i < path.size(); ++i) {
            int v = path[i];
            if (v < 0 || v >= n || used.test(v)) return false;
            used.set(v);
            if (i > 0) {
                int u = path[i - 1];
                if (t.parent(v) != u && t.parent(u) != v) return false;  // tree edge
            }
            if (i > 0 && i + 1 < path.size() && t.tree_degree(v) != 2) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Cut sets

namespace {

std::vector<VertexSet> components_minus(const RootedTree& t, const VertexSet& removed) {
    const int n = t.n_vertices();
    std::vector<VertexSet> comps;
    VertexSet seen(n);
    for (int s = 0; s < n; ++s) {
        if (removed.test(s) || seen.test(s)) continue;
        VertexSet comp(n);
        std::vector<int> stack{s};
        seen.set(s);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            comp.set(u);
            auto push = [&](int w) {
                if (w >= 0 && !removed.test(w) && !seen.test(w)) {
                    seen.set(w);
                    stack.push_back(w);
                }
            };
            push(t.parent(u));
            for (int w : t.children(u)) push(w);
        }
        comps.push_back(comp);
    }
    return comps;
}

}  // namespace

CutCertificate cut_set(const RootedTree& t, const Rat& beta) {
    const int k = t.k();
    if (!(beta > 0) || Rat(k) * beta < 1)
        throw PreconditionError("cut_set: k >= 1/beta required");
    const Rat cap = beta * k;
    VertexSet s(t.n_vertices());
    std::vector<long long> pending(t.n_vertices(), 1);
    const auto& order = t.dfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int v = *it;
        for (int c : t.children(v))
            if (!s.test(c)) pending[v] += pending[c];
        if (Rat(pending[v]) > cap) {
            s.set(v);
            pending[v] = 0;
        }
    }
    s.set(t.root());
    CutCertificate cert;
    cert.kind = CutCertificate::Kind::CutSet;
    cert.cut_set = s;
    cert.components = components_minus(t, s);
    if (!verify_cut_set(t, cert, beta))
        throw ContractViolation("cut_set: construction failed its own postconditions");
    return cert;
}

bool verify_cut_set(const RootedTree& t, const CutCertificate& cert, const Rat& beta) {
    if (cert.kind != CutCertificate::Kind::CutSet) return false;
    if (!cert.cut_set.test(t.root())) return false;
    if (Rat(cert.cut_set.count()) > Rat(1) / beta + 2) return false;
    auto comps = components_minus(t, cert.cut_set);
    if (comps.size() != cert.components.size()) return false;
    for (const auto& comp : comps)
        if (Rat(comp.count()) > beta * t.k()) return false;
    return true;
}

CutCertificate even_cut_set(const RootedTree& t, const Rat& beta, bool check_preconditions) {
    const int k = t.k();
    if (check_preconditions) {
        if (!(beta > 0 && beta < Rat(1, 2)) || Rat(k) * beta < 1)
            throw PreconditionError("even_cut_set: need 0 < beta < 1/2 and k >= 1/beta");
        if (Rat(2 * t.max_degree()) > beta * beta * k)
            throw PreconditionError("even_cut_set: Delta(T) <= beta^2*k/2 required");
    }
    CutCertificate base = cut_set(t, beta);
    VertexSet s(t.n_vertices());
    for (int v = base.cut_set.first(); v >= 0; v = base.cut_set.next(v)) {
        if (t.depth(v) % 2 == 0) {
            s.set(v);
        } else {
            // Replace an odd-distance member by its neighbourhood (all even).
            if (t.parent(v) >= 0) s.set(t.parent(v));
            for (int c : t.children(v)) s.set(c);
        }
    }
    s.set(t.root());
    CutCertificate cert;
    cert.kind = CutCertificate::Kind::CutSet;
    cert.cut_set = s;
    cert.components = components_minus(t, s);
    if (check_preconditions && !verify_even_cut_set(t, cert, beta))
        throw ContractViolation("even_cut_set: construction failed its own postconditions");
    return cert;
}

bool verify_even_cut_set(const RootedTree& t, const CutCertificate& cert, const Rat& beta) {
    if (cert.kind != CutCertificate::Kind::CutSet) return false;
    if (!cert.cut_set.test(t.root())) return false;
    if (!(Rat(cert.cut_set.count()) < beta * t.k())) return false;
    for (int v = cert.cut_set.first(); v >= 0; v = cert.cut_set.next(v))
        if (t.depth(v) % 2 != 0) return false;
    auto comps = components_minus(t, cert.cut_set);
    if (comps.size() != cert.components.size()) return false;
    for (const auto& comp : comps)
        if (Rat(comp.count()) > beta * t.k()) return false;
    return true;
}

}  // namespace treesos
