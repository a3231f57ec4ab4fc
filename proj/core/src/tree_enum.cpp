#include <algorithm>
#include <map>
#include <set>

#include "treesos/tree.hpp"

namespace treesos {

namespace {

// Beyer-Hedetniemi: successive level sequences of rooted trees on n vertices.
// Levels are 1-based; the initial sequence is the path, the last the star.
struct LevelSequenceGen {
    std::vector<int> levels;
    bool first = true;

    explicit LevelSequenceGen(int n) : levels(n) {
        for (int i = 0; i < n; ++i) levels[i] = i + 1;
    }

    bool next() {
        if (first) {
            first = false;
            return true;
        }
        int n = int(levels.size());
        int p = -1;
        for (int i = n - 1; i >= 0; --i) {
            if (levels[i] > 2) {
                p = i;
                break;
            }
        }
        if (p < 0) return false;
        int q = -1;
        for (int i = p - 1; i >= 0; --i) {
            if (levels[i] == levels[p] - 1) {
                q = i;
                break;
            }
        }
        for (int i = p; i < n; ++i) levels[i] = levels[i - (p - q)];
        return true;
    }

    std::vector<int> parent_array() const {
        int n = int(levels.size());
        std::vector<int> parents(n, -1);
        for (int i = 1; i < n; ++i) {
            for (int j = i - 1; j >= 0; --j) {
                if (levels[j] == levels[i] - 1) {
                    parents[i] = j;
                    break;
                }
            }
        }
        return parents;
    }
};

// Rebuilds the centroid-rooted representative from a canonical AHU string.
RootedTree tree_from_canonical(const std::string& canon) {
    std::vector<int> parents;
    std::vector<int> stack;
    int cur = -1;
    for (char ch : canon) {
        if (ch == '(') {
            parents.push_back(cur);
            stack.push_back(int(parents.size()) - 1);
            cur = stack.back();
        } else {
            stack.pop_back();
            cur = stack.empty() ? -1 : stack.back();
        }
    }
    return RootedTree(0, parents);
}

}  // namespace

std::vector<RootedTree> enumerate_trees(int k, int delta_max) {
    if (k < 1 || delta_max < 1)
        throw PreconditionError("enumerate_trees: k >= 1 and delta_max >= 1 required");
    const int n = k + 1;
    if (n == 2) {
        // Single edge; both endpoints have degree 1.
        if (delta_max < 1) return {};
        return {RootedTree(0, {-1, 0})};
    }
    std::set<std::string> canon_seen;
    LevelSequenceGen gen(n);
    while (gen.next()) {
        RootedTree rooted(0, gen.parent_array());
        if (rooted.max_degree() > delta_max) continue;
        canon_seen.insert(rooted.free_canonical_string());
    }
    std::vector<RootedTree> out;
    out.reserve(canon_seen.size());
    for (const auto& canon : canon_seen) out.push_back(tree_from_canonical(canon));
    return out;
}

}  // namespace treesos
