#ifndef TREESOS_BITSET_HPP
#define TREESOS_BITSET_HPP

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace treesos {

/// Fixed-capacity dynamic bitset used for vertex sets and adjacency rows.
class VertexSet {
public:
    VertexSet() = default;
    explicit VertexSet(int n) : n_(n), blocks_((n + 63) / 64, 0) {}

    int capacity() const { return n_; }

    bool test(int i) const {
        assert(i >= 0 && i < n_);
        return (blocks_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(int i) {
        assert(i >= 0 && i < n_);
        blocks_[i >> 6] |= std::uint64_t(1) << (i & 63);
    }
    void reset(int i) {
        assert(i >= 0 && i < n_);
        blocks_[i >> 6] &= ~(std::uint64_t(1) << (i & 63));
    }
    void set_all() {
        for (auto& b : blocks_) b = ~std::uint64_t(0);
        trim();
    }
    void clear() {
        for (auto& b : blocks_) b = 0;
    }

    int count() const {
        int c = 0;
        for (auto b : blocks_) c += std::popcount(b);
        return c;
    }
    bool empty() const {
        for (auto b : blocks_) if (b) return false;
        return true;
    }
    bool any() const { return !empty(); }

    /// Smallest member, or -1 when empty.
    int first() const {
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            if (blocks_[w]) return int(w * 64 + std::countr_zero(blocks_[w]));
        return -1;
    }
    /// Smallest member > i, or -1.
    int next(int i) const {
        ++i;
        if (i >= n_) return -1;
        std::size_t w = std::size_t(i) >> 6;
        std::uint64_t cur = blocks_[w] & (~std::uint64_t(0) << (i & 63));
        while (true) {
            if (cur) return int(w * 64 + std::countr_zero(cur));
            if (++w >= blocks_.size()) return -1;
            cur = blocks_[w];
        }
    }

    VertexSet& operator&=(const VertexSet& o) {
        assert(n_ == o.n_);
        for (std::size_t w = 0; w < blocks_.size(); ++w) blocks_[w] &= o.blocks_[w];
        return *this;
    }
    VertexSet& operator|=(const VertexSet& o) {
        assert(n_ == o.n_);
        for (std::size_t w = 0; w < blocks_.size(); ++w) blocks_[w] |= o.blocks_[w];
        return *this;
    }
    /// Removes all members of o.
    VertexSet& operator-=(const VertexSet& o) {
        assert(n_ == o.n_);
        for (std::size_t w = 0; w < blocks_.size(); ++w) blocks_[w] &= ~o.blocks_[w];
        return *this;
    }

    friend VertexSet operator&(VertexSet a, const VertexSet& b) { return a &= b; }
    friend VertexSet operator|(VertexSet a, const VertexSet& b) { return a |= b; }
    friend VertexSet operator-(VertexSet a, const VertexSet& b) { return a -= b; }

    bool operator==(const VertexSet& o) const { return n_ == o.n_ && blocks_ == o.blocks_; }

    int count_and(const VertexSet& o) const {
        assert(n_ == o.n_);
        int c = 0;
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            c += std::popcount(blocks_[w] & o.blocks_[w]);
        return c;
    }
    bool intersects(const VertexSet& o) const {
        assert(n_ == o.n_);
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            if (blocks_[w] & o.blocks_[w]) return true;
        return false;
    }
    bool is_subset_of(const VertexSet& o) const {
        assert(n_ == o.n_);
        for (std::size_t w = 0; w < blocks_.size(); ++w)
            if (blocks_[w] & ~o.blocks_[w]) return false;
        return true;
    }

    std::vector<int> to_vector() const {
        std::vector<int> out;
        for (int v = first(); v >= 0; v = next(v)) out.push_back(v);
        return out;
    }
    static VertexSet of(int n, const std::vector<int>& members) {
        VertexSet s(n);
        for (int v : members) s.set(v);
        return s;
    }
    static VertexSet full(int n) {
        VertexSet s(n);
        s.set_all();
        return s;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (int v = first(); v >= 0; v = next(v)) f(v);
    }

private:
    void trim() {
        if (n_ & 63) blocks_.back() &= (~std::uint64_t(0)) >> (64 - (n_ & 63));
    }
    int n_ = 0;
    std::vector<std::uint64_t> blocks_;
};

}  // namespace treesos

#endif
