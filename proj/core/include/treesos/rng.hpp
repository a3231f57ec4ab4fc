#ifndef TREESOS_RNG_HPP
#define TREESOS_RNG_HPP

#include <cassert>
#include <cstdint>
#include <random>
#include <vector>

#include "treesos/bitset.hpp"

namespace treesos {

/// Seeded generator with byte-reproducible sampling. std::mt19937_64 has a
/// standard-fixed sequence; the bounded draws below avoid
/// std::uniform_int_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform draw from [0, n). Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t n) {
        assert(n > 0);
        std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return x % n;
    }
    int below_int(int n) { return int(below(std::uint64_t(n))); }

    bool coin() { return eng_() & 1u; }

    /// Bernoulli(num/den) draw in exact integer arithmetic.
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    /// Uniform member of a non-empty set.
    int pick(const VertexSet& s) {
        int c = s.count();
        assert(c > 0);
        int idx = below_int(c);
        for (int v = s.first();; v = s.next(v)) {
            if (idx-- == 0) return v;
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace treesos

#endif
