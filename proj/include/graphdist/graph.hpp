#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphdist/error.hpp"

namespace graphdist {

// ---------------------------------------------------------------------------
// Canonical vertex pairs
//
// A simple undirected graph on v vertices has E = v(v-1)/2 possible edges.
// Pairs (i, j) with i < j are enumerated lexicographically, and that slot
// order is used by every vectorized quantity in the library (marginals,
// covariance rows, file output).
// ---------------------------------------------------------------------------

inline constexpr std::size_t pair_count(std::size_t v) noexcept {
    return v < 2 ? 0 : v * (v - 1) / 2;
}

struct VertexPair {
    std::size_t i = 0;
    std::size_t j = 1;

    VertexPair() = default;

    // Accepts either order; stores i < j. Self-loops are rejected.
    VertexPair(std::size_t a, std::size_t b) : i(std::min(a, b)), j(std::max(a, b)) {
        if (a == b) {
            throw InvalidArgument("self-loop (" + std::to_string(a) + "," + std::to_string(b) + ") is not a vertex pair");
        }
    }

    friend auto operator<=>(const VertexPair&, const VertexPair&) = default;
};

inline std::size_t pair_slot(std::size_t i, std::size_t j, std::size_t v) {
    if (i >= j || j >= v) {
        throw InvalidArgument("pair (" + std::to_string(i) + "," + std::to_string(j) +
                              ") is not canonical for v=" + std::to_string(v));
    }
    return i * v - i * (i + 1) / 2 + (j - i - 1);
}

inline std::size_t pair_slot(const VertexPair& p, std::size_t v) {
    return pair_slot(p.i, p.j, v);
}

inline std::vector<VertexPair> canonical_pairs(std::size_t v) {
    std::vector<VertexPair> pairs;
    pairs.reserve(pair_count(v));
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = i + 1; j < v; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Graph: packed bitset over the E canonical slots.
// ---------------------------------------------------------------------------
class Graph {
public:
    using Word = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    explicit Graph(std::size_t v) : v_(v), words_((graphdist::pair_count(v) + word_bits - 1) / word_bits, 0) {
        if (v < 2) {
            throw InvalidArgument("a graph needs at least 2 vertices, got " + std::to_string(v));
        }
    }

    static Graph empty(std::size_t v) { return Graph(v); }

    static Graph complete(std::size_t v) {
        Graph g(v);
        for (auto& w : g.words_) {
            w = ~Word{0};
        }
        g.clear_padding();
        return g;
    }

    static Graph from_pairs(std::size_t v, std::span<const VertexPair> pairs) {
        Graph g(v);
        for (const auto& p : pairs) {
            g.set(pair_slot(p, v), true);
        }
        return g;
    }

    // Bit s of `bits` is the membership of slot s. Requires E <= 64.
    static Graph from_bits(std::size_t v, std::uint64_t bits) {
        Graph g(v);
        if (g.pair_count() > word_bits) {
            throw InvalidArgument("from_bits needs v <= 11");
        }
        g.words_[0] = bits;
        g.clear_padding();
        return g;
    }

    std::size_t vertex_count() const noexcept { return v_; }
    std::size_t pair_count() const noexcept { return graphdist::pair_count(v_); }

    bool test(std::size_t slot) const noexcept { return (words_[slot / word_bits] >> (slot % word_bits)) & 1u; }
    bool has_edge(std::size_t i, std::size_t j) const { return test(pair_slot(std::min(i, j), std::max(i, j), v_)); }

    void set(std::size_t slot, bool value) noexcept {
        const Word mask = Word{1} << (slot % word_bits);
        if (value) {
            words_[slot / word_bits] |= mask;
        } else {
            words_[slot / word_bits] &= ~mask;
        }
    }
    void flip(std::size_t slot) noexcept { words_[slot / word_bits] ^= Word{1} << (slot % word_bits); }
    void add_edge(std::size_t i, std::size_t j) { set(pair_slot(VertexPair(i, j), v_), true); }

    std::span<const Word> words() const noexcept { return words_; }

    // Low 64 slots as an integer; the enumeration index for E <= 64.
    std::uint64_t low_bits() const noexcept { return words_.empty() ? 0 : words_[0]; }

    template <class Fn>
    void for_each_edge(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            Word bits = words_[w];
            while (bits != 0) {
                fn(w * word_bits + static_cast<std::size_t>(std::countr_zero(bits)));
                bits &= bits - 1;
            }
        }
    }

    friend bool operator==(const Graph&, const Graph&) = default;
    friend auto operator<=>(const Graph& a, const Graph& b) {
        if (a.v_ != b.v_) {
            return a.v_ <=> b.v_;
        }
        return std::lexicographical_compare_three_way(a.words_.begin(), a.words_.end(), b.words_.begin(),
                                                      b.words_.end());
    }

private:
    void clear_padding() noexcept {
        const std::size_t used = pair_count() % word_bits;
        if (used != 0 && !words_.empty()) {
            words_.back() &= (Word{1} << used) - 1;
        }
    }

    std::size_t v_;
    std::vector<Word> words_;
};

inline void require_same_vertices(std::size_t expected, std::size_t actual) {
    if (expected != actual) {
        throw DimensionError(expected, actual);
    }
}

// ---------------------------------------------------------------------------
// GraphSample: ordered graphs sharing one vertex count. May be empty while
// being built; operations that need members raise EmptySampleError.
// ---------------------------------------------------------------------------
class GraphSample {
public:
    explicit GraphSample(std::size_t v) : v_(v) {
        if (v < 2) {
            throw InvalidArgument("a graph sample needs v >= 2");
        }
    }

    GraphSample(std::size_t v, std::vector<Graph> graphs) : GraphSample(v) {
        for (const auto& g : graphs) {
            require_same_vertices(v_, g.vertex_count());
        }
        graphs_ = std::move(graphs);
    }

    void push_back(Graph g) {
        require_same_vertices(v_, g.vertex_count());
        graphs_.push_back(std::move(g));
    }

    std::size_t vertex_count() const noexcept { return v_; }
    std::size_t pair_count() const noexcept { return graphdist::pair_count(v_); }
    std::size_t size() const noexcept { return graphs_.size(); }
    bool empty() const noexcept { return graphs_.empty(); }
    const Graph& operator[](std::size_t k) const { return graphs_[k]; }
    const std::vector<Graph>& graphs() const noexcept { return graphs_; }
    auto begin() const noexcept { return graphs_.begin(); }
    auto end() const noexcept { return graphs_.end(); }

    friend bool operator==(const GraphSample&, const GraphSample&) = default;

private:
    std::size_t v_;
    std::vector<Graph> graphs_;
};

// ---------------------------------------------------------------------------
// Edge marginals: one probability per canonical slot.
// ---------------------------------------------------------------------------
class EdgeMarginals {
public:
    EdgeMarginals(std::size_t v, std::vector<double> values) : v_(v), values_(std::move(values)) {
        if (values_.size() != graphdist::pair_count(v)) {
            throw InvalidArgument("marginals need " + std::to_string(graphdist::pair_count(v)) + " entries, got " +
                                  std::to_string(values_.size()));
        }
        for (double x : values_) {
            if (!(x >= 0.0 && x <= 1.0)) {
                throw InvalidArgument("edge probability outside [0,1]: " + std::to_string(x));
            }
        }
    }

    static EdgeMarginals constant(std::size_t v, double p) {
        return EdgeMarginals(v, std::vector<double>(graphdist::pair_count(v), p));
    }

    std::size_t vertex_count() const noexcept { return v_; }
    std::size_t pair_count() const noexcept { return values_.size(); }
    double operator[](std::size_t slot) const { return values_[slot]; }
    double at(std::size_t i, std::size_t j) const { return values_[pair_slot(VertexPair(i, j), v_)]; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const EdgeMarginals&, const EdgeMarginals&) = default;

private:
    std::size_t v_;
    std::vector<double> values_;
};

// Marginals with a common integer denominator: entry s is numerators[s] / denominator.
class RationalMarginals {
public:
    RationalMarginals(std::size_t v, std::int64_t denominator, std::vector<std::int64_t> numerators)
        : v_(v), denominator_(denominator), numerators_(std::move(numerators)) {
        if (denominator_ < 1) {
            throw InvalidArgument("rational marginals need a positive denominator");
        }
        if (numerators_.size() != graphdist::pair_count(v)) {
            throw InvalidArgument("rational marginals have the wrong number of entries");
        }
        for (auto k : numerators_) {
            if (k < 0 || k > denominator_) {
                throw InvalidArgument("rational edge probability outside [0,1]");
            }
        }
    }

    std::size_t vertex_count() const noexcept { return v_; }
    std::size_t pair_count() const noexcept { return numerators_.size(); }
    std::int64_t denominator() const noexcept { return denominator_; }
    std::span<const std::int64_t> numerators() const noexcept { return numerators_; }

    EdgeMarginals to_real() const {
        std::vector<double> values(numerators_.size());
        for (std::size_t s = 0; s < values.size(); ++s) {
            values[s] = static_cast<double>(numerators_[s]) / static_cast<double>(denominator_);
        }
        return EdgeMarginals(v_, std::move(values));
    }

private:
    std::size_t v_;
    std::int64_t denominator_;
    std::vector<std::int64_t> numerators_;
};

// Returns exact rational marginals when every entry is k / 2^j for a shared
// j <= max_exponent (e.g. ER(0.5)), otherwise an empty optional.
inline std::optional<RationalMarginals> as_dyadic(const EdgeMarginals& m, int max_exponent = 20) {
    for (int e = 0; e <= max_exponent; ++e) {
        const std::int64_t den = std::int64_t{1} << e;
        std::vector<std::int64_t> nums(m.pair_count());
        bool exact = true;
        for (std::size_t s = 0; s < nums.size() && exact; ++s) {
            const double scaled = m[s] * static_cast<double>(den);
            const auto k = static_cast<std::int64_t>(scaled);
            exact = static_cast<double>(k) == scaled;
            nums[s] = k;
        }
        if (exact) {
            return RationalMarginals(m.vertex_count(), den, std::move(nums));
        }
    }
    return std::nullopt;
}

// Symmetric E x E matrix, row-major in canonical slot order.
class EdgeCovariance {
public:
    EdgeCovariance(std::size_t v, std::vector<double> entries) : v_(v), entries_(std::move(entries)) {
        const std::size_t e = graphdist::pair_count(v);
        if (entries_.size() != e * e) {
            throw InvalidArgument("covariance matrix has the wrong size");
        }
    }

    std::size_t vertex_count() const noexcept { return v_; }
    std::size_t pair_count() const noexcept { return graphdist::pair_count(v_); }
    double operator()(std::size_t a, std::size_t b) const { return entries_[a * pair_count() + b]; }
    std::span<const double> entries() const noexcept { return entries_; }

private:
    std::size_t v_;
    std::vector<double> entries_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline std::size_t hamming_distance(const Graph& g, const Graph& h) {
    require_same_vertices(g.vertex_count(), h.vertex_count());
    std::size_t d = 0;
    const auto a = g.words();
    const auto b = h.words();
    for (std::size_t w = 0; w < a.size(); ++w) {
        d += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
    }
    return d;
}

inline Graph complement(const Graph& g) {
    Graph out = Graph::complete(g.vertex_count());
    g.for_each_edge([&](std::size_t s) { out.set(s, false); });
    return out;
}

inline std::size_t edge_count(const Graph& g) {
    std::size_t n = 0;
    for (auto w : g.words()) {
        n += static_cast<std::size_t>(std::popcount(w));
    }
    return n;
}

inline std::vector<std::size_t> degrees(const Graph& g) {
    const std::size_t v = g.vertex_count();
    std::vector<std::size_t> deg(v, 0);
    std::size_t slot = 0;
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = i + 1; j < v; ++j, ++slot) {
            if (g.test(slot)) {
                ++deg[i];
                ++deg[j];
            }
        }
    }
    return deg;
}

namespace detail {

// Neighbourhood rows as bitsets over vertices.
inline std::vector<std::vector<std::uint64_t>> adjacency_rows(const Graph& g) {
    const std::size_t v = g.vertex_count();
    const std::size_t words = (v + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(v, std::vector<std::uint64_t>(words, 0));
    std::size_t slot = 0;
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = i + 1; j < v; ++j, ++slot) {
            if (g.test(slot)) {
                rows[i][j / 64] |= std::uint64_t{1} << (j % 64);
                rows[j][i / 64] |= std::uint64_t{1} << (i % 64);
            }
        }
    }
    return rows;
}

} // namespace detail

// Unordered vertex triples inducing a triangle.
inline std::size_t triangle_count(const Graph& g) {
    const auto rows = detail::adjacency_rows(g);
    const std::size_t v = g.vertex_count();
    std::size_t closed = 0;
    std::size_t slot = 0;
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = i + 1; j < v; ++j, ++slot) {
            if (!g.test(slot)) {
                continue;
            }
            for (std::size_t w = 0; w < rows[i].size(); ++w) {
                closed += static_cast<std::size_t>(std::popcount(rows[i][w] & rows[j][w]));
            }
        }
    }
    return closed / 3;
}

// Paths of length two, each counted once per (center, unordered neighbour pair):
// sum over vertices of C(deg, 2).
inline std::size_t two_star_count(const Graph& g) {
    std::size_t n = 0;
    for (auto d : degrees(g)) {
        n += d * (d > 0 ? d - 1 : 0) / 2;
    }
    return n;
}

// Relabels vertex i as perm[i].
inline Graph relabel(const Graph& g, std::span<const std::size_t> perm) {
    const std::size_t v = g.vertex_count();
    if (perm.size() != v) {
        throw DimensionError(v, perm.size());
    }
    Graph out(v);
    std::size_t slot = 0;
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = i + 1; j < v; ++j, ++slot) {
            if (g.test(slot)) {
                out.add_edge(perm[i], perm[j]);
            }
        }
    }
    return out;
}

// Number of member graphs containing each slot.
inline std::vector<std::uint32_t> edge_frequency_counts(const GraphSample& s) {
    std::vector<std::uint32_t> counts(s.pair_count(), 0);
    for (const auto& g : s) {
        g.for_each_edge([&](std::size_t slot) { ++counts[slot]; });
    }
    return counts;
}

inline EdgeMarginals mean_graph(const GraphSample& s) {
    if (s.empty()) {
        throw EmptySampleError();
    }
    const auto counts = edge_frequency_counts(s);
    std::vector<double> values(counts.size());
    const auto n = static_cast<double>(s.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        values[k] = static_cast<double>(counts[k]) / n;
    }
    return EdgeMarginals(s.vertex_count(), std::move(values));
}

// Unbiased (n-1) sample covariance of the edge indicator vectors.
inline EdgeCovariance edge_covariance(const GraphSample& s) {
    if (s.size() < 2) {
        throw InsufficientSampleError(2, s.size());
    }
    const std::size_t e = s.pair_count();
    const auto counts = edge_frequency_counts(s);
    const double n = static_cast<double>(s.size());

    // co[a*e+b] = number of graphs containing both a and b
    std::vector<double> co(e * e, 0.0);
    std::vector<std::size_t> present;
    for (const auto& g : s) {
        present.clear();
        g.for_each_edge([&](std::size_t slot) { present.push_back(slot); });
        for (auto a : present) {
            for (auto b : present) {
                co[a * e + b] += 1.0;
            }
        }
    }
    for (std::size_t a = 0; a < e; ++a) {
        for (std::size_t b = 0; b < e; ++b) {
            const double ca = counts[a];
            const double cb = counts[b];
            co[a * e + b] = (co[a * e + b] - ca * cb / n) / (n - 1.0);
        }
    }
    return EdgeCovariance(s.vertex_count(), std::move(co));
}

} // namespace graphdist
