#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "graphdist/error.hpp"
#include "graphdist/graph.hpp"

namespace graphdist {

enum class SampleKind { one_sample, two_sample };

// numerator / denominator, both integers. Filled whenever the inputs are rational.
struct ExactValue {
    std::int64_t numerator = 0;
    std::int64_t denominator = 1;

    double to_double() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
    friend bool operator==(const ExactValue&, const ExactValue&) = default;
};

struct WValue {
    double value = 0.0;
    SampleKind kind = SampleKind::one_sample;
    std::size_t n = 0;
    std::optional<std::size_t> m;
    std::optional<ExactValue> exact;
};

namespace detail {

inline std::optional<std::int64_t> narrow_exact(__int128 x) {
    if (x > std::numeric_limits<std::int64_t>::max() || x < std::numeric_limits<std::int64_t>::min()) {
        return std::nullopt;
    }
    return static_cast<std::int64_t>(x);
}

inline __int128 abs128(__int128 x) { return x < 0 ? -x : x; }

inline void require_nonempty(const GraphSample& s) {
    if (s.empty()) {
        throw EmptySampleError();
    }
}

// Scaled numerator of the two-sample statistic from per-slot counts:
// sum_e |m * a_e - n * b_e| over denominator n * m.
inline std::int64_t two_sample_numerator(std::span<const std::uint32_t> a, std::size_t n,
                                         std::span<const std::uint32_t> b, std::size_t m) {
    std::int64_t total = 0;
    const auto nn = static_cast<std::int64_t>(n);
    const auto mm = static_cast<std::int64_t>(m);
    for (std::size_t e = 0; e < a.size(); ++e) {
        total += std::llabs(mm * static_cast<std::int64_t>(a[e]) - nn * static_cast<std::int64_t>(b[e]));
    }
    return total;
}

} // namespace detail

// Mean Hamming distance from g to the members of s.
inline double mean_distance(const GraphSample& s, const Graph& g) {
    detail::require_nonempty(s);
    require_same_vertices(s.vertex_count(), g.vertex_count());
    std::size_t total = 0;
    for (const auto& h : s) {
        total += hamming_distance(g, h);
    }
    return static_cast<double>(total) / static_cast<double>(s.size());
}

// One-sample statistic against rational null marginals, computed exactly as
// sum_e |d * count_e - n * k_e| / (n * d).
inline WValue w_one_sample(const GraphSample& s, const RationalMarginals& null_marginals) {
    detail::require_nonempty(s);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    const auto counts = edge_frequency_counts(s);
    const __int128 n = static_cast<__int128>(s.size());
    const __int128 d = null_marginals.denominator();
    const auto nums = null_marginals.numerators();
    __int128 total = 0;
    for (std::size_t e = 0; e < counts.size(); ++e) {
        total += detail::abs128(d * counts[e] - n * nums[e]);
    }

    WValue w;
    w.kind = SampleKind::one_sample;
    w.n = s.size();
    const auto num = detail::narrow_exact(total);
    const auto den = detail::narrow_exact(n * d);
    if (num && den) {
        w.exact = ExactValue{*num, *den};
        w.value = w.exact->to_double();
    } else {
        w.value = static_cast<double>(total) / static_cast<double>(n * d);
    }
    return w;
}

// One-sample statistic against real-valued null marginals. Dyadic marginals
// (ER with p = 0.5, 0.25, ...) take the exact path.
inline WValue w_one_sample(const GraphSample& s, const EdgeMarginals& null_marginals) {
    detail::require_nonempty(s);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    if (auto exact = as_dyadic(null_marginals)) {
        return w_one_sample(s, *exact);
    }
    const auto counts = edge_frequency_counts(s);
    const double n = static_cast<double>(s.size());
    double total = 0.0;
    for (std::size_t e = 0; e < counts.size(); ++e) {
        total += std::abs(static_cast<double>(counts[e]) / n - null_marginals[e]);
    }
    WValue w;
    w.kind = SampleKind::one_sample;
    w.n = s.size();
    w.value = total;
    return w;
}

inline WValue w_two_sample(const GraphSample& s, const GraphSample& t) {
    detail::require_nonempty(s);
    detail::require_nonempty(t);
    require_same_vertices(s.vertex_count(), t.vertex_count());
    const auto a = edge_frequency_counts(s);
    const auto b = edge_frequency_counts(t);
    WValue w;
    w.kind = SampleKind::two_sample;
    w.n = s.size();
    w.m = t.size();
    w.exact = ExactValue{detail::two_sample_numerator(a, s.size(), b, t.size()),
                         static_cast<std::int64_t>(s.size() * t.size())};
    w.value = w.exact->to_double();
    return w;
}

// ---------------------------------------------------------------------------
// Signed discrepancy w(g) = mean distance from g to the sample minus the
// expected distance from g to a null draw. The expected distance uses the
// per-edge expansion sum_e (g_e - 2 g_e p_e + p_e).
// ---------------------------------------------------------------------------

inline ExactValue discrepancy(const GraphSample& s, const RationalMarginals& null_marginals, const Graph& g) {
    detail::require_nonempty(s);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    require_same_vertices(s.vertex_count(), g.vertex_count());
    const std::int64_t n = static_cast<std::int64_t>(s.size());
    const std::int64_t d = null_marginals.denominator();
    const auto nums = null_marginals.numerators();

    std::int64_t distance_sum = 0;
    for (const auto& h : s) {
        distance_sum += static_cast<std::int64_t>(hamming_distance(g, h));
    }
    std::int64_t expected = 0; // scaled by d
    for (std::size_t e = 0; e < nums.size(); ++e) {
        const std::int64_t ge = g.test(e) ? 1 : 0;
        expected += ge * d - 2 * ge * nums[e] + nums[e];
    }
    return ExactValue{d * distance_sum - n * expected, n * d};
}

inline double discrepancy(const GraphSample& s, const EdgeMarginals& null_marginals, const Graph& g) {
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    double expected = 0.0;
    for (std::size_t e = 0; e < null_marginals.pair_count(); ++e) {
        const double ge = g.test(e) ? 1.0 : 0.0;
        expected += ge - 2.0 * ge * null_marginals[e] + null_marginals[e];
    }
    return mean_distance(s, g) - expected;
}

// Two-sample discrepancy mean_distance(s, g) - mean_distance(t, g), exact.
inline ExactValue discrepancy(const GraphSample& s, const GraphSample& t, const Graph& g) {
    detail::require_nonempty(s);
    detail::require_nonempty(t);
    require_same_vertices(s.vertex_count(), t.vertex_count());
    std::int64_t ds = 0;
    std::int64_t dt = 0;
    for (const auto& h : s) {
        ds += static_cast<std::int64_t>(hamming_distance(g, h));
    }
    for (const auto& h : t) {
        dt += static_cast<std::int64_t>(hamming_distance(g, h));
    }
    const auto n = static_cast<std::int64_t>(s.size());
    const auto m = static_cast<std::int64_t>(t.size());
    return ExactValue{m * ds - n * dt, n * m};
}

// ---------------------------------------------------------------------------
// Maximizing graphs: g*_e = 1 iff mean_e <= p_e, g**_e = 1 iff mean_e >= p_e.
// ---------------------------------------------------------------------------

inline std::pair<Graph, Graph> argmax_graphs(const GraphSample& s, const RationalMarginals& null_marginals) {
    detail::require_nonempty(s);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    const auto counts = edge_frequency_counts(s);
    const __int128 n = static_cast<__int128>(s.size());
    const __int128 d = null_marginals.denominator();
    const auto nums = null_marginals.numerators();
    Graph lower(s.vertex_count());
    Graph upper(s.vertex_count());
    for (std::size_t e = 0; e < counts.size(); ++e) {
        const __int128 mean_scaled = d * counts[e];
        const __int128 null_scaled = n * nums[e];
        lower.set(e, mean_scaled <= null_scaled);
        upper.set(e, mean_scaled >= null_scaled);
    }
    return {std::move(lower), std::move(upper)};
}

inline std::pair<Graph, Graph> argmax_graphs(const GraphSample& s, const EdgeMarginals& null_marginals) {
    if (auto exact = as_dyadic(null_marginals)) {
        return argmax_graphs(s, *exact);
    }
    const auto mean = mean_graph(s);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    Graph lower(s.vertex_count());
    Graph upper(s.vertex_count());
    for (std::size_t e = 0; e < mean.pair_count(); ++e) {
        lower.set(e, mean[e] <= null_marginals[e]);
        upper.set(e, mean[e] >= null_marginals[e]);
    }
    return {std::move(lower), std::move(upper)};
}

// ---------------------------------------------------------------------------
// Brute-force maximization over every graph on v vertices. Graphs are visited
// in Gray-code order so each step flips one slot and the summed distances are
// updated in O(1).
// ---------------------------------------------------------------------------

inline constexpr std::size_t brute_force_vertex_limit = 5;

struct BruteForceResult {
    WValue statistic;
    Graph maximizer;
};

namespace detail {

inline void check_enumerable(std::size_t v, std::size_t limit) {
    if (v > limit || pair_count(v) > 62) {
        throw EnumerationRefused(v, limit);
    }
}

// Visits every graph in Gray-code order. step(slot, now_present) is called
// after each flip; the empty graph is the implicit starting point.
template <class Step>
void gray_walk(std::size_t e, Step&& step) {
    const std::uint64_t total = std::uint64_t{1} << e;
    for (std::uint64_t k = 1; k < total; ++k) {
        const auto slot = static_cast<std::size_t>(std::countr_zero(k));
        const std::uint64_t code = k ^ (k >> 1);
        step(slot, ((code >> slot) & 1u) != 0, code);
    }
}

inline std::int64_t distance_sum_from_empty(const GraphSample& s) {
    const Graph empty(s.vertex_count());
    std::int64_t total = 0;
    for (const auto& h : s) {
        total += static_cast<std::int64_t>(hamming_distance(empty, h));
    }
    return total;
}

} // namespace detail

inline BruteForceResult w_brute_force(const GraphSample& s, const RationalMarginals& null_marginals,
                                      std::size_t vertex_limit = brute_force_vertex_limit) {
    detail::require_nonempty(s);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    const std::size_t v = s.vertex_count();
    detail::check_enumerable(v, vertex_limit);

    const std::size_t e = pair_count(v);
    const auto counts = edge_frequency_counts(s);
    const std::int64_t n = static_cast<std::int64_t>(s.size());
    const std::int64_t d = null_marginals.denominator();
    const auto nums = null_marginals.numerators();

    // Scaled by n*d: d * sum_k D(g, g^k) - n * sum_e (g_e d - 2 g_e k_e + k_e)
    std::int64_t distance_sum = detail::distance_sum_from_empty(s);
    std::int64_t expected = 0;
    for (auto k : nums) {
        expected += k;
    }
    std::int64_t best = std::llabs(d * distance_sum - n * expected);
    std::uint64_t best_code = 0;

    detail::gray_walk(e, [&](std::size_t slot, bool added, std::uint64_t code) {
        const std::int64_t c = counts[slot];
        const std::int64_t distance_delta = (n - c) - c;
        const std::int64_t expected_delta = d - 2 * nums[slot];
        if (added) {
            distance_sum += distance_delta;
            expected += expected_delta;
        } else {
            distance_sum -= distance_delta;
            expected -= expected_delta;
        }
        const std::int64_t value = std::llabs(d * distance_sum - n * expected);
        if (value > best) {
            best = value;
            best_code = code;
        }
    });

    WValue w;
    w.kind = SampleKind::one_sample;
    w.n = s.size();
    w.exact = ExactValue{best, n * d};
    w.value = w.exact->to_double();
    return {w, Graph::from_bits(v, best_code)};
}

inline BruteForceResult w_brute_force(const GraphSample& s, const EdgeMarginals& null_marginals,
                                      std::size_t vertex_limit = brute_force_vertex_limit) {
    if (auto exact = as_dyadic(null_marginals)) {
        return w_brute_force(s, *exact, vertex_limit);
    }
    detail::require_nonempty(s);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    const std::size_t v = s.vertex_count();
    detail::check_enumerable(v, vertex_limit);

    const std::size_t e = pair_count(v);
    const auto counts = edge_frequency_counts(s);
    const double n = static_cast<double>(s.size());
    double distance_sum = static_cast<double>(detail::distance_sum_from_empty(s));
    double expected = 0.0;
    for (std::size_t slot = 0; slot < e; ++slot) {
        expected += null_marginals[slot];
    }
    double best = std::abs(distance_sum / n - expected);
    std::uint64_t best_code = 0;

    detail::gray_walk(e, [&](std::size_t slot, bool added, std::uint64_t code) {
        const double c = counts[slot];
        const double sign = added ? 1.0 : -1.0;
        distance_sum += sign * ((n - c) - c);
        expected += sign * (1.0 - 2.0 * null_marginals[slot]);
        const double value = std::abs(distance_sum / n - expected);
        if (value > best) {
            best = value;
            best_code = code;
        }
    });

    WValue w;
    w.kind = SampleKind::one_sample;
    w.n = s.size();
    w.value = best;
    return {w, Graph::from_bits(v, best_code)};
}

inline BruteForceResult w_brute_force_two_sample(const GraphSample& s, const GraphSample& t,
                                                 std::size_t vertex_limit = brute_force_vertex_limit) {
    detail::require_nonempty(s);
    detail::require_nonempty(t);
    require_same_vertices(s.vertex_count(), t.vertex_count());
    const std::size_t v = s.vertex_count();
    detail::check_enumerable(v, vertex_limit);

    const auto cs = edge_frequency_counts(s);
    const auto ct = edge_frequency_counts(t);
    const std::int64_t n = static_cast<std::int64_t>(s.size());
    const std::int64_t m = static_cast<std::int64_t>(t.size());
    std::int64_t ds = detail::distance_sum_from_empty(s);
    std::int64_t dt = detail::distance_sum_from_empty(t);
    std::int64_t best = std::llabs(m * ds - n * dt);
    std::uint64_t best_code = 0;

    detail::gray_walk(pair_count(v), [&](std::size_t slot, bool added, std::uint64_t code) {
        const std::int64_t sign = added ? 1 : -1;
        ds += sign * (n - 2 * static_cast<std::int64_t>(cs[slot]));
        dt += sign * (m - 2 * static_cast<std::int64_t>(ct[slot]));
        const std::int64_t value = std::llabs(m * ds - n * dt);
        if (value > best) {
            best = value;
            best_code = code;
        }
    });

    WValue w;
    w.kind = SampleKind::two_sample;
    w.n = s.size();
    w.m = t.size();
    w.exact = ExactValue{best, n * m};
    w.value = w.exact->to_double();
    return {w, Graph::from_bits(v, best_code)};
}

} // namespace graphdist
