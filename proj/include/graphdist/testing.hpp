#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "graphdist/error.hpp"
#include "graphdist/graph.hpp"
#include "graphdist/models.hpp"
#include "graphdist/parallel.hpp"
#include "graphdist/rng.hpp"
#include "graphdist/statistic.hpp"

namespace graphdist {

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

// Quantile-based tests fill critical_value and reject iff W > critical_value.
// Permutation tests fill p_value and reject iff p_value <= alpha.
struct TestResult {
    WValue statistic;
    double alpha = 0.05;
    std::optional<double> critical_value;
    std::optional<double> p_value;
    bool reject = false;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::string marginals_source;
};

struct PowerPoint {
    double parameter = 0.0;
    double power = 0.0;
    std::optional<double> power_bc;
    std::size_t replications = 0;
};

struct MonteCarloOptions {
    std::size_t replications = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    McmcConfig mcmc{};
};

namespace detail {

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("alpha must lie in (0,1)");
    }
}

inline void check_replications(std::size_t r, const char* what) {
    if (r < 100) {
        throw InvalidArgument(std::string(what) + " must be at least 100");
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Monte Carlo null distribution
// ---------------------------------------------------------------------------

struct NullMarginals {
    EdgeMarginals marginals;
    std::string source;
};

inline NullMarginals resolve_null_marginals(const ModelSpec& null, const std::optional<EdgeMarginals>& user) {
    if (user) {
        require_same_vertices(null.v, user->vertex_count());
        return {*user, "user-supplied"};
    }
    const bool enumerated = std::holds_alternative<ErgmModel>(null.model);
    return {model_marginals(null), enumerated ? "enumeration" : "closed-form"};
}

// W of R independent null samples of size n; replication r uses stream r of seed.
inline std::vector<double> simulate_null_w(const ModelSpec& null, const EdgeMarginals& marginals, std::size_t n,
                                           const MonteCarloOptions& opts) {
    require_same_vertices(null.v, marginals.vertex_count());
    const auto exact = as_dyadic(marginals);
    std::vector<double> values(opts.replications);
    parallel_for(opts.replications, opts.threads, [&](std::size_t r) {
        Engine rng = stream_engine(opts.seed, r);
        const auto sample = sample_model(null, n, rng, opts.mcmc);
        values[r] = exact ? w_one_sample(sample, *exact).value : w_one_sample(sample, marginals).value;
    });
    return values;
}

// Order statistic at 1-based rank ceil((1 - alpha) * R).
inline double upper_quantile(std::vector<double> values, double alpha) {
    detail::check_alpha(alpha);
    if (values.empty()) {
        throw InvalidArgument("quantile of an empty set");
    }
    const double r = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * r - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
    return values[rank - 1];
}

inline double null_quantile_mc(const ModelSpec& null, std::size_t n, double alpha, const MonteCarloOptions& opts,
                               const std::optional<EdgeMarginals>& marginals = std::nullopt) {
    detail::check_alpha(alpha);
    detail::check_replications(opts.replications, "quantile replications");
    const auto resolved = resolve_null_marginals(null, marginals);
    return upper_quantile(simulate_null_w(null, resolved.marginals, n, opts), alpha);
}

inline TestResult one_sample_test(const GraphSample& s, const ModelSpec& null, double alpha,
                                  const MonteCarloOptions& opts,
                                  const std::optional<EdgeMarginals>& marginals = std::nullopt) {
    require_same_vertices(null.v, s.vertex_count());
    detail::check_alpha(alpha);
    detail::check_replications(opts.replications, "quantile replications");
    const auto resolved = resolve_null_marginals(null, marginals);

    TestResult result;
    result.statistic = w_one_sample(s, resolved.marginals);
    result.alpha = alpha;
    result.critical_value = upper_quantile(simulate_null_w(null, resolved.marginals, s.size(), opts), alpha);
    result.reject = result.statistic.value > *result.critical_value;
    result.replications = opts.replications;
    result.seed = opts.seed;
    result.marginals_source = resolved.source;
    return result;
}

// ---------------------------------------------------------------------------
// Two-sample permutation test
// ---------------------------------------------------------------------------

enum class TieRule {
    inclusive, // count W_perm >= W_obs
    strict,    // count W_perm > W_obs
};

struct PermutationOptions {
    std::size_t permutations = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    double alpha = 0.05;
    TieRule ties = TieRule::inclusive;
    bool add_one = false; // (1 + count) / (1 + R)
};

// The pooled sample is sorted and the smaller group is the one drawn; swapping
// s and t gives the same p-value for the same seed.
inline TestResult two_sample_permutation_test(const GraphSample& s, const GraphSample& t,
                                              const PermutationOptions& opts = {}) {
    const WValue observed = w_two_sample(s, t);
    detail::check_alpha(opts.alpha);
    detail::check_replications(opts.permutations, "permutations");

    std::vector<const Graph*> pooled;
    pooled.reserve(s.size() + t.size());
    for (const auto& g : s) {
        pooled.push_back(&g);
    }
    for (const auto& g : t) {
        pooled.push_back(&g);
    }
    std::sort(pooled.begin(), pooled.end(), [](const Graph* a, const Graph* b) { return *a < *b; });

    std::vector<std::vector<std::uint32_t>> slots(pooled.size());
    std::vector<std::uint32_t> totals(s.pair_count(), 0);
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        pooled[k]->for_each_edge([&](std::size_t e) {
            slots[k].push_back(static_cast<std::uint32_t>(e));
            ++totals[e];
        });
    }

    const std::size_t total = pooled.size();
    const std::size_t drawn = std::min(s.size(), t.size());
    const std::size_t rest = total - drawn;
    const std::int64_t target = observed.exact->numerator;

    std::vector<std::uint8_t> exceeds(opts.permutations, 0);
    parallel_for(opts.permutations, opts.threads, [&](std::size_t r) {
        Engine rng = stream_engine(opts.seed, r);
        std::vector<std::uint32_t> order(total);
        std::iota(order.begin(), order.end(), 0u);
        for (std::size_t i = 0; i < drawn; ++i) {
            const auto j = i + static_cast<std::size_t>(uniform_below(rng, total - i));
            std::swap(order[i], order[j]);
        }
        std::vector<std::uint32_t> a(totals.size(), 0);
        for (std::size_t i = 0; i < drawn; ++i) {
            for (auto e : slots[order[i]]) {
                ++a[e];
            }
        }
        std::vector<std::uint32_t> b(totals.size());
        for (std::size_t e = 0; e < b.size(); ++e) {
            b[e] = totals[e] - a[e];
        }
        const std::int64_t value = detail::two_sample_numerator(a, drawn, b, rest);
        const bool hit = opts.ties == TieRule::inclusive ? value >= target : value > target;
        exceeds[r] = hit ? 1 : 0;
    });

    const auto count = static_cast<double>(std::count(exceeds.begin(), exceeds.end(), std::uint8_t{1}));
    const auto r = static_cast<double>(opts.permutations);

    TestResult result;
    result.statistic = observed;
    result.alpha = opts.alpha;
    result.p_value = opts.add_one ? (1.0 + count) / (1.0 + r) : count / r;
    result.reject = *result.p_value <= opts.alpha;
    result.replications = opts.permutations;
    result.seed = opts.seed;
    return result;
}

// ---------------------------------------------------------------------------
// Exact binomial test and the per-edge Bonferroni baseline
// ---------------------------------------------------------------------------

inline double binom_pmf(std::uint64_t k, std::uint64_t n, double p) {
    if (p <= 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    if (p >= 1.0) {
        return k == n ? 1.0 : 0.0;
    }
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double log_choose = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
    return std::exp(log_choose + kk * std::log(p) + (nn - kk) * std::log1p(-p));
}

// Relative slack for "no more likely than the observed outcome" (R's binom.test value).
inline constexpr double binom_relative_tolerance = 1.0 + 1e-7;

// Two-sided exact p-value, minimum-likelihood definition: the total
// probability of outcomes no more likely than k.
inline double binom_two_sided_pvalue(std::uint64_t k, std::uint64_t n, double p0) {
    if (k > n) {
        throw InvalidArgument("binomial successes exceed trials");
    }
    if (!valid_probability(p0)) {
        throw InvalidArgument("binomial probability outside [0,1]");
    }
    const double observed = binom_pmf(k, n, p0) * binom_relative_tolerance;
    double total = 0.0;
    bool every_outcome = true;
    for (std::uint64_t i = 0; i <= n; ++i) {
        const double d = binom_pmf(i, n, p0);
        if (d <= observed) {
            total += d;
        } else {
            every_outcome = false;
        }
    }
    return every_outcome ? 1.0 : std::min(total, 1.0);
}

// p-values for every k in [0, n] at a fixed (n, p0).
class BinomialPValueTable {
public:
    BinomialPValueTable(std::uint64_t n, double p0) : values_(n + 1) {
        for (std::uint64_t k = 0; k <= n; ++k) {
            values_[k] = binom_two_sided_pvalue(k, n, p0);
        }
    }
    double operator[](std::uint64_t k) const { return values_.at(k); }

private:
    std::vector<double> values_;
};

using BinomialCache = std::map<double, BinomialPValueTable>;

// Tables for every distinct null probability, for repeated tests at sample size n.
inline BinomialCache make_binomial_cache(std::uint64_t n, const EdgeMarginals& null_marginals) {
    BinomialCache cache;
    for (double p0 : null_marginals.values()) {
        if (cache.find(p0) == cache.end()) {
            cache.emplace(p0, BinomialPValueTable(n, p0));
        }
    }
    return cache;
}

struct BonferroniResult {
    TestResult result;               // p_value is min(1, E * min edge p-value)
    double threshold = 0.0;          // alpha / E
    std::vector<double> edge_p_values;
};

inline BonferroniResult bonferroni_edge_test(const GraphSample& s, const EdgeMarginals& null_marginals, double alpha,
                                             const BinomialCache* cache = nullptr) {
    detail::check_alpha(alpha);
    require_same_vertices(s.vertex_count(), null_marginals.vertex_count());
    if (s.empty()) {
        throw EmptySampleError();
    }
    const auto counts = edge_frequency_counts(s);
    const std::size_t e = counts.size();
    const std::uint64_t n = s.size();

    BonferroniResult out;
    out.threshold = alpha / static_cast<double>(e);
    out.edge_p_values.resize(e);
    double min_p = 1.0;
    for (std::size_t slot = 0; slot < e; ++slot) {
        const double p0 = null_marginals[slot];
        double p = 0.0;
        const auto it = cache != nullptr ? cache->find(p0) : BinomialCache::const_iterator{};
        if (cache != nullptr && it != cache->end()) {
            p = it->second[counts[slot]];
        } else {
            p = binom_two_sided_pvalue(counts[slot], n, p0);
        }
        out.edge_p_values[slot] = p;
        min_p = std::min(min_p, p);
    }
    out.result.statistic = w_one_sample(s, null_marginals);
    out.result.alpha = alpha;
    out.result.p_value = std::min(1.0, min_p * static_cast<double>(e));
    out.result.reject = min_p <= out.threshold;
    out.result.replications = 0;
    out.result.marginals_source = "supplied";
    return out;
}

// ---------------------------------------------------------------------------
// Power curves
// ---------------------------------------------------------------------------

struct Alternative {
    double parameter = 0.0;
    ModelSpec model;
};

struct PowerOptions {
    std::size_t replications = 2000; // samples drawn per alternative
    double alpha = 0.05;
    std::size_t quantile_replications = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    McmcConfig mcmc{};
    bool bonferroni = false;
    std::optional<EdgeMarginals> null_marginals;
};

// Stream layout under opts.seed: child 0 drives the null quantile, child k+1
// drives alternative k (replication r uses its stream r).
inline std::vector<PowerPoint> power_curve(const ModelSpec& null, std::span<const Alternative> alternatives,
                                           std::size_t n, const PowerOptions& opts) {
    detail::check_alpha(opts.alpha);
    detail::check_replications(opts.replications, "power replications");
    for (const auto& alt : alternatives) {
        require_same_vertices(null.v, alt.model.v);
    }
    const auto resolved = resolve_null_marginals(null, opts.null_marginals);
    const auto exact = as_dyadic(resolved.marginals);

    MonteCarloOptions mc;
    mc.replications = opts.quantile_replications;
    mc.seed = derive_seed(opts.seed, 0);
    mc.threads = opts.threads;
    mc.mcmc = opts.mcmc;
    const double critical = null_quantile_mc(null, n, opts.alpha, mc, resolved.marginals);
    const auto binomial_cache = opts.bonferroni ? make_binomial_cache(n, resolved.marginals) : BinomialCache{};

    std::vector<PowerPoint> points;
    points.reserve(alternatives.size());
    for (std::size_t k = 0; k < alternatives.size(); ++k) {
        const auto& alt = alternatives[k];
        const std::uint64_t alt_seed = derive_seed(opts.seed, k + 1);
        std::vector<std::uint8_t> w_reject(opts.replications, 0);
        std::vector<std::uint8_t> bc_reject(opts.replications, 0);
        parallel_for(opts.replications, opts.threads, [&](std::size_t r) {
            Engine rng = stream_engine(alt_seed, r);
            const auto sample = sample_model(alt.model, n, rng, opts.mcmc);
            const double w =
                exact ? w_one_sample(sample, *exact).value : w_one_sample(sample, resolved.marginals).value;
            w_reject[r] = w > critical ? 1 : 0;
            if (opts.bonferroni) {
                bc_reject[r] = bonferroni_edge_test(sample, resolved.marginals, opts.alpha, &binomial_cache).result.reject ? 1 : 0;
            }
        });
        PowerPoint point;
        point.parameter = alt.parameter;
        point.replications = opts.replications;
        const auto m = static_cast<double>(opts.replications);
        point.power = static_cast<double>(std::count(w_reject.begin(), w_reject.end(), std::uint8_t{1})) / m;
        if (opts.bonferroni) {
            point.power_bc = static_cast<double>(std::count(bc_reject.begin(), bc_reject.end(), std::uint8_t{1})) / m;
        }
        points.push_back(point);
    }
    return points;
}

} // namespace graphdist
