#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "graphdist/error.hpp"
#include "graphdist/graph.hpp"
#include "graphdist/parallel.hpp"
#include "graphdist/rng.hpp"

namespace graphdist {

// ---------------------------------------------------------------------------
// Model descriptions
// ---------------------------------------------------------------------------

struct ErModel {
    double p = 0.5;
};

// Slots in modified_pairs are Bernoulli(p), all others Bernoulli(p0).
struct ModifiedErModel {
    double p0 = 0.5;
    double p = 0.5;
    std::vector<VertexPair> modified_pairs;
};

enum class ErgmStatistics { edge_triangle, edge_two_star };

// pi(g | theta) proportional to exp(theta1 * edges + theta2 * second_statistic)
struct ErgmModel {
    ErgmStatistics stats = ErgmStatistics::edge_triangle;
    double theta1 = 0.0;
    double theta2 = 0.0;
};

struct ModelSpec {
    std::size_t v = 2;
    std::variant<ErModel, ModifiedErModel, ErgmModel> model;
};

// One sweep is E proposed single-edge flips.
struct McmcConfig {
    std::size_t burn_in = 200;
    std::size_t thinning = 10;
};

inline bool valid_probability(double p) { return p >= 0.0 && p <= 1.0; }

inline void validate(const McmcConfig& config) {
    if (config.thinning < 1) {
        throw InvalidArgument("MCMC thinning must be at least 1 sweep");
    }
}

inline void validate(const ModelSpec& spec) {
    if (spec.v < 2) {
        throw InvalidArgument("model needs v >= 2");
    }
    if (const auto* er = std::get_if<ErModel>(&spec.model)) {
        if (!valid_probability(er->p)) {
            throw InvalidArgument("ER probability outside [0,1]");
        }
    } else if (const auto* mod = std::get_if<ModifiedErModel>(&spec.model)) {
        if (!valid_probability(mod->p0) || !valid_probability(mod->p)) {
            throw InvalidArgument("modified ER probability outside [0,1]");
        }
        for (const auto& pr : mod->modified_pairs) {
            if (pr.j >= spec.v) {
                throw InvalidArgument("modified pair outside the vertex set");
            }
        }
    } else {
        const auto& ergm = std::get<ErgmModel>(spec.model);
        if (!std::isfinite(ergm.theta1) || !std::isfinite(ergm.theta2)) {
            throw InvalidArgument("ERGM parameters must be finite");
        }
    }
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------------------
// Erdos-Renyi and modified Erdos-Renyi
// ---------------------------------------------------------------------------

inline EdgeMarginals er_marginals(std::size_t v, double p) {
    if (!valid_probability(p)) {
        throw InvalidArgument("ER probability outside [0,1]");
    }
    return EdgeMarginals::constant(v, p);
}

namespace detail {

inline Graph draw_independent(std::size_t v, std::span<const double> probs, Engine& rng) {
    Graph g(v);
    for (std::size_t slot = 0; slot < probs.size(); ++slot) {
        if (bernoulli(rng, probs[slot])) {
            g.set(slot, true);
        }
    }
    return g;
}

} // namespace detail

inline GraphSample sample_er(std::size_t v, double p, std::size_t n, Engine& rng) {
    if (!valid_probability(p)) {
        throw InvalidArgument("ER probability outside [0,1]");
    }
    if (n < 1) {
        throw InvalidArgument("sample size must be at least 1");
    }
    const std::vector<double> probs(pair_count(v), p);
    GraphSample s(v);
    for (std::size_t k = 0; k < n; ++k) {
        s.push_back(detail::draw_independent(v, probs, rng));
    }
    return s;
}

// Uniformly random set of round-half-up(q * E) canonical pairs, sorted.
inline std::vector<VertexPair> select_modified_pairs(std::size_t v, double q, Engine& rng) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw InvalidArgument("fraction q outside [0,1]");
    }
    const std::size_t e = pair_count(v);
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(e) + 0.5));
    std::vector<std::size_t> slots(e);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    // partial Fisher-Yates: the first k positions are the selection
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, e - i));
        std::swap(slots[i], slots[j]);
    }
    slots.resize(k);
    std::sort(slots.begin(), slots.end());
    const auto all = canonical_pairs(v);
    std::vector<VertexPair> out;
    out.reserve(k);
    for (auto s : slots) {
        out.push_back(all[s]);
    }
    return out;
}

inline EdgeMarginals modified_er_marginals(std::size_t v, const ModifiedErModel& model) {
    std::vector<double> probs(pair_count(v), model.p0);
    for (const auto& pr : model.modified_pairs) {
        probs[pair_slot(pr, v)] = model.p;
    }
    return EdgeMarginals(v, std::move(probs));
}

inline GraphSample sample_modified_er(const ModelSpec& spec, std::size_t n, Engine& rng) {
    validate(spec);
    const auto* model = std::get_if<ModifiedErModel>(&spec.model);
    if (model == nullptr) {
        throw InvalidArgument("sample_modified_er needs a modified ER spec");
    }
    if (n < 1) {
        throw InvalidArgument("sample size must be at least 1");
    }
    const auto probs = modified_er_marginals(spec.v, *model);
    GraphSample s(spec.v);
    for (std::size_t k = 0; k < n; ++k) {
        s.push_back(detail::draw_independent(spec.v, probs.values(), rng));
    }
    return s;
}

// ---------------------------------------------------------------------------
// ERGM: exact evaluation
// ---------------------------------------------------------------------------

inline constexpr std::size_t enumeration_vertex_limit = 6;

inline double ergm_second_statistic(const Graph& g, ErgmStatistics stats) {
    return static_cast<double>(stats == ErgmStatistics::edge_triangle ? triangle_count(g) : two_star_count(g));
}

// Unnormalized log weight theta . S(g).
inline double ergm_log_weight(const Graph& g, const ErgmModel& model) {
    return model.theta1 * static_cast<double>(edge_count(g)) + model.theta2 * ergm_second_statistic(g, model.stats);
}

inline double ergm_log_weight(const Graph& g, const ModelSpec& spec) {
    require_same_vertices(spec.v, g.vertex_count());
    const auto* model = std::get_if<ErgmModel>(&spec.model);
    if (model == nullptr) {
        throw InvalidArgument("ergm_log_weight needs an ERGM spec");
    }
    return ergm_log_weight(g, *model);
}

// Probabilities over all 2^E graphs, indexed by the graph's slot bitset.
class ExactDistribution {
public:
    ExactDistribution(std::size_t v, std::vector<double> probabilities, double log_normalizer)
        : v_(v), probabilities_(std::move(probabilities)), log_normalizer_(log_normalizer) {}

    std::size_t vertex_count() const noexcept { return v_; }
    std::span<const double> probabilities() const noexcept { return probabilities_; }
    double probability(const Graph& g) const { return probabilities_.at(g.low_bits()); }
    double log_normalizer() const noexcept { return log_normalizer_; }

    EdgeMarginals marginals() const {
        const std::size_t e = pair_count(v_);
        std::vector<double> values(e, 0.0);
        for (std::uint64_t code = 0; code < probabilities_.size(); ++code) {
            std::uint64_t bits = code;
            while (bits != 0) {
                values[static_cast<std::size_t>(std::countr_zero(bits))] += probabilities_[code];
                bits &= bits - 1;
            }
        }
        for (auto& x : values) {
            x = std::clamp(x, 0.0, 1.0);
        }
        return EdgeMarginals(v_, std::move(values));
    }

    // Expected edge_count / E.
    double edge_density() const {
        double total = 0.0;
        for (std::uint64_t code = 0; code < probabilities_.size(); ++code) {
            total += probabilities_[code] * static_cast<double>(std::popcount(code));
        }
        return total / static_cast<double>(pair_count(v_));
    }

private:
    std::size_t v_;
    std::vector<double> probabilities_;
    double log_normalizer_;
};

inline ExactDistribution ergm_enumerate(const ModelSpec& spec, std::size_t vertex_limit = enumeration_vertex_limit) {
    validate(spec);
    const auto* model = std::get_if<ErgmModel>(&spec.model);
    if (model == nullptr) {
        throw InvalidArgument("ergm_enumerate needs an ERGM spec");
    }
    if (spec.v > vertex_limit || pair_count(spec.v) > 30) {
        throw EnumerationRefused(spec.v, vertex_limit);
    }
    const std::uint64_t total = std::uint64_t{1} << pair_count(spec.v);
    std::vector<double> log_weights(total);
    for (std::uint64_t code = 0; code < total; ++code) {
        log_weights[code] = ergm_log_weight(Graph::from_bits(spec.v, code), *model);
    }
    const double peak = *std::max_element(log_weights.begin(), log_weights.end());
    double sum = 0.0;
    for (double lw : log_weights) {
        sum += std::exp(lw - peak);
    }
    const double log_z = peak + std::log(sum);
    for (auto& lw : log_weights) {
        lw = std::exp(lw - log_z);
    }
    return ExactDistribution(spec.v, std::move(log_weights), log_z);
}

// ---------------------------------------------------------------------------
// ERGM: single-edge-flip Metropolis-Hastings
// ---------------------------------------------------------------------------

class ErgmChain {
public:
    ErgmChain(std::size_t v, const ErgmModel& model) : v_(v), model_(model), adjacency_(v * v, 0), degree_(v, 0) {
        const auto pairs = canonical_pairs(v);
        endpoints_.assign(pairs.begin(), pairs.end());
    }

    // Change in theta . S when flipping pair (i, j) in the current state.
    double log_weight_delta(std::size_t i, std::size_t j) const {
        const bool present = adjacency_[i * v_ + j] != 0;
        double second = 0.0;
        if (model_.stats == ErgmStatistics::edge_triangle) {
            std::size_t common = 0;
            const std::uint8_t* ri = &adjacency_[i * v_];
            const std::uint8_t* rj = &adjacency_[j * v_];
            for (std::size_t k = 0; k < v_; ++k) {
                common += static_cast<std::size_t>(ri[k] & rj[k]);
            }
            second = static_cast<double>(common);
        } else {
            // sum_c C(deg c, 2): adding (i,j) raises it by deg(i) + deg(j)
            const std::size_t others = degree_[i] + degree_[j] - (present ? 2 : 0);
            second = static_cast<double>(others);
        }
        const double sign = present ? -1.0 : 1.0;
        return sign * (model_.theta1 + model_.theta2 * second);
    }

    void flip(std::size_t i, std::size_t j) {
        const bool present = adjacency_[i * v_ + j] != 0;
        const std::uint8_t now = present ? 0 : 1;
        adjacency_[i * v_ + j] = now;
        adjacency_[j * v_ + i] = now;
        if (present) {
            --degree_[i];
            --degree_[j];
        } else {
            ++degree_[i];
            ++degree_[j];
        }
    }

    // One proposal: flip a uniformly chosen pair with probability
    // min(1, exp(delta)). Returns whether the flip was accepted.
    bool step(Engine& rng) {
        const auto slot = static_cast<std::size_t>(uniform_below(rng, endpoints_.size()));
        const auto [i, j] = endpoints_[slot];
        const double delta = log_weight_delta(i, j);
        if (delta >= 0.0 || uniform01(rng) < std::exp(delta)) {
            flip(i, j);
            return true;
        }
        return false;
    }

    void sweep(Engine& rng, std::size_t count = 1) {
        for (std::size_t s = 0; s < count; ++s) {
            for (std::size_t k = 0; k < endpoints_.size(); ++k) {
                step(rng);
            }
        }
    }

    Graph state() const {
        Graph g(v_);
        for (std::size_t slot = 0; slot < endpoints_.size(); ++slot) {
            const auto& pr = endpoints_[slot];
            if (adjacency_[pr.i * v_ + pr.j] != 0) {
                g.set(slot, true);
            }
        }
        return g;
    }

private:
    std::size_t v_;
    ErgmModel model_;
    std::vector<VertexPair> endpoints_;
    std::vector<std::uint8_t> adjacency_;
    std::vector<std::size_t> degree_;
};

// n draws from one chain started at the empty graph: burn_in sweeps, then a
// draw retained after every `thinning` sweeps.
inline GraphSample ergm_mh_sample(const ModelSpec& spec, std::size_t n, const McmcConfig& mcmc, Engine& rng) {
    validate(spec);
    validate(mcmc);
    const auto* model = std::get_if<ErgmModel>(&spec.model);
    if (model == nullptr) {
        throw InvalidArgument("ergm_mh_sample needs an ERGM spec");
    }
    if (n < 1) {
        throw InvalidArgument("sample size must be at least 1");
    }
    ErgmChain chain(spec.v, *model);
    chain.sweep(rng, mcmc.burn_in);
    GraphSample s(spec.v);
    for (std::size_t k = 0; k < n; ++k) {
        chain.sweep(rng, mcmc.thinning);
        s.push_back(chain.state());
    }
    return s;
}

// ---------------------------------------------------------------------------
// Dispatch over model kinds
// ---------------------------------------------------------------------------

inline GraphSample sample_model(const ModelSpec& spec, std::size_t n, Engine& rng, const McmcConfig& mcmc = {}) {
    validate(spec);
    if (const auto* er = std::get_if<ErModel>(&spec.model)) {
        return sample_er(spec.v, er->p, n, rng);
    }
    if (std::holds_alternative<ModifiedErModel>(spec.model)) {
        return sample_modified_er(spec, n, rng);
    }
    return ergm_mh_sample(spec, n, mcmc, rng);
}

// Exact edge marginals of a model. ERGM marginals come from enumeration and
// are refused above the enumeration limit.
inline EdgeMarginals model_marginals(const ModelSpec& spec) {
    validate(spec);
    if (const auto* er = std::get_if<ErModel>(&spec.model)) {
        return er_marginals(spec.v, er->p);
    }
    if (const auto* mod = std::get_if<ModifiedErModel>(&spec.model)) {
        return modified_er_marginals(spec.v, *mod);
    }
    if (spec.v > enumeration_vertex_limit) {
        throw ConfigError("ERGM marginals are not computable for v=" + std::to_string(spec.v) +
                          " without enumeration; supply a marginals estimate");
    }
    return ergm_enumerate(spec).marginals();
}

// ---------------------------------------------------------------------------
// Edge-density sweep over a parameter grid
// ---------------------------------------------------------------------------

struct DensityPoint {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double density = 0.0;
    std::optional<double> exact_density; // when v is enumerable
    bool degenerate = false;              // density < 0.02 or > 0.98
};

inline constexpr double degenerate_low = 0.02;
inline constexpr double degenerate_high = 0.98;

// Grid point k uses generator stream k of `seed`.
inline std::vector<DensityPoint> edge_density_sweep(ErgmStatistics stats,
                                                    std::span<const std::pair<double, double>> grid,
                                                    std::size_t v, std::size_t n, const McmcConfig& mcmc,
                                                    std::uint64_t seed, unsigned threads = 1) {
    if (grid.empty()) {
        throw InvalidArgument("density sweep needs a nonempty grid");
    }
    std::vector<DensityPoint> out(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t k) {
        ModelSpec spec{v, ErgmModel{stats, grid[k].first, grid[k].second}};
        Engine rng = stream_engine(seed, k);
        const auto sample = ergm_mh_sample(spec, n, mcmc, rng);
        double total = 0.0;
        for (const auto& g : sample) {
            total += static_cast<double>(edge_count(g));
        }
        DensityPoint point;
        point.theta1 = grid[k].first;
        point.theta2 = grid[k].second;
        point.density = total / static_cast<double>(n * pair_count(v));
        if (v <= enumeration_vertex_limit) {
            point.exact_density = ergm_enumerate(spec).edge_density();
        }
        point.degenerate = point.density < degenerate_low || point.density > degenerate_high;
        out[k] = point;
    });
    return out;
}

} // namespace graphdist
