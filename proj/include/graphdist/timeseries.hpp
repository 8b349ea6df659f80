#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "graphdist/error.hpp"
#include "graphdist/graph.hpp"
#include "graphdist/parallel.hpp"

namespace graphdist {

// Multichannel signal, one vector per channel.
struct ChannelMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> channels;
    double sampling_rate = 0.0; // Hz

    std::size_t channel_count() const noexcept { return channels.size(); }
    std::size_t length() const noexcept { return channels.empty() ? 0 : channels.front().size(); }
};

inline void validate(const ChannelMatrix& m) {
    if (m.channels.size() < 2) {
        throw DataError("need at least 2 channels");
    }
    if (m.labels.size() != m.channels.size()) {
        throw DataError("channel labels and data disagree in count");
    }
    if (!(m.sampling_rate > 0.0) || !std::isfinite(m.sampling_rate)) {
        throw InvalidArgument("sampling rate must be positive");
    }
    for (const auto& c : m.channels) {
        if (c.size() != m.length()) {
            throw DataError("channels have different lengths");
        }
        for (double x : c) {
            if (!std::isfinite(x)) {
                throw DataError("signal contains a non-finite value");
            }
        }
    }
}

struct WindowSpec {
    double width_ms = 333.0;
    double step_ms = 16.66;
};

// Window k spans samples [start, end) with start = round(k * step) and
// end = round(k * step + width), both converted from milliseconds on their
// own. Windows are kept while end <= series length.
struct Window {
    std::size_t start = 0;
    std::size_t end = 0;
};

inline std::size_t ms_to_samples(double ms, double sampling_rate) {
    return static_cast<std::size_t>(std::llround(ms * sampling_rate / 1000.0));
}

inline std::vector<Window> window_layout(std::size_t length, double sampling_rate, const WindowSpec& w) {
    if (!(w.width_ms > 0.0) || !(w.step_ms > 0.0)) {
        throw InvalidArgument("window width and step must be positive");
    }
    if (ms_to_samples(w.width_ms, sampling_rate) < 2) {
        throw InvalidArgument("window must cover at least 2 samples");
    }
    if (ms_to_samples(w.width_ms, sampling_rate) > length) {
        throw InvalidArgument("window is longer than the series");
    }
    std::vector<Window> out;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * w.step_ms;
        const Window win{ms_to_samples(t, sampling_rate), ms_to_samples(t + w.width_ms, sampling_rate)};
        if (win.end > length) {
            break;
        }
        out.push_back(win);
    }
    return out;
}

// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = mean_rank;
        }
        i = j + 1;
    }
    return ranks;
}

// Pearson correlation of the average ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InvalidArgument("spearman: sequences differ in length");
    }
    if (x.size() < 2) {
        throw InvalidArgument("spearman: need at least 2 observations");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mean = 0.5 * static_cast<double>(x.size() + 1);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < rx.size(); ++k) {
        const double a = rx[k] - mean;
        const double b = ry[k] - mean;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedCorrelation();
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct CorrelationSeries {
    std::size_t channel_count = 0;
    std::vector<Window> windows;
    std::vector<std::vector<double>> values; // [pair slot][window]
    std::size_t undefined_windows = 0;       // (window, pair) cells set to 0 for a constant input
};

// Spearman correlation of every channel pair in every window.
inline CorrelationSeries correlation_series(const ChannelMatrix& m, const WindowSpec& w, unsigned threads = 1) {
    validate(m);
    CorrelationSeries cs;
    cs.channel_count = m.channel_count();
    cs.windows = window_layout(m.length(), m.sampling_rate, w);
    const auto pairs = canonical_pairs(m.channel_count());
    cs.values.assign(pairs.size(), std::vector<double>(cs.windows.size(), 0.0));
    std::vector<std::size_t> undefined(pairs.size(), 0);

    parallel_for(pairs.size(), threads, [&](std::size_t slot) {
        const auto& a = m.channels[pairs[slot].i];
        const auto& b = m.channels[pairs[slot].j];
        for (std::size_t k = 0; k < cs.windows.size(); ++k) {
            const auto [start, end] = cs.windows[k];
            const std::span<const double> x(a.data() + start, end - start);
            const std::span<const double> y(b.data() + start, end - start);
            try {
                cs.values[slot][k] = spearman(x, y);
            } catch (const UndefinedCorrelation&) {
                cs.values[slot][k] = 0.0;
                ++undefined[slot];
            }
        }
    });
    cs.undefined_windows = std::accumulate(undefined.begin(), undefined.end(), std::size_t{0});
    return cs;
}

struct Quartiles {
    double q1 = 0.0;
    double q3 = 0.0;
};

// Linear interpolation between order statistics at position 1 + (len - 1) p.
inline double interpolated_quantile(std::span<const double> sorted, double p) {
    const double pos = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline Quartiles pair_quartiles(std::span<const double> series) {
    if (series.size() < 4) {
        throw InvalidArgument("quartiles need at least 4 values");
    }
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    return {interpolated_quantile(sorted, 0.25), interpolated_quantile(sorted, 0.75)};
}

struct ThresholdSpec {
    double c = 0.5;
};

inline bool threshold_edge(double rho, double c, const Quartiles& q) {
    return rho >= std::max(c, q.q3) || rho <= std::min(-c, q.q1);
}

// One graph per window: edge (i,j) present iff its correlation is at or above
// max(c, q3) or at or below min(-c, q1), with quartiles taken over that
// pair's whole series.
inline GraphSample build_graphs(const CorrelationSeries& cs, const ThresholdSpec& th) {
    if (!(th.c > 0.0 && th.c < 1.0)) {
        throw InvalidArgument("threshold constant c must lie in (0,1)");
    }
    const std::size_t windows = cs.windows.size();
    std::vector<Graph> graphs(windows, Graph(cs.channel_count));
    for (std::size_t slot = 0; slot < cs.values.size(); ++slot) {
        const auto q = pair_quartiles(cs.values[slot]);
        for (std::size_t k = 0; k < windows; ++k) {
            if (threshold_edge(cs.values[slot][k], th.c, q)) {
                graphs[k].set(slot, true);
            }
        }
    }
    return GraphSample(cs.channel_count, std::move(graphs));
}

struct SummaryEdge {
    VertexPair pair;
    double frequency = 0.0;
};

struct SummaryGraph {
    Graph graph;
    std::vector<SummaryEdge> edges; // by decreasing frequency, then pair order
};

// The k most frequent edges of a sample.
inline SummaryGraph summary_graph(const GraphSample& s, std::size_t k) {
    if (s.empty()) {
        throw EmptySampleError();
    }
    const std::size_t e = s.pair_count();
    if (k > e) {
        throw InvalidArgument("summary size " + std::to_string(k) + " exceeds the " + std::to_string(e) +
                              " vertex pairs");
    }
    const auto counts = edge_frequency_counts(s);
    std::vector<std::size_t> order(e);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });

    const auto pairs = canonical_pairs(s.vertex_count());
    SummaryGraph out{Graph(s.vertex_count()), {}};
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t slot = order[r];
        out.graph.set(slot, true);
        out.edges.push_back({pairs[slot], static_cast<double>(counts[slot]) / static_cast<double>(s.size())});
    }
    return out;
}

} // namespace graphdist
