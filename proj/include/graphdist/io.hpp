#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "graphdist/error.hpp"
#include "graphdist/graph.hpp"
#include "graphdist/timeseries.hpp"

namespace graphdist::io {

// ---------------------------------------------------------------------------
// Graph-sample text format
//
//   graphsample v=<int> n=<int> base=<0|1>
//   <graph_index> <i> <j>        one line per edge occurrence
//
// graph_index is always 0-based; vertex indices use the declared base.
// Lines starting with '#' and blank lines are ignored.
// ---------------------------------------------------------------------------

struct LoadedSample {
    GraphSample sample;
    int base = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

inline std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

template <class T>
bool parse_number(std::string_view text, T& value) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc{} && ptr == end && !text.empty();
}

inline bool skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

} // namespace detail

inline void write_graph_sample(std::ostream& out, const GraphSample& s, int base = 0,
                               const std::vector<std::string>& comments = {}) {
    if (base != 0 && base != 1) {
        throw InvalidArgument("vertex base must be 0 or 1");
    }
    out << "graphsample v=" << s.vertex_count() << " n=" << s.size() << " base=" << base << '\n';
    for (const auto& c : comments) {
        out << "# " << c << '\n';
    }
    const auto pairs = canonical_pairs(s.vertex_count());
    for (std::size_t k = 0; k < s.size(); ++k) {
        s[k].for_each_edge([&](std::size_t slot) {
            out << k << ' ' << pairs[slot].i + base << ' ' << pairs[slot].j + base << '\n';
        });
    }
}

inline LoadedSample read_graph_sample(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t v = 0;
    std::size_t n = 0;
    int base = 0;
    std::vector<Graph> graphs;

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::skippable(line)) {
            continue;
        }
        const auto toks = detail::tokens(line);
        if (!have_header) {
            if (toks.size() != 4 || toks[0] != "graphsample" || !toks[1].starts_with("v=") ||
                !toks[2].starts_with("n=") || !toks[3].starts_with("base=")) {
                throw ParseError(line_no, "expected header 'graphsample v=<int> n=<int> base=<0|1>'");
            }
            if (!detail::parse_number(toks[1].substr(2), v) || v < 2) {
                throw ParseError(line_no, "invalid vertex count");
            }
            if (!detail::parse_number(toks[2].substr(2), n)) {
                throw ParseError(line_no, "invalid sample size");
            }
            if (!detail::parse_number(toks[3].substr(5), base) || (base != 0 && base != 1)) {
                throw ParseError(line_no, "base must be 0 or 1");
            }
            graphs.assign(n, Graph(v));
            have_header = true;
            continue;
        }
        std::size_t k = 0;
        long long i = 0;
        long long j = 0;
        if (toks.size() != 3 || !detail::parse_number(toks[0], k) || !detail::parse_number(toks[1], i) ||
            !detail::parse_number(toks[2], j)) {
            throw ParseError(line_no, "expected '<graph_index> <i> <j>'");
        }
        if (k >= n) {
            throw ParseError(line_no, "graph index " + std::to_string(k) + " outside [0," + std::to_string(n) + ")");
        }
        i -= base;
        j -= base;
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= v || static_cast<std::size_t>(j) >= v) {
            throw ParseError(line_no, "vertex index outside the vertex set");
        }
        if (i == j) {
            throw ParseError(line_no, "self-loops are not allowed");
        }
        const std::size_t slot = pair_slot(VertexPair(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), v);
        if (graphs[k].test(slot)) {
            throw ParseError(line_no, "duplicate edge");
        }
        graphs[k].set(slot, true);
    }
    if (!have_header) {
        throw ParseError(line_no, "missing graphsample header");
    }
    return {GraphSample(v, std::move(graphs)), base};
}

// ---------------------------------------------------------------------------
// Time-series CSV: first row channel labels, then one row per time sample.
// ---------------------------------------------------------------------------

inline ChannelMatrix read_channel_matrix(std::istream& in, double sampling_rate) {
    ChannelMatrix m;
    m.sampling_rate = sampling_rate;
    std::string line;
    std::size_t line_no = 0;
    bool have_labels = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::skippable(line)) {
            continue;
        }
        const auto fields = detail::split(detail::trim(line), ',');
        if (!have_labels) {
            for (auto f : fields) {
                m.labels.emplace_back(detail::trim(f));
            }
            m.channels.assign(m.labels.size(), {});
            have_labels = true;
            continue;
        }
        if (fields.size() != m.labels.size()) {
            throw ParseError(line_no, "expected " + std::to_string(m.labels.size()) + " values, got " +
                                          std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double x = 0.0;
            if (!detail::parse_number(fields[c], x)) {
                throw ParseError(line_no, "not a number: '" + std::string(detail::trim(fields[c])) + "'");
            }
            if (!std::isfinite(x)) {
                throw ParseError(line_no, "non-finite value");
            }
            m.channels[c].push_back(x);
        }
    }
    if (!have_labels) {
        throw ParseError(line_no, "missing channel label row");
    }
    validate(m);
    return m;
}

// ---------------------------------------------------------------------------
// Marginals CSV: optional header "i,j,value", then one row per canonical pair.
// ---------------------------------------------------------------------------

inline EdgeMarginals read_marginals(std::istream& in, std::size_t v, int base = 0) {
    std::vector<double> values(pair_count(v), 0.0);
    std::vector<bool> seen(values.size(), false);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::skippable(line)) {
            continue;
        }
        const auto fields = detail::split(detail::trim(line), ',');
        if (fields.size() == 3 && detail::trim(fields[0]) == "i") {
            continue;
        }
        long long i = 0;
        long long j = 0;
        double p = 0.0;
        if (fields.size() != 3 || !detail::parse_number(fields[0], i) || !detail::parse_number(fields[1], j) ||
            !detail::parse_number(fields[2], p)) {
            throw ParseError(line_no, "expected 'i,j,value'");
        }
        i -= base;
        j -= base;
        if (i < 0 || j < 0 || i == j || static_cast<std::size_t>(i) >= v || static_cast<std::size_t>(j) >= v) {
            throw ParseError(line_no, "invalid vertex pair");
        }
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ParseError(line_no, "probability outside [0,1]");
        }
        const auto slot = pair_slot(VertexPair(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), v);
        values[slot] = p;
        seen[slot] = true;
    }
    for (std::size_t s = 0; s < seen.size(); ++s) {
        if (!seen[s]) {
            throw DataError("marginals file does not cover every vertex pair");
        }
    }
    return EdgeMarginals(v, std::move(values));
}

inline void write_marginals(std::ostream& out, const EdgeMarginals& m, int base = 0) {
    out << "i,j,value\n";
    const auto pairs = canonical_pairs(m.vertex_count());
    std::ostringstream row;
    row.precision(17);
    for (std::size_t s = 0; s < pairs.size(); ++s) {
        row.str({});
        row << pairs[s].i + base << ',' << pairs[s].j + base << ',' << m[s] << '\n';
        out << row.str();
    }
}

} // namespace graphdist::io
