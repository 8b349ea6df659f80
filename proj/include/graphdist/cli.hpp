#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphdist/error.hpp"
#include "graphdist/graph.hpp"
#include "graphdist/io.hpp"
#include "graphdist/models.hpp"
#include "graphdist/statistic.hpp"
#include "graphdist/testing.hpp"
#include "graphdist/timeseries.hpp"
#include "graphdist/version.hpp"

namespace graphdist::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_data = 3,
    exit_refused = 4,
};

// Shortest round-trip decimal form; identical on every run.
inline std::string format_number(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

namespace detail {

using json = nlohmann::json;

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Records the invocation; written next to the outputs it describes.
class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> args) : started_(utc_timestamp()) {
        doc_["tool"] = "graphdist";
        doc_["version"] = version;
        doc_["command"] = std::move(command);
        doc_["arguments"] = std::move(args);
        doc_["parameters"] = json::object();
        doc_["outputs"] = json::array();
    }

    template <class T>
    void set(const std::string& key, const T& value) {
        doc_["parameters"][key] = value;
    }
    void seed(std::uint64_t s) { doc_["seed"] = s; }
    void output(const std::string& path) { doc_["outputs"].push_back(path); }

    // Path written into output files, or empty when no manifest is produced.
    const std::string& reference() const { return path_; }
    void place(std::string path) { path_ = std::move(path); }

    void write() const {
        if (path_.empty()) {
            return;
        }
        json doc = doc_;
        doc["started_at"] = started_;
        doc["finished_at"] = utc_timestamp();
        std::ofstream f(path_);
        if (!f) {
            throw DataError("cannot write manifest " + path_);
        }
        f << doc.dump(2) << '\n';
    }

private:
    json doc_;
    std::string started_;
    std::string path_;
};

inline void place_manifest(Manifest& manifest, const std::string& explicit_path, const std::string& out_path) {
    if (!explicit_path.empty()) {
        manifest.place(explicit_path);
    } else if (!out_path.empty()) {
        manifest.place(out_path + ".manifest.json");
    }
}

// Name of the manifest as recorded inside an output file.
inline std::string manifest_label(const Manifest& manifest, const std::string& explicit_path) {
    if (manifest.reference().empty()) {
        return {};
    }
    return explicit_path.empty() ? std::filesystem::path(manifest.reference()).filename().string() : explicit_path;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw DataError("cannot open " + path + " for writing");
    }
    return f;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw DataError("cannot open " + path);
    }
    return f;
}

inline io::LoadedSample load_sample(const std::string& path) {
    auto f = open_input(path);
    try {
        return io::read_graph_sample(f);
    } catch (const ParseError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    for (auto part : io::detail::split(text, ',')) {
        double x = 0.0;
        if (!io::detail::parse_number(part, x)) {
            throw InvalidArgument("invalid grid value '" + std::string(part) + "'");
        }
        out.push_back(x);
    }
    if (out.empty()) {
        throw InvalidArgument("empty grid");
    }
    return out;
}

inline ErgmStatistics parse_stats(const std::string& name) {
    if (name == "triangle" || name == "edge-triangle") {
        return ErgmStatistics::edge_triangle;
    }
    if (name == "two-star" || name == "2star" || name == "edge-2star") {
        return ErgmStatistics::edge_two_star;
    }
    throw InvalidArgument("unknown ERGM statistics '" + name + "' (use triangle or two-star)");
}

inline const char* stats_name(ErgmStatistics s) {
    return s == ErgmStatistics::edge_triangle ? "triangle" : "two-star";
}

// Flags shared by commands that describe one model.
struct ModelFlags {
    std::string kind = "er";
    std::size_t v = 10;
    double p = 0.5;
    double p0 = 0.5;
    double q = 0.25;
    std::string stats = "triangle";
    double theta1 = 0.0;
    double theta2 = 0.0;
};

inline void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--model", f.kind, "er | modified-er | ergm")->check(CLI::IsMember({"er", "modified-er", "ergm"}));
    cmd->add_option("--v", f.v, "vertex count")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    cmd->add_option("--p", f.p, "edge probability (er), modified-pair probability (modified-er)");
    cmd->add_option("--p0", f.p0, "probability of unmodified pairs (modified-er)");
    cmd->add_option("--q", f.q, "fraction of modified pairs (modified-er)");
    cmd->add_option("--stats", f.stats, "ERGM statistics: triangle | two-star");
    cmd->add_option("--theta1", f.theta1, "ERGM edge parameter");
    cmd->add_option("--theta2", f.theta2, "ERGM triangle / two-star parameter");
}

inline void add_mcmc_flags(CLI::App* cmd, McmcConfig& mcmc) {
    cmd->add_option("--burn-in", mcmc.burn_in, "MH burn-in sweeps");
    cmd->add_option("--thinning", mcmc.thinning, "MH sweeps between retained draws")->check(CLI::PositiveNumber);
}

inline ModelSpec make_model(const ModelFlags& f, std::uint64_t pairs_seed) {
    ModelSpec spec;
    spec.v = f.v;
    if (f.kind == "er") {
        spec.model = ErModel{f.p};
    } else if (f.kind == "modified-er") {
        Engine rng = make_engine(pairs_seed);
        spec.model = ModifiedErModel{f.p0, f.p, select_modified_pairs(f.v, f.q, rng)};
    } else {
        spec.model = ErgmModel{parse_stats(f.stats), f.theta1, f.theta2};
    }
    validate(spec);
    return spec;
}

inline void describe_model(Manifest& m, const std::string& prefix, const ModelSpec& spec) {
    m.set(prefix + "v", spec.v);
    if (const auto* er = std::get_if<ErModel>(&spec.model)) {
        m.set(prefix + "model", "er");
        m.set(prefix + "p", er->p);
    } else if (const auto* mod = std::get_if<ModifiedErModel>(&spec.model)) {
        m.set(prefix + "model", "modified-er");
        m.set(prefix + "p0", mod->p0);
        m.set(prefix + "p", mod->p);
        std::vector<std::vector<std::size_t>> pairs;
        for (const auto& pr : mod->modified_pairs) {
            pairs.push_back({pr.i, pr.j});
        }
        m.set(prefix + "modified_pairs", pairs);
    } else {
        const auto& e = std::get<ErgmModel>(spec.model);
        m.set(prefix + "model", "ergm");
        m.set(prefix + "stats", stats_name(e.stats));
        m.set(prefix + "theta1", e.theta1);
        m.set(prefix + "theta2", e.theta2);
    }
}

inline std::vector<std::string> model_comments(const ModelSpec& spec) {
    std::vector<std::string> out;
    std::ostringstream line;
    if (const auto* er = std::get_if<ErModel>(&spec.model)) {
        line << "model er p=" << format_number(er->p);
    } else if (const auto* mod = std::get_if<ModifiedErModel>(&spec.model)) {
        line << "model modified-er p0=" << format_number(mod->p0) << " p=" << format_number(mod->p)
             << " modified_pairs=" << mod->modified_pairs.size();
        out.push_back(line.str());
        line.str({});
        line << "modified:";
        for (const auto& pr : mod->modified_pairs) {
            line << ' ' << pr.i << '-' << pr.j;
        }
    } else {
        const auto& e = std::get<ErgmModel>(spec.model);
        line << "model ergm stats=" << stats_name(e.stats) << " theta1=" << format_number(e.theta1)
             << " theta2=" << format_number(e.theta2);
    }
    out.push_back(line.str());
    return out;
}

} // namespace detail

// Runs one command line (without the program name). Human-readable text goes
// to `out`, diagnostics to `err`; the return value is the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace detail;

    CLI::App app{"Nonparametric tests for distributions of random graphs", "graphdist"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out_path;
    std::string manifest_path;
    auto add_common = [&](CLI::App* cmd, bool randomized) {
        if (randomized) {
            cmd->add_option("--seed", seed, "master seed");
            cmd->add_option("--threads", threads, "worker threads (results do not depend on it)")
                ->check(CLI::Range(1u, 1024u));
        }
        cmd->add_option("--manifest", manifest_path, "manifest path (default <out>.manifest.json)");
    };

    // sample ---------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "draw a graph sample from a model");
    ModelFlags sample_model_flags;
    McmcConfig sample_mcmc;
    std::size_t sample_n = 20;
    int sample_base = 0;
    add_model_flags(sample_cmd, sample_model_flags);
    add_mcmc_flags(sample_cmd, sample_mcmc);
    sample_cmd->add_option("--n", sample_n, "sample size")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--base", sample_base, "vertex index base in the output (0 or 1)")
        ->check(CLI::IsMember({0, 1}));
    sample_cmd->add_option("--out", out_path, "output graph-sample file")->required();
    add_common(sample_cmd, true);

    // test -------------------------------------------------------------------
    auto* test_cmd = app.add_subcommand("test", "one-sample W test against a null model, or two-sample permutation test");
    std::string test_sample;
    std::string test_sample2;
    std::string test_null;
    ModelFlags test_null_flags;
    McmcConfig test_mcmc;
    std::string test_marginals;
    double test_alpha = 0.05;
    std::size_t test_reps = 10000;
    std::size_t test_perms = 1000;
    bool test_strict = false;
    bool test_add_one = false;
    test_cmd->add_option("--sample", test_sample, "graph-sample file")->required();
    test_cmd->add_option("--sample2", test_sample2, "second graph-sample file (two-sample test)");
    test_cmd->add_option("--null", test_null, "null model: er | modified-er | ergm (one-sample test)")
        ->check(CLI::IsMember({"er", "modified-er", "ergm"}));
    test_cmd->add_option("--p", test_null_flags.p, "null ER probability / modified-pair probability");
    test_cmd->add_option("--p0", test_null_flags.p0, "null modified-er base probability");
    test_cmd->add_option("--q", test_null_flags.q, "null modified-er fraction");
    test_cmd->add_option("--stats", test_null_flags.stats, "null ERGM statistics");
    test_cmd->add_option("--theta1", test_null_flags.theta1, "null ERGM edge parameter");
    test_cmd->add_option("--theta2", test_null_flags.theta2, "null ERGM second parameter");
    test_cmd->add_option("--null-marginals", test_marginals, "CSV i,j,value with the null edge marginals");
    test_cmd->add_option("--alpha", test_alpha, "significance level");
    test_cmd->add_option("--replications", test_reps, "Monte Carlo replications for the null quantile");
    test_cmd->add_option("--permutations", test_perms, "permutations for the two-sample test");
    test_cmd->add_flag("--strict-ties", test_strict, "count only permutation statistics strictly above the observed");
    test_cmd->add_flag("--add-one", test_add_one, "report (1 + count) / (1 + R)");
    add_mcmc_flags(test_cmd, test_mcmc);
    test_cmd->add_option("--out", out_path, "result CSV");
    add_common(test_cmd, true);

    // power ------------------------------------------------------------------
    auto* power_cmd = app.add_subcommand("power", "power curve of the one-sample W test over a parameter grid");
    std::string power_null = "er";
    double power_null_p = 0.5;
    std::string power_null_stats = "triangle";
    double power_null_theta1 = -1.0;
    double power_null_theta2 = 0.0;
    std::string power_alt = "er";
    std::string power_alt_stats;
    std::optional<double> power_alt_theta1;
    double power_q = 1.0;
    double power_p0 = 0.5;
    std::string power_grid = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    std::size_t power_v = 10;
    std::size_t power_n = 20;
    std::size_t power_m = 2000;
    double power_alpha = 0.05;
    std::size_t power_qreps = 10000;
    std::string power_baseline = "none";
    std::string power_marginals;
    McmcConfig power_mcmc;
    power_cmd->add_option("--null", power_null, "null model: er | ergm")->check(CLI::IsMember({"er", "ergm"}));
    power_cmd->add_option("--null-p", power_null_p, "null ER probability");
    power_cmd->add_option("--null-stats", power_null_stats, "null ERGM statistics");
    power_cmd->add_option("--null-theta1", power_null_theta1, "null ERGM edge parameter");
    power_cmd->add_option("--null-theta2", power_null_theta2, "null ERGM second parameter");
    power_cmd->add_option("--null-marginals", power_marginals, "CSV i,j,value with the null edge marginals");
    power_cmd->add_option("--alt", power_alt, "alternative family: er | modified-er | ergm")
        ->check(CLI::IsMember({"er", "modified-er", "ergm"}));
    power_cmd->add_option("--grid", power_grid, "comma-separated parameter values (p, or theta2 for ergm)");
    power_cmd->add_option("--q", power_q, "fraction of modified pairs (modified-er)");
    power_cmd->add_option("--p0", power_p0, "probability of unmodified pairs (modified-er)");
    power_cmd->add_option("--alt-stats", power_alt_stats, "alternative ERGM statistics (default: null's)");
    power_cmd->add_option("--alt-theta1", power_alt_theta1, "alternative ERGM edge parameter (default: null's)");
    power_cmd->add_option("--v", power_v, "vertex count")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    power_cmd->add_option("--n", power_n, "sample size")->check(CLI::PositiveNumber);
    power_cmd->add_option("--M", power_m, "replications per grid point");
    power_cmd->add_option("--alpha", power_alpha, "significance level");
    power_cmd->add_option("--quantile-reps", power_qreps, "Monte Carlo replications for the null quantile");
    power_cmd->add_option("--baseline", power_baseline, "none | bonferroni")
        ->check(CLI::IsMember({"none", "bonferroni"}));
    add_mcmc_flags(power_cmd, power_mcmc);
    power_cmd->add_option("--out", out_path, "output CSV")->required();
    add_common(power_cmd, true);

    // density-sweep ------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("density-sweep", "mean ERGM edge density over a theta2 grid");
    std::string sweep_stats = "triangle";
    double sweep_theta1 = -1.0;
    std::string sweep_grid = "-0.5,-0.25,0,0.25,0.5,0.75,1";
    std::size_t sweep_v = 8;
    std::size_t sweep_n = 1000;
    McmcConfig sweep_mcmc;
    sweep_cmd->add_option("--stats", sweep_stats, "triangle | two-star");
    sweep_cmd->add_option("--theta1", sweep_theta1, "edge parameter");
    sweep_cmd->add_option("--grid", sweep_grid, "comma-separated theta2 values");
    sweep_cmd->add_option("--v", sweep_v, "vertex count")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    sweep_cmd->add_option("--n", sweep_n, "retained draws per grid point")->check(CLI::PositiveNumber);
    add_mcmc_flags(sweep_cmd, sweep_mcmc);
    sweep_cmd->add_option("--out", out_path, "output CSV")->required();
    add_common(sweep_cmd, true);

    // build-graphs -------------------------------------------------------------
    auto* build_cmd = app.add_subcommand("build-graphs", "graph sample from a multichannel time-series CSV");
    std::string build_input;
    double build_rate = 0.0;
    WindowSpec build_window;
    ThresholdSpec build_threshold;
    int build_base = 0;
    std::string build_diagnostics;
    build_cmd->add_option("--input", build_input, "time-series CSV (labels row, then one row per sample)")
        ->required();
    build_cmd->add_option("--sampling-rate", build_rate, "samples per second")->required();
    build_cmd->add_option("--width-ms", build_window.width_ms, "window width in milliseconds");
    build_cmd->add_option("--step-ms", build_window.step_ms, "window step in milliseconds");
    build_cmd->add_option("--c", build_threshold.c, "threshold constant in (0,1)");
    build_cmd->add_option("--base", build_base, "vertex index base in the output")->check(CLI::IsMember({0, 1}));
    build_cmd->add_option("--diagnostics", build_diagnostics, "write diagnostics JSON here");
    build_cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    build_cmd->add_option("--out", out_path, "output graph-sample file")->required();
    add_common(build_cmd, false);

    // summary ------------------------------------------------------------------
    auto* summary_cmd = app.add_subcommand("summary", "the k most frequent edges of a sample");
    std::string summary_sample;
    std::size_t summary_k = 30;
    summary_cmd->add_option("--sample", summary_sample, "graph-sample file")->required();
    summary_cmd->add_option("--k", summary_k, "number of edges");
    summary_cmd->add_option("--out", out_path, "output CSV")->required();
    add_common(summary_cmd, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream eo;
        const int code = app.exit(e, o, eo);
        out << o.str();
        err << eo.str();
        return code == 0 ? exit_ok : exit_usage;
    }

    Manifest manifest(app.get_subcommands().front()->get_name(), args);
    try {
        // sample ---------------------------------------------------------------
        if (sample_cmd->parsed()) {
            const ModelSpec spec = make_model(sample_model_flags, derive_seed(seed, 1));
            place_manifest(manifest, manifest_path, out_path);
            describe_model(manifest, "", spec);
            manifest.seed(seed);
            manifest.set("n", sample_n);
            manifest.set("burn_in", sample_mcmc.burn_in);
            manifest.set("thinning", sample_mcmc.thinning);

            Engine rng = stream_engine(seed, 0);
            const auto sample = sample_model(spec, sample_n, rng, sample_mcmc);

            auto comments = model_comments(spec);
            comments.insert(comments.begin(), std::string("graphdist ") + version + " sample seed=" + std::to_string(seed));
            if (const auto label = manifest_label(manifest, manifest_path); !label.empty()) {
                comments.push_back("manifest: " + label);
            }
            auto f = open_output(out_path);
            io::write_graph_sample(f, sample, sample_base, comments);
            manifest.output(out_path);
            manifest.write();
            out << "wrote " << sample.size() << " graphs on " << spec.v << " vertices to " << out_path << '\n';
            return exit_ok;
        }

        // test -----------------------------------------------------------------
        if (test_cmd->parsed()) {
            const auto first = load_sample(test_sample);
            place_manifest(manifest, manifest_path, out_path);
            manifest.seed(seed);
            manifest.set("alpha", test_alpha);
            manifest.set("sample", test_sample);

            TestResult result;
            std::string kind;
            std::optional<std::size_t> m;
            if (!test_sample2.empty()) {
                if (!test_null.empty()) {
                    throw InvalidArgument("--null and --sample2 are mutually exclusive");
                }
                const auto second = load_sample(test_sample2);
                PermutationOptions opts;
                opts.permutations = test_perms;
                opts.seed = seed;
                opts.threads = threads;
                opts.alpha = test_alpha;
                opts.ties = test_strict ? TieRule::strict : TieRule::inclusive;
                opts.add_one = test_add_one;
                manifest.set("sample2", test_sample2);
                manifest.set("permutations", test_perms);
                manifest.set("ties", test_strict ? "strict" : "inclusive");
                manifest.set("add_one", test_add_one);
                result = two_sample_permutation_test(first.sample, second.sample, opts);
                kind = "two-sample";
                m = second.sample.size();
            } else {
                if (test_null.empty()) {
                    throw InvalidArgument("one-sample test needs --null (or use --sample2)");
                }
                ModelFlags nf = test_null_flags;
                nf.kind = test_null;
                nf.v = first.sample.vertex_count();
                const ModelSpec null = make_model(nf, derive_seed(seed, 1));
                std::optional<EdgeMarginals> marginals;
                if (!test_marginals.empty()) {
                    auto f = open_input(test_marginals);
                    marginals = io::read_marginals(f, null.v, first.base);
                    manifest.set("null_marginals", test_marginals);
                }
                MonteCarloOptions opts;
                opts.replications = test_reps;
                opts.seed = seed;
                opts.threads = threads;
                opts.mcmc = test_mcmc;
                describe_model(manifest, "null_", null);
                manifest.set("replications", test_reps);
                result = one_sample_test(first.sample, null, test_alpha, opts, marginals);
                kind = "one-sample";
            }

            out << kind << " W test: n=" << first.sample.size();
            if (m) {
                out << " m=" << *m;
            }
            out << " v=" << first.sample.vertex_count() << '\n';
            out << "  W = " << format_number(result.statistic.value) << '\n';
            if (result.critical_value) {
                out << "  critical value (alpha=" << format_number(result.alpha) << ", R=" << result.replications
                    << ") = " << format_number(*result.critical_value) << '\n';
            }
            if (result.p_value) {
                out << "  p-value (R=" << result.replications << ") = " << format_number(*result.p_value) << '\n';
            }
            out << "  decision: " << (result.reject ? "reject H0" : "do not reject H0") << '\n';

            if (!out_path.empty()) {
                auto f = open_output(out_path);
                f << "kind,n,m,statistic,alpha,critical_value,p_value,reject,replications,seed,marginals_source\n";
                f << kind << ',' << first.sample.size() << ',' << (m ? std::to_string(*m) : "") << ','
                  << format_number(result.statistic.value) << ',' << format_number(result.alpha) << ','
                  << (result.critical_value ? format_number(*result.critical_value) : "") << ','
                  << (result.p_value ? format_number(*result.p_value) : "") << ',' << (result.reject ? 1 : 0) << ','
                  << result.replications << ',' << result.seed << ',' << result.marginals_source << '\n';
                if (const auto label = manifest_label(manifest, manifest_path); !label.empty()) {
                    f << "# manifest: " << label << '\n';
                }
                manifest.output(out_path);
            }
            manifest.write();
            return exit_ok;
        }

        // power ----------------------------------------------------------------
        if (power_cmd->parsed()) {
            place_manifest(manifest, manifest_path, out_path);
            ModelSpec null;
            null.v = power_v;
            if (power_null == "er") {
                null.model = ErModel{power_null_p};
            } else {
                null.model = ErgmModel{parse_stats(power_null_stats), power_null_theta1, power_null_theta2};
            }
            validate(null);

            const auto grid = parse_grid(power_grid);
            std::vector<VertexPair> modified;
            if (power_alt == "modified-er") {
                Engine pair_rng = stream_engine(seed, 1);
                modified = select_modified_pairs(power_v, power_q, pair_rng);
            }
            std::vector<Alternative> alternatives;
            for (double x : grid) {
                ModelSpec alt;
                alt.v = power_v;
                if (power_alt == "er") {
                    alt.model = ErModel{x};
                } else if (power_alt == "modified-er") {
                    alt.model = ModifiedErModel{power_p0, x, modified};
                } else {
                    const auto* null_ergm = std::get_if<ErgmModel>(&null.model);
                    const auto stats = !power_alt_stats.empty() ? parse_stats(power_alt_stats)
                                       : null_ergm != nullptr   ? null_ergm->stats
                                                                : ErgmStatistics::edge_triangle;
                    const double t1 = power_alt_theta1 ? *power_alt_theta1
                                      : null_ergm != nullptr ? null_ergm->theta1
                                                             : -1.0;
                    alt.model = ErgmModel{stats, t1, x};
                }
                validate(alt);
                alternatives.push_back({x, alt});
            }

            PowerOptions opts;
            opts.replications = power_m;
            opts.alpha = power_alpha;
            opts.quantile_replications = power_qreps;
            opts.seed = derive_seed(seed, 2);
            opts.threads = threads;
            opts.mcmc = power_mcmc;
            opts.bonferroni = power_baseline == "bonferroni";
            if (!power_marginals.empty()) {
                auto f = open_input(power_marginals);
                opts.null_marginals = io::read_marginals(f, power_v);
                manifest.set("null_marginals", power_marginals);
            }
            describe_model(manifest, "null_", null);
            manifest.seed(seed);
            manifest.set("alternative", power_alt);
            manifest.set("grid", grid);
            manifest.set("n", power_n);
            manifest.set("M", power_m);
            manifest.set("alpha", power_alpha);
            manifest.set("quantile_replications", power_qreps);
            manifest.set("baseline", power_baseline);
            if (!modified.empty()) {
                std::vector<std::vector<std::size_t>> pairs;
                for (const auto& pr : modified) {
                    pairs.push_back({pr.i, pr.j});
                }
                manifest.set("modified_pairs", pairs);
            }

            const auto points = power_curve(null, alternatives, power_n, opts);

            auto f = open_output(out_path);
            f << "param,power_w,power_bc,replications\n";
            out << "param  power_w" << (opts.bonferroni ? "  power_bc" : "") << '\n';
            for (const auto& pt : points) {
                f << format_number(pt.parameter) << ',' << format_number(pt.power) << ','
                  << (pt.power_bc ? format_number(*pt.power_bc) : "") << ',' << pt.replications << '\n';
                out << format_number(pt.parameter) << "  " << format_number(pt.power);
                if (pt.power_bc) {
                    out << "  " << format_number(*pt.power_bc);
                }
                out << '\n';
            }
            if (const auto label = manifest_label(manifest, manifest_path); !label.empty()) {
                f << "# manifest: " << label << '\n';
            }
            manifest.output(out_path);
            manifest.write();
            return exit_ok;
        }

        // density-sweep ----------------------------------------------------------
        if (sweep_cmd->parsed()) {
            place_manifest(manifest, manifest_path, out_path);
            const auto stats = parse_stats(sweep_stats);
            const auto values = parse_grid(sweep_grid);
            std::vector<std::pair<double, double>> grid;
            for (double x : values) {
                grid.emplace_back(sweep_theta1, x);
            }
            manifest.seed(seed);
            manifest.set("stats", stats_name(stats));
            manifest.set("theta1", sweep_theta1);
            manifest.set("grid", values);
            manifest.set("v", sweep_v);
            manifest.set("n", sweep_n);
            manifest.set("burn_in", sweep_mcmc.burn_in);
            manifest.set("thinning", sweep_mcmc.thinning);

            const auto points = edge_density_sweep(stats, grid, sweep_v, sweep_n, sweep_mcmc, seed, threads);
            auto f = open_output(out_path);
            f << "theta1,theta2,density,exact_density,degenerate\n";
            out << "theta2  density\n";
            for (const auto& pt : points) {
                f << format_number(pt.theta1) << ',' << format_number(pt.theta2) << ',' << format_number(pt.density)
                  << ',' << (pt.exact_density ? format_number(*pt.exact_density) : "") << ','
                  << (pt.degenerate ? 1 : 0) << '\n';
                out << format_number(pt.theta2) << "  " << format_number(pt.density) << '\n';
                if (pt.degenerate) {
                    err << "warning: near-degenerate density " << format_number(pt.density)
                        << " at theta2=" << format_number(pt.theta2) << '\n';
                }
            }
            if (const auto label = manifest_label(manifest, manifest_path); !label.empty()) {
                f << "# manifest: " << label << '\n';
            }
            manifest.output(out_path);
            manifest.write();
            return exit_ok;
        }

        // build-graphs -------------------------------------------------------------
        if (build_cmd->parsed()) {
            if (!(build_rate > 0.0)) {
                throw InvalidArgument("--sampling-rate must be positive");
            }
            place_manifest(manifest, manifest_path, out_path);
            ChannelMatrix matrix;
            {
                auto f = open_input(build_input);
                try {
                    matrix = io::read_channel_matrix(f, build_rate);
                } catch (const ParseError& e) {
                    throw DataError(build_input + ": " + e.what());
                }
            }
            const auto series = correlation_series(matrix, build_window, threads);
            const auto sample = build_graphs(series, build_threshold);
            manifest.set("input", build_input);
            manifest.set("sampling_rate", build_rate);
            manifest.set("width_ms", build_window.width_ms);
            manifest.set("step_ms", build_window.step_ms);
            manifest.set("c", build_threshold.c);

            std::vector<std::string> comments{std::string("graphdist ") + version + " build-graphs",
                                              "windows=" + std::to_string(series.windows.size()) +
                                                  " undefined_correlations=" + std::to_string(series.undefined_windows)};
            std::string labels = "channels:";
            for (const auto& l : matrix.labels) {
                labels += ' ' + l;
            }
            comments.push_back(labels);
            if (const auto label = manifest_label(manifest, manifest_path); !label.empty()) {
                comments.push_back("manifest: " + label);
            }
            auto f = open_output(out_path);
            io::write_graph_sample(f, sample, build_base, comments);
            manifest.output(out_path);

            if (!build_diagnostics.empty()) {
                json diag;
                diag["channels"] = matrix.labels;
                diag["samples"] = matrix.length();
                diag["windows"] = series.windows.size();
                diag["undefined_correlations"] = series.undefined_windows;
                auto d = open_output(build_diagnostics);
                d << diag.dump(2) << '\n';
                manifest.output(build_diagnostics);
            }
            manifest.write();
            out << "built " << sample.size() << " graphs on " << matrix.channel_count() << " channels ("
                << series.undefined_windows << " undefined correlations set to 0)\n";
            return exit_ok;
        }

        // summary ------------------------------------------------------------------
        if (summary_cmd->parsed()) {
            place_manifest(manifest, manifest_path, out_path);
            const auto loaded = load_sample(summary_sample);
            const auto summary = summary_graph(loaded.sample, summary_k);
            manifest.set("sample", summary_sample);
            manifest.set("k", summary_k);
            auto f = open_output(out_path);
            f << "i,j,frequency\n";
            for (const auto& e : summary.edges) {
                f << e.pair.i + loaded.base << ',' << e.pair.j + loaded.base << ',' << format_number(e.frequency)
                  << '\n';
            }
            if (const auto label = manifest_label(manifest, manifest_path); !label.empty()) {
                f << "# manifest: " << label << '\n';
            }
            manifest.output(out_path);
            manifest.write();
            out << "top " << summary.edges.size() << " edges of " << loaded.sample.size() << " graphs written to "
                << out_path << '\n';
            return exit_ok;
        }
    } catch (const RefusedError& e) {
        err << "refused: " << e.what() << '\n';
        return exit_refused;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return exit_data;
    } catch (const nlohmann::json::exception& e) {
        err << "data error: " << e.what() << '\n';
        return exit_data;
    }
    return exit_usage;
}

} // namespace graphdist::cli
