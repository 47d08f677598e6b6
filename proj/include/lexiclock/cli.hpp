#pragma once

// Command-line front end. run() is the whole program minus main(), so tests
// can drive it in-process.
//
//   curves    relative dating errors on a time grid
//   simulate  one simulated list pair, or a synthetic multi-variety dataset
//   validate  Monte Carlo moments against the closed forms
//   date      separation time from statistics or from word lists
//   estimate  effective N, L (and lambda, mu at one threshold g)
//   sweep     lambda(g), mu_hat(g) over a grid of g
//
// Exit codes: 0 success, 1 data or domain error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "analytics.hpp"
#include "dataio.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "simulator.hpp"
#include "synthetic.hpp"

namespace lexiclock::cli {

namespace detail {

struct Common {
    std::string config_path;
    std::string output;
    std::string format = "csv";
    unsigned threads = 0;
    std::uint64_t seed = 1;
    double lambda = 0, mu = 0, n_eff = 0, l_eff = 0, theta = 0;
    int m = 0;
    CLI::Option* o_lambda = nullptr;
    CLI::Option* o_mu = nullptr;
    CLI::Option* o_n_eff = nullptr;
    CLI::Option* o_l_eff = nullptr;
    CLI::Option* o_m = nullptr;
    CLI::Option* o_theta = nullptr;
    CLI::Option* o_config = nullptr;

    // defaults < config file (--config, else $LEXICLOCK_CONFIG) < flags
    RunConfig resolve() const {
        RunConfig c;
        std::string path = config_path;
        if (path.empty()) {
            if (const char* env = std::getenv("LEXICLOCK_CONFIG"); env && *env) path = env;
        }
        if (!path.empty()) c = load_config(path);
        if (o_lambda->count()) c.params.lambda = lambda;
        if (o_mu->count()) c.params.mu = mu;
        if (o_n_eff->count()) c.params.n_eff = n_eff;
        if (o_l_eff->count()) c.params.l_eff = l_eff;
        if (o_m->count()) c.params.m = m;
        if (o_theta->count()) c.theta = theta;
        c.params.validate();
        if (!(c.theta >= 0.0 && c.theta <= 1.0)) throw invalid_argument("theta must lie in [0, 1]");
        return c;
    }

    unsigned worker_count() const { return threads == 0 ? default_threads() : threads; }

    TableFormat table_format() const { return format == "json" ? TableFormat::json : TableFormat::csv; }

    // Writes to -o when given, else to `out`.
    void emit(const std::string& text, std::ostream& out) const {
        if (output.empty() || output == "-") out << text;
        else write_text_file(output, text);
    }

    void emit(const Table& t, std::ostream& out) const {
        std::ostringstream os;
        write_table(t, os, table_format());
        emit(os.str(), out);
    }
};

inline std::string fmt(double v) { return format_double(v); }

inline Table dating_table(const std::vector<std::pair<Statistic, double>>& inputs, const EvolutionParams& p,
                          std::ostream& err, bool& failed) {
    Table t{{"method", "value", "t_hat", "t_lower", "t_upper"}, {}};
    for (const auto& [s, value] : inputs) {
        try {
            const auto r = date_from_statistic(value, p, s);
            t.rows.push_back({std::string(to_string(s)), value, r.t_hat, r.t_lower, r.t_upper});
        } catch (const error& e) {
            failed = true;
            err << "lexiclock: " << to_string(s) << ": " << e.what() << '\n';
            t.rows.push_back({std::string(to_string(s)), value, std::string("NA"), std::string("NA"),
                              std::string("NA")});
        }
    }
    return t;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"lexiclock: stochastic lexicon evolution, dating errors and rate estimation"};
    app.require_subcommand(1);
    app.fallthrough();

    detail::Common c;
    c.o_config = app.add_option("--config", c.config_path, "JSON parameter file (default $LEXICLOCK_CONFIG)");
    app.add_option("-o,--output", c.output, "output file (default stdout)");
    app.add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", c.threads, "worker threads (0 = all cores)");
    app.add_option("--seed", c.seed, "master random seed");
    c.o_lambda = app.add_option("--lambda", c.lambda, "word replacement rate per year")->check(CLI::NonNegativeNumber);
    c.o_mu = app.add_option("--mu", c.mu, "character redraw rate per year")->check(CLI::NonNegativeNumber);
    c.o_n_eff = app.add_option("--n-eff", c.n_eff, "effective alphabet size")->check(CLI::Range(1.0, 1e12));
    c.o_l_eff = app.add_option("--l-eff", c.l_eff, "effective word length")->check(CLI::Range(1.0, 1e12));
    c.o_m = app.add_option("--m", c.m, "concepts per list")->check(CLI::PositiveNumber);
    c.o_theta = app.add_option("--theta", c.theta, "cognacy threshold on normalized Levenshtein distance")
                    ->check(CLI::Range(0.0, 1.0));

    // curves
    auto* curves = app.add_subcommand("curves", "relative dating errors R_omega, R_phi, R_varphi");
    double t_min = 300, t_max = 6000, t_step = 100;
    curves->add_option("--t-min", t_min)->check(CLI::PositiveNumber);
    curves->add_option("--t-max", t_max)->check(CLI::PositiveNumber);
    curves->add_option("--step", t_step)->check(CLI::PositiveNumber);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "simulate a list pair or a multi-variety dataset");
    double sim_t = 1000;
    int n_sym = 5, l_word = 8;
    std::string sampler = "events";
    std::size_t varieties = 0, clades = 2;
    std::string meta_out;
    simulate->add_option("--t", sim_t, "years since the split")->check(CLI::NonNegativeNumber);
    simulate->add_option("--n-sym", n_sym, "alphabet size")->check(CLI::Range(2, 256));
    simulate->add_option("--l-word", l_word, "word length")->check(CLI::PositiveNumber);
    simulate->add_option("--sampler", sampler)->check(CLI::IsMember({"events", "endpoint"}));
    simulate->add_option("--varieties", varieties, "write a dataset of this many varieties (star from one root)");
    simulate->add_option("--clades", clades, "clades for --varieties")->check(CLI::PositiveNumber);
    simulate->add_option("--meta-out", meta_out, "metadata CSV path for --varieties");

    // validate
    auto* validate = app.add_subcommand("validate", "Monte Carlo check of the closed-form moments");
    std::size_t replicates = 10000;
    std::string v_sampler = "endpoint";
    double v_t = 1000;
    int v_n_sym = 5, v_l_word = 8;
    validate->add_option("--replicates", replicates)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    validate->add_option("--t", v_t)->check(CLI::NonNegativeNumber);
    validate->add_option("--n-sym", v_n_sym)->check(CLI::Range(2, 256));
    validate->add_option("--l-word", v_l_word)->check(CLI::PositiveNumber);
    validate->add_option("--sampler", v_sampler)->check(CLI::IsMember({"events", "endpoint"}));

    // date
    auto* date = app.add_subcommand("date", "separation time from a statistic or from two word lists");
    std::optional<double> d_omega, d_phi, d_varphi, d_ancestor;
    std::string lists_path, meta_path, var_a, var_b, list_a, list_b;
    date->add_option("--omega", d_omega, "observed cognate overlap");
    date->add_option("--phi", d_phi, "observed blind statistic");
    date->add_option("--varphi", d_varphi, "observed cognate-restricted statistic");
    date->add_option("--ancestor", d_ancestor, "observed survival fraction vs a known ancestor");
    date->add_option("--lists", lists_path, "dataset word lists (TSV)");
    date->add_option("--meta", meta_path, "dataset metadata (CSV)");
    date->add_option("--a", var_a, "first variety id");
    date->add_option("--b", var_b, "second variety id");
    date->add_option("--list-a", list_a, "first single-variety list (TSV concept, word)");
    date->add_option("--list-b", list_b, "second single-variety list");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "effective N, L and rates lambda, mu");
    std::optional<double> t_root;
    double g = 0;
    std::size_t min_pairs = 10;
    estimate->add_option("--lists", lists_path)->required();
    estimate->add_option("--meta", meta_path)->required();
    estimate->add_option("--t-root", t_root, "years since the common root (enables lambda, mu)");
    estimate->add_option("--g", g, "minimum distance in km between paired varieties")->check(CLI::NonNegativeNumber);
    estimate->add_option("--min-pairs", min_pairs)->check(CLI::PositiveNumber);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "lambda(g) and mu_hat(g) over a distance grid");
    double g_min = 0, g_max = 1500, g_step = 100, sweep_root = 0;
    sweep->add_option("--lists", lists_path)->required();
    sweep->add_option("--meta", meta_path)->required();
    sweep->add_option("--t-root", sweep_root)->required()->check(CLI::PositiveNumber);
    sweep->add_option("--g-min", g_min)->check(CLI::NonNegativeNumber);
    sweep->add_option("--g-max", g_max)->check(CLI::NonNegativeNumber);
    sweep->add_option("--g-step", g_step)->check(CLI::PositiveNumber);
    sweep->add_option("--min-pairs", min_pairs)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        const RunConfig cfg = c.resolve();
        const EvolutionParams& p = cfg.params;

        if (curves->parsed()) {
            if (t_max < t_min) throw invalid_argument("--t-max must be >= --t-min");
            c.emit(to_table(error_curves(p, t_min, t_max, t_step)), out);
            return 0;
        }

        if (simulate->parsed()) {
            SimParams sp{p.lambda, p.mu, n_sym, l_word, p.m, sim_t, c.seed};
            if (varieties > 0) {
                if (c.output.empty() || meta_out.empty())
                    throw invalid_argument("--varieties needs -o (word lists) and --meta-out (metadata)");
                const auto ds = synthetic_dataset(sp, {varieties, clades});
                std::ostringstream lists, meta;
                write_dataset(ds, lists, meta);
                write_text_file(c.output, lists.str());
                write_text_file(meta_out, meta.str());
                return 0;
            }
            const auto s = sampler == "endpoint" ? evolve_pair_endpoint(sp) : evolve_pair_events(sp);
            std::ostringstream os;
            os << "concept\tword_a\tword_b\tlineage_a\tlineage_b\tcognate\n";
            for (std::size_t i = 0; i < s.cognacy.size(); ++i)
                os << "c" << i + 1 << '\t' << utf8_encode(word_text(s.list_a[i])) << '\t'
                   << utf8_encode(word_text(s.list_b[i])) << '\t' << s.list_a[i].lineage_tag << '\t'
                   << s.list_b[i].lineage_tag << '\t' << (s.cognacy[i] ? 1 : 0) << '\n';
            c.emit(os.str(), out);
            return 0;
        }

        if (validate->parsed()) {
            SimParams sp{p.lambda, p.mu, v_n_sym, v_l_word, p.m, v_t, c.seed};
            const bool endpoint = v_sampler == "endpoint";
            const auto mc = monte_carlo(sp, replicates, endpoint, c.worker_count());
            EvolutionParams ap = p;
            ap.n_eff = v_n_sym;
            ap.l_eff = v_l_word;

            Table t{{"stat", "analytic_mean", "sample_mean", "z_mean", "analytic_var", "sample_var",
                     "var_rel_diff"},
                    {}};
            auto row = [&](const char* name, const MomentPair& a, const StatMoments& s) {
                const double z = s.se > 0 ? (s.mean - a.mean) / s.se : 0.0;
                const Cell rel = a.variance > 0 ? Cell{(s.variance - a.variance) / a.variance} : Cell{std::string("NA")};
                t.rows.push_back({std::string(name), a.mean, s.mean, z, a.variance, s.variance, rel});
            };
            row("omega", moments_omega(ap, v_t), mc.omega);
            row("phi", moments_phi(ap, v_t), mc.phi);
            row("varphi", moments_varphi(ap, v_t), mc.varphi);
            row("chi", moments_chi(ap, v_t), mc.chi);

            std::ostringstream os;
            write_csv(t, os);
            os << "# additivity residual Var[phi]-Var[varphi]-Var[chi] = " << detail::fmt(mc.additivity_residual)
               << " (se " << detail::fmt(mc.additivity_se) << ")\n";
            out << os.str();
            if (!c.output.empty()) {
                auto j = monte_carlo_json(sp, mc, endpoint);
                for (const char* name : {"omega", "phi", "varphi", "chi"}) {
                    const auto a = name == std::string("omega")   ? moments_omega(ap, v_t)
                                   : name == std::string("phi")   ? moments_phi(ap, v_t)
                                   : name == std::string("varphi") ? moments_varphi(ap, v_t)
                                                                   : moments_chi(ap, v_t);
                    j["stats"][name]["analytic_mean"] = a.mean;
                    j["stats"][name]["analytic_var"] = a.variance;
                }
                write_text_file(c.output, j.dump(2) + "\n");
            }
            return 0;
        }

        if (date->parsed()) {
            std::vector<std::pair<Statistic, double>> inputs;
            const bool direct = d_omega || d_phi || d_varphi || d_ancestor;
            const bool from_dataset = !lists_path.empty() || !meta_path.empty();
            const bool from_lists = !list_a.empty() || !list_b.empty();
            if (direct + from_dataset + from_lists != 1)
                throw CLI::ValidationError("date", "give statistic values, or --lists/--meta/--a/--b, or --list-a/--list-b");
            if (direct) {
                if (d_omega) inputs.emplace_back(Statistic::omega, *d_omega);
                if (d_phi) inputs.emplace_back(Statistic::phi, *d_phi);
                if (d_varphi) inputs.emplace_back(Statistic::varphi, *d_varphi);
                if (d_ancestor) inputs.emplace_back(Statistic::ancestor, *d_ancestor);
            } else {
                std::vector<std::u32string> wa, wb;
                if (from_dataset) {
                    if (lists_path.empty() || meta_path.empty() || var_a.empty() || var_b.empty())
                        throw CLI::ValidationError("date", "--lists, --meta, --a and --b go together");
                    const auto ds = load_dataset({lists_path, meta_path, std::nullopt});
                    wa = ds.words[ds.index_of(var_a)];
                    wb = ds.words[ds.index_of(var_b)];
                } else {
                    if (list_a.empty() || list_b.empty())
                        throw CLI::ValidationError("date", "--list-a and --list-b go together");
                    std::tie(wa, wb) = align_lists(load_word_list(list_a), load_word_list(list_b));
                }
                p.require_alphabet();
                const auto st = pair_statistics(wa, wb, detect_cognates(wa, wb, cfg.theta), p.n_eff);
                inputs = {{Statistic::omega, st.omega}, {Statistic::phi, st.phi}, {Statistic::varphi, st.varphi}};
            }
            bool failed = false;
            c.emit(detail::dating_table(inputs, p, err, failed), out);
            return failed ? 1 : 0;
        }

        if (estimate->parsed()) {
            const auto ds = load_dataset({lists_path, meta_path, std::nullopt});
            const auto dm = cross_concept_distance_moments(ds, c.worker_count());
            const double n = estimate_n(dm);
            const double l = estimate_l(dm, n);
            nlohmann::json j;
            j["inputs"] = {{"lists", lists_path},
                           {"meta", meta_path},
                           {"varieties", ds.variety_count()},
                           {"concepts", ds.concept_count()},
                           {"theta", cfg.theta},
                           {"g", g},
                           {"min_pairs", min_pairs}};
            if (t_root) j["inputs"]["t_root"] = *t_root;
            j["n_eff"] = n;
            j["l_eff"] = l;
            j["cross_concept_pairs"] = dm.pair_count;
            if (t_root) {
                EstimationOptions opt{cfg.theta, min_pairs, c.worker_count()};
                const double lam = estimate_lambda(ds, *t_root, g, opt);
                const auto mu = estimate_mu(ds, *t_root, g, n, lam, opt);
                j["pair_count"] = admissible_pairs(ds, g).count();
                j["lambda"] = lam;
                j["mu"] = mu.mu;
                j["mu_hat"] = mu.mu_hat;
                if (mu.negative) err << "lexiclock: warning: mu < 0; overlap signal inconsistent with lambda(g)\n";
            }
            c.emit(j.dump(2) + "\n", out);
            return 0;
        }

        if (sweep->parsed()) {
            const auto ds = load_dataset({lists_path, meta_path, std::nullopt});
            const double n = c.o_n_eff->count() ? p.n_eff : estimate_n(ds, c.worker_count());
            EstimationOptions opt{cfg.theta, min_pairs, c.worker_count()};
            c.emit(to_table(sweep_g(ds, sweep_root, g_min, g_max, g_step, n, opt)), out);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        err << "lexiclock: " << e.what() << '\n';
        return 2;
    } catch (const error& e) {
        err << "lexiclock: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "lexiclock: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace lexiclock::cli
