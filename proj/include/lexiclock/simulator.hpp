#pragma once

// Stochastic simulation of the two-process model for a pair of daughter
// languages, and a Monte Carlo harness over it.
//
// Each word of each lineage carries two kinds of Poisson clocks: a replacement
// clock (rate lambda) that redraws the whole word uniformly and gives it a
// fresh lineage tag, and one redraw clock per character (rate mu each) that
// resamples that character uniformly over the alphabet, current value
// included.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace lexiclock {

struct SimParams {
    double lambda = 1.4e-4;
    double mu = 1.6e-4;
    int n_sym = 5;
    int l_word = 8;
    int m = 207;
    double t = 1000.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw invalid_argument("lambda must be finite and >= 0");
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw invalid_argument("mu must be finite and >= 0");
        if (n_sym < 2 || n_sym > 256) throw invalid_argument("n_sym must be an integer in [2, 256]");
        if (l_word < 1) throw invalid_argument("l_word must be >= 1");
        if (m < 1) throw invalid_argument("m must be >= 1");
        if (!(t >= 0.0) || !std::isfinite(t)) throw invalid_argument("t must be finite and >= 0");
    }
};

struct SimWord {
    std::vector<std::uint8_t> symbols;
    std::uint64_t lineage_tag = 0;
};

using SimList = std::vector<SimWord>;

struct PairSample {
    SimList list_a;
    SimList list_b;
    std::vector<bool> cognacy;  // true iff lineage tags match
};

// Views a SimList as a list of symbol sequences for the metrics functions.
// The views borrow from `list`.
inline std::vector<std::span<const std::uint8_t>> symbols_of(const SimList& list) {
    std::vector<std::span<const std::uint8_t>> out;
    out.reserve(list.size());
    for (const auto& w : list) out.push_back(w.symbols);
    return out;
}

inline CognacyFlags flags_of(const std::vector<bool>& cognacy) {
    CognacyFlags flags(cognacy.size());
    for (std::size_t i = 0; i < cognacy.size(); ++i)
        flags[i] = cognacy[i] ? Cognacy::cognate : Cognacy::non_cognate;
    return flags;
}

namespace detail {

inline void fill_uniform(std::vector<std::uint8_t>& symbols, int n_sym, Rng& rng) {
    for (auto& s : symbols) s = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(n_sym)));
}

inline SimList random_list(const SimParams& p, Rng& rng) {
    SimList list(static_cast<std::size_t>(p.m));
    for (std::size_t i = 0; i < list.size(); ++i) {
        list[i].symbols.resize(static_cast<std::size_t>(p.l_word));
        fill_uniform(list[i].symbols, p.n_sym, rng);
        list[i].lineage_tag = i;
    }
    return list;
}

// Event-driven evolution of one word for `duration` years. `next_tag` hands
// out fresh lineage tags on replacement.
inline void evolve_word(SimWord& word, double duration, const SimParams& p, Rng& rng,
                        std::uint64_t& next_tag) {
    const double char_rate = p.mu * static_cast<double>(p.l_word);
    const double total = p.lambda + char_rate;
    if (!(total > 0.0)) return;
    double clock = 0.0;
    for (;;) {
        clock += rng.exponential(total);
        if (clock > duration) break;
        if (rng.uniform() * total < p.lambda) {
            fill_uniform(word.symbols, p.n_sym, rng);
            word.lineage_tag = next_tag++;
        } else {
            const auto k = rng.below(static_cast<std::uint64_t>(p.l_word));
            word.symbols[k] = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(p.n_sym)));
        }
    }
}

inline void evolve_list(SimList& list, double duration, const SimParams& p, Rng& rng,
                        std::uint64_t& next_tag) {
    for (auto& w : list) evolve_word(w, duration, p, rng, next_tag);
}

inline std::vector<bool> tags_match(const SimList& a, const SimList& b) {
    std::vector<bool> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].lineage_tag == b[i].lineage_tag;
    return out;
}

}  // namespace detail

// Exact event-driven sampler: uniform ancestor list, two independent
// lineages evolved for p.t years.
inline PairSample evolve_pair_events(const SimParams& p) {
    p.validate();
    Rng rng(p.seed);
    SimList ancestor = detail::random_list(p, rng);
    std::uint64_t next_tag = static_cast<std::uint64_t>(p.m);
    PairSample s{ancestor, ancestor, {}};
    detail::evolve_list(s.list_a, p.t, p, rng, next_tag);
    detail::evolve_list(s.list_b, p.t, p, rng, next_tag);
    s.cognacy = detail::tags_match(s.list_a, s.list_b);
    return s;
}

// Direct draw from the time-t marginals: cognacy ~ Bernoulli(exp(-2 lambda t));
// cognate characters agree with probability ((n-1)/n) exp(-2 mu t) + 1/n,
// non-cognate words are independent uniform.
inline PairSample evolve_pair_endpoint(const SimParams& p) {
    p.validate();
    Rng rng(p.seed);
    const auto n = static_cast<std::uint64_t>(p.n_sym);
    const double nd = static_cast<double>(p.n_sym);
    const double keep = std::exp(-2.0 * p.lambda * p.t);
    const double agree = (nd - 1.0) / nd * std::exp(-2.0 * p.mu * p.t) + 1.0 / nd;
    const auto m = static_cast<std::size_t>(p.m);
    const auto len = static_cast<std::size_t>(p.l_word);

    PairSample s;
    s.list_a.resize(m);
    s.list_b.resize(m);
    s.cognacy.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& a = s.list_a[i];
        auto& b = s.list_b[i];
        a.symbols.resize(len);
        b.symbols.resize(len);
        detail::fill_uniform(a.symbols, p.n_sym, rng);
        const bool cognate = rng.bernoulli(keep);
        s.cognacy[i] = cognate;
        if (cognate) {
            a.lineage_tag = b.lineage_tag = i;
            for (std::size_t k = 0; k < len; ++k) {
                if (rng.bernoulli(agree)) {
                    b.symbols[k] = a.symbols[k];
                } else {
                    const auto shift = 1 + rng.below(n - 1);
                    b.symbols[k] = static_cast<std::uint8_t>((a.symbols[k] + shift) % n);
                }
            }
        } else {
            a.lineage_tag = m + 2 * i;
            b.lineage_tag = m + 2 * i + 1;
            detail::fill_uniform(b.symbols, p.n_sym, rng);
        }
    }
    return s;
}

// `count` varieties evolved independently from one uniform root list for p.t
// years each (star topology). Every pair of varieties has divergence time p.t.
inline std::vector<SimList> evolve_star(const SimParams& p, std::size_t count) {
    p.validate();
    Rng root_rng(derive_seed(p.seed, 0));
    const SimList root = detail::random_list(p, root_rng);
    std::vector<SimList> out(count, root);
    // Disjoint tag ranges per variety keep fresh tags globally unique.
    const std::uint64_t tag_block = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t v = 0; v < count; ++v) {
        Rng rng(derive_seed(p.seed, v + 1));
        std::uint64_t next_tag = static_cast<std::uint64_t>(p.m) + tag_block * v;
        detail::evolve_list(out[v], p.t, p, rng, next_tag);
    }
    return out;
}

struct StatMoments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased (n - 1)
    double se = 0.0;        // standard error of the mean
    std::size_t count = 0;
};

struct SampleMoments {
    StatMoments omega;
    StatMoments phi;
    StatMoments varphi;
    StatMoments chi;
    // Sample Var[phi] - Var[varphi] - Var[chi] (= 2 Cov[varphi, chi]) and its
    // Monte Carlo standard error.
    double additivity_residual = 0.0;
    double additivity_se = 0.0;
    std::size_t replicates = 0;
};

struct ReplicateStats {
    double omega, phi, varphi, chi;
};

inline ReplicateStats replicate_statistics(const PairSample& s, int n_sym) {
    const auto st = pair_statistics(symbols_of(s.list_a), symbols_of(s.list_b), flags_of(s.cognacy),
                                    static_cast<double>(n_sym));
    return {st.omega, st.phi, st.varphi, st.chi};
}

namespace detail {

template <class Get>
StatMoments column_moments(const std::vector<ReplicateStats>& rows, Get get) {
    StatMoments out;
    out.count = rows.size();
    CompensatedSum sum;
    for (const auto& r : rows) sum.add(get(r));
    out.mean = sum.value() / static_cast<double>(rows.size());
    CompensatedSum sq;
    for (const auto& r : rows) {
        const double d = get(r) - out.mean;
        sq.add(d * d);
    }
    out.variance = sq.value() / static_cast<double>(rows.size() - 1);
    out.se = std::sqrt(out.variance / static_cast<double>(rows.size()));
    return out;
}

}  // namespace detail

inline SampleMoments summarize(const std::vector<ReplicateStats>& rows) {
    if (rows.size() < 2) throw invalid_argument("need at least 2 replicates for sample moments");
    SampleMoments out;
    out.replicates = rows.size();
    out.omega = detail::column_moments(rows, [](const ReplicateStats& r) { return r.omega; });
    out.phi = detail::column_moments(rows, [](const ReplicateStats& r) { return r.phi; });
    out.varphi = detail::column_moments(rows, [](const ReplicateStats& r) { return r.varphi; });
    out.chi = detail::column_moments(rows, [](const ReplicateStats& r) { return r.chi; });
    out.additivity_residual = out.phi.variance - out.varphi.variance - out.chi.variance;

    // residual = 2 * sample Cov[varphi, chi]; its SE from the spread of the
    // centred products.
    const double n = static_cast<double>(rows.size());
    std::vector<double> prod(rows.size());
    CompensatedSum psum;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        prod[i] = (rows[i].varphi - out.varphi.mean) * (rows[i].chi - out.chi.mean);
        psum.add(prod[i]);
    }
    const double pmean = psum.value() / n;
    CompensatedSum pvar;
    for (double x : prod) pvar.add((x - pmean) * (x - pmean));
    out.additivity_se = 2.0 * std::sqrt(pvar.value() / (n - 1.0) / n);
    return out;
}

// Runs `replicates` independent pair simulations (seed of replicate r is
// derive_seed(p.seed, r)) and returns sample moments of omega, phi, varphi,
// chi computed with n_eff = n_sym and ground-truth cognacy. Output does not
// depend on `threads`.
inline SampleMoments monte_carlo(const SimParams& p, std::size_t replicates, bool use_endpoint,
                                 unsigned threads = 1) {
    p.validate();
    if (replicates < 2) throw invalid_argument("replicates must be >= 2");
    std::vector<ReplicateStats> rows(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
        SimParams q = p;
        q.seed = derive_seed(p.seed, r);
        const PairSample s = use_endpoint ? evolve_pair_endpoint(q) : evolve_pair_events(q);
        rows[r] = replicate_statistics(s, p.n_sym);
    });
    return summarize(rows);
}

}  // namespace lexiclock
