#pragma once

// Effective-parameter estimation from a set of Swadesh lists:
//   N, L      from chance agreement of words for different concepts
//   lambda(g) from the mean cognate overlap of varieties split at the root
//   mu(g)     from the mean rescaled word overlap of the same pairs
// where g is a minimum great-circle distance between the two varieties.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "metrics.hpp"
#include "parallel.hpp"

namespace lexiclock {

struct VarietyMeta {
    std::string id;
    std::string name;
    double latitude = 0.0;
    double longitude = 0.0;
    std::string clade;

    void validate() const {
        if (!(std::abs(latitude) <= 90.0)) throw invalid_argument("latitude out of range for variety " + id);
        if (!(std::abs(longitude) <= 180.0)) throw invalid_argument("longitude out of range for variety " + id);
    }
};

// Words are stored as code points; an empty word is a missing datum.
struct SwadeshDataset {
    std::vector<VarietyMeta> varieties;
    std::vector<std::string> concepts;
    std::vector<std::vector<std::u32string>> words;  // [variety][concept]

    std::size_t variety_count() const { return varieties.size(); }
    std::size_t concept_count() const { return concepts.size(); }

    std::size_t index_of(const std::string& id) const {
        for (std::size_t v = 0; v < varieties.size(); ++v)
            if (varieties[v].id == id) return v;
        throw invalid_argument("unknown variety '" + id + "'");
    }

    void validate() const {
        if (varieties.size() < 2 || concepts.size() < 2)
            throw invalid_argument("dataset needs at least 2 varieties and 2 concepts");
        if (words.size() != varieties.size())
            throw invalid_argument("word table rows do not match varieties");
        for (const auto& row : words)
            if (row.size() != concepts.size()) throw invalid_argument("word table columns do not match concepts");
        for (const auto& v : varieties) v.validate();
    }
};

inline constexpr double earth_radius_km = 6371.0088;

// Haversine great-circle distance in km.
inline double geo_distance(const VarietyMeta& a, const VarietyMeta& b) {
    a.validate();
    b.validate();
    constexpr double deg = std::numbers::pi / 180.0;
    const double phi1 = a.latitude * deg;
    const double phi2 = b.latitude * deg;
    const double dphi = phi2 - phi1;
    const double dlambda = (b.longitude - a.longitude) * deg;
    const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
    // atan2 form stays accurate near antipodal points, where asin(sqrt(h)) does not
    const double hc = std::clamp(h, 0.0, 1.0);
    return 2.0 * earth_radius_km * std::atan2(std::sqrt(hc), std::sqrt(1.0 - hc));
}

// Mean word distance d and mean d^2 over every variety pair (alpha <= beta,
// same-variety pairs included) and every ordered concept pair i != j with
// both words present.
struct DistanceMoments {
    double mean_distance = 0.0;
    double mean_sq_distance = 0.0;
    std::size_t pair_count = 0;
};

inline DistanceMoments cross_concept_distance_moments(const SwadeshDataset& ds, unsigned threads = 1) {
    ds.validate();
    const std::size_t nv = ds.variety_count();
    const std::size_t nc = ds.concept_count();

    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    for (std::size_t a = 0; a < nv; ++a)
        for (std::size_t b = a; b < nv; ++b) blocks.emplace_back(a, b);

    struct Partial {
        double sum = 0.0, sum_sq = 0.0;
        std::size_t count = 0;
    };
    std::vector<Partial> partial(blocks.size());
    parallel_for(blocks.size(), threads, [&](std::size_t k) {
        const auto& wa = ds.words[blocks[k].first];
        const auto& wb = ds.words[blocks[k].second];
        CompensatedSum s, s2;
        std::size_t count = 0;
        for (std::size_t i = 0; i < nc; ++i) {
            if (wa[i].empty()) continue;
            for (std::size_t j = 0; j < nc; ++j) {
                if (i == j || wb[j].empty()) continue;
                const double d = word_distance(wa[i], wb[j]);
                s.add(d);
                s2.add(d * d);
                ++count;
            }
        }
        partial[k] = {s.value(), s2.value(), count};
    });

    CompensatedSum s, s2;
    std::size_t count = 0;
    for (const auto& p : partial) {
        s.add(p.sum);
        s2.add(p.sum_sq);
        count += p.count;
    }
    if (count == 0) throw insufficient_data("no usable cross-concept word pairs");
    return {s.value() / count, s2.value() / count, count};
}

// 1/N = mean chance overlap (1 - d) of words for different concepts.
inline double estimate_n(const DistanceMoments& dm) {
    const double match = 1.0 - dm.mean_distance;
    if (!(match > 0.0)) throw insufficient_data("mean cross-concept overlap is 0; N is unbounded");
    return 1.0 / match;
}

inline double estimate_n(const SwadeshDataset& ds, unsigned threads = 1) {
    return estimate_n(cross_concept_distance_moments(ds, threads));
}

// 1/L = (N-1) * mean (1 - N/(N-1) d)^2, expanded in the first two moments of d.
inline double estimate_l(const DistanceMoments& dm, double n) {
    if (!(n > 1.0)) throw invalid_argument("estimate_l needs N > 1");
    const double c = n / (n - 1.0);
    const double mean_sq = 1.0 - 2.0 * c * dm.mean_distance + c * c * dm.mean_sq_distance;
    const double inv_l = (n - 1.0) * mean_sq;
    if (!(inv_l > 0.0)) throw insufficient_data("chance-overlap variance is 0; L is unbounded");
    return 1.0 / inv_l;
}

inline double estimate_l(const SwadeshDataset& ds, double n, unsigned threads = 1) {
    return estimate_l(cross_concept_distance_moments(ds, threads), n);
}

struct PairSet {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // a < b
    std::size_t count() const { return pairs.size(); }
};

// Variety pairs split at the root (different clade labels) and farther apart
// than g km.
inline PairSet admissible_pairs(const SwadeshDataset& ds, double g) {
    if (!(g >= 0.0)) throw invalid_argument("g must be >= 0");
    PairSet out;
    for (std::size_t a = 0; a < ds.variety_count(); ++a) {
        for (std::size_t b = a + 1; b < ds.variety_count(); ++b) {
            const auto& va = ds.varieties[a];
            const auto& vb = ds.varieties[b];
            if (va.clade.empty() || vb.clade.empty())
                throw invalid_argument("clade label missing for variety " + (va.clade.empty() ? va.id : vb.id));
            if (va.clade == vb.clade) continue;
            if (geo_distance(va, vb) > g) out.pairs.emplace_back(a, b);
        }
    }
    return out;
}

struct EstimationOptions {
    double theta = 0.5;         // cognacy threshold
    std::size_t min_pairs = 10; // floor on R(g)
    unsigned threads = 1;
};

// Observed omega and phi for one variety pair, cognacy by threshold rule.
struct PairObservation {
    double omega = 0.0;
    double phi = 0.0;
};

inline PairObservation observe_pair(const SwadeshDataset& ds, std::size_t a, std::size_t b, double theta,
                                    double n_eff) {
    const auto& wa = ds.words[a];
    const auto& wb = ds.words[b];
    const auto flags = detect_cognates(wa, wb, theta);
    const auto st = pair_statistics(wa, wb, flags, n_eff);
    return {st.omega, st.phi};
}

namespace detail {

inline void require_pairs(const PairSet& ps, const EstimationOptions& opt, double g) {
    if (ps.count() < opt.min_pairs)
        throw insufficient_data("only " + std::to_string(ps.count()) + " admissible pairs at g=" +
                                std::to_string(g) + " (need " + std::to_string(opt.min_pairs) + ")");
}

inline void require_root_time(double t_root) {
    if (!(t_root > 0.0) || !std::isfinite(t_root)) throw invalid_argument("t_root must be > 0");
}

// Average-then-log: -ln(mean) / (2 t_root).
inline double rate_from_mean(double mean, double t_root, const char* what) {
    if (!(mean > 0.0))
        throw insufficient_data(std::string("mean ") + what + " is <= 0; signal saturated");
    return -std::log(mean) / (2.0 * t_root);
}

template <class Get>
double mean_over_pairs(const std::vector<PairObservation>& obs, Get get) {
    CompensatedSum s;
    for (const auto& o : obs) s.add(get(o));
    return s.value() / static_cast<double>(obs.size());
}

inline std::vector<PairObservation> observe_pairs(const SwadeshDataset& ds, const PairSet& ps, double theta,
                                                  double n_eff, unsigned threads) {
    std::vector<PairObservation> obs(ps.count());
    parallel_for(ps.count(), threads, [&](std::size_t k) {
        obs[k] = observe_pair(ds, ps.pairs[k].first, ps.pairs[k].second, theta, n_eff);
    });
    return obs;
}

}  // namespace detail

// lambda(g) = -ln(mean observed cognate overlap) / (2 t_root).
inline double estimate_lambda(const SwadeshDataset& ds, double t_root, double g,
                              const EstimationOptions& opt = {}) {
    ds.validate();
    detail::require_root_time(t_root);
    const auto ps = admissible_pairs(ds, g);
    detail::require_pairs(ps, opt, g);
    // n_eff only affects phi, which is not used here.
    const auto obs = detail::observe_pairs(ds, ps, opt.theta, 2.0, opt.threads);
    const double mean = detail::mean_over_pairs(obs, [](const PairObservation& o) { return o.omega; });
    return detail::rate_from_mean(mean, t_root, "cognate overlap");
}

struct MuEstimate {
    double mu = 0.0;
    double mu_hat = 0.0;         // (N-1)/N * mu
    double combined_rate = 0.0;  // lambda + mu
    bool negative = false;       // mu < 0: data inconsistent with lambda(g)
};

// mu(g) = -ln(mean (1 - N/(N-1) D)) / (2 t_root) - lambda(g), with D the mean
// word distance of a variety pair.
inline MuEstimate estimate_mu(const SwadeshDataset& ds, double t_root, double g, double n, double lambda_g,
                              const EstimationOptions& opt = {}) {
    ds.validate();
    detail::require_root_time(t_root);
    if (!(n > 1.0)) throw invalid_argument("estimate_mu needs N > 1");
    const auto ps = admissible_pairs(ds, g);
    detail::require_pairs(ps, opt, g);
    const auto obs = detail::observe_pairs(ds, ps, opt.theta, n, opt.threads);
    const double mean = detail::mean_over_pairs(obs, [](const PairObservation& o) { return o.phi; });
    MuEstimate out;
    out.combined_rate = detail::rate_from_mean(mean, t_root, "rescaled word overlap");
    out.mu = out.combined_rate - lambda_g;
    out.mu_hat = (n - 1.0) / n * out.mu;
    out.negative = out.mu < 0.0;
    return out;
}

struct SweepRow {
    double g = 0.0;
    std::size_t pair_count = 0;
    std::optional<double> lambda;  // empty below the pair floor or when saturated
    std::optional<double> mu_hat;
};

// lambda(g) and mu_hat(g) on a grid of distance thresholds. Pair observations
// are computed once for g = g_min and filtered per row.
inline std::vector<SweepRow> sweep_g(const SwadeshDataset& ds, double t_root, double g_min, double g_max,
                                     double step, double n, const EstimationOptions& opt = {}) {
    ds.validate();
    detail::require_root_time(t_root);
    if (!(g_min >= 0.0) || !(g_max >= g_min) || !(step > 0.0) || !std::isfinite(g_max))
        throw invalid_argument("sweep grid needs 0 <= g_min <= g_max and step > 0");
    if (!(n > 1.0)) throw invalid_argument("sweep needs N > 1");

    const auto base = admissible_pairs(ds, g_min);
    const auto obs = detail::observe_pairs(ds, base, opt.theta, n, opt.threads);
    std::vector<double> dist(base.count());
    for (std::size_t k = 0; k < base.count(); ++k)
        dist[k] = geo_distance(ds.varieties[base.pairs[k].first], ds.varieties[base.pairs[k].second]);

    const auto rows = static_cast<std::size_t>(std::floor((g_max - g_min) / step + 1e-9)) + 1;
    std::vector<SweepRow> out;
    out.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        SweepRow row;
        row.g = g_min + static_cast<double>(r) * step;
        std::vector<PairObservation> kept;
        for (std::size_t k = 0; k < obs.size(); ++k)
            if (dist[k] > row.g) kept.push_back(obs[k]);
        row.pair_count = kept.size();
        if (kept.size() >= opt.min_pairs) {
            const double w = detail::mean_over_pairs(kept, [](const PairObservation& o) { return o.omega; });
            const double f = detail::mean_over_pairs(kept, [](const PairObservation& o) { return o.phi; });
            if (w > 0.0 && f > 0.0) {
                const double lam = -std::log(w) / (2.0 * t_root);
                const double mu = -std::log(f) / (2.0 * t_root) - lam;
                row.lambda = lam;
                row.mu_hat = (n - 1.0) / n * mu;
            }
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace lexiclock
