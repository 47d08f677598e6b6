#pragma once

// Closed-form moments of the three dating statistics, their relative dating
// errors, and the inversion of an observed statistic into a separation time.
//
//   omega   fraction of cognate pairs in two lists
//   phi     blind rescaled Hamming overlap over all concept pairs
//   varphi  the same overlap restricted to cognate pairs
//   chi     phi - varphi, the zero-mean contribution of non-cognate pairs
//
// With a = exp(-2 lambda t) and b = exp(-2 mu t):
//
//   E[omega] = a                Var[omega]  = a (1 - a) / M
//   E[phi]   = E[varphi] = a b
//   Var[varphi] = a (1 - a) b^2 / M + a (1 - b)(b + 1/(N-1)) / (M L)
//   Var[chi]    = (1 - a) / (M L (N-1))
//   Var[phi]    = Var[varphi] + Var[chi]
//
// Every function here is pure.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "params.hpp"

namespace lexiclock {

enum class Statistic { omega, phi, varphi, ancestor };

inline std::string_view to_string(Statistic s) {
    switch (s) {
        case Statistic::omega: return "omega";
        case Statistic::phi: return "phi";
        case Statistic::varphi: return "varphi";
        case Statistic::ancestor: return "ancestor";
    }
    return "?";
}

inline Statistic parse_statistic(std::string_view name) {
    if (name == "omega") return Statistic::omega;
    if (name == "phi") return Statistic::phi;
    if (name == "varphi") return Statistic::varphi;
    if (name == "ancestor") return Statistic::ancestor;
    throw invalid_argument("unknown statistic '" + std::string(name) + "'");
}

struct MomentPair {
    double mean = 0.0;
    double variance = 0.0;

    double sd() const { return std::sqrt(variance); }
};

struct ErrorRow {
    double t = 0.0;
    // std::nullopt where the Gaussian band collapses at this t.
    std::optional<double> r_omega;
    std::optional<double> r_phi;
    std::optional<double> r_varphi;
};

struct RelativeErrorCurve {
    std::vector<ErrorRow> rows;
};

struct DatingResult {
    double t_hat = 0.0;
    double t_lower = 0.0;
    double t_upper = 0.0;  // +inf when the upper band edge is <= 0
    Statistic method = Statistic::omega;
};

namespace detail {

inline void require_time(double t) {
    if (!(t >= 0.0)) throw invalid_argument("t must be >= 0");
}

}  // namespace detail

inline MomentPair moments_omega(const EvolutionParams& p, double t) {
    p.validate();
    detail::require_time(t);
    const double a = std::exp(-2.0 * p.lambda * t);
    return {a, a * (1.0 - a) / p.m};
}

// Fraction of un-replaced words in one lineage after t years (ancestor vs
// descendant comparison).
inline MomentPair moments_survival(const EvolutionParams& p, double t) {
    p.validate();
    detail::require_time(t);
    const double a = std::exp(-p.lambda * t);
    return {a, a * (1.0 - a) / p.m};
}

// Probability that two characters at the same position of a cognate pair agree.
inline double char_match_prob_cognate(const EvolutionParams& p, double t) {
    p.validate();
    detail::require_time(t);
    const double n = p.n_eff;
    return (n - 1.0) / n * std::exp(-2.0 * p.mu * t) + 1.0 / n;
}

namespace detail {

struct PhiVarianceTerms {
    double replacement;  // 1/M term
    double mutation;     // 1/(M L) term
    double chance;       // 1/(M L (N-1)) term
};

inline PhiVarianceTerms phi_variance_terms(const EvolutionParams& p, double t) {
    p.validate();
    p.require_alphabet();
    require_time(t);
    const double a = std::exp(-2.0 * p.lambda * t);
    const double b = std::exp(-2.0 * p.mu * t);
    const double m = p.m;
    const double inv_n1 = 1.0 / (p.n_eff - 1.0);
    return {
        a * (1.0 - a) * b * b / m,
        a * (1.0 - b) * (b + inv_n1) / (m * p.l_eff),
        (1.0 - a) * inv_n1 / (m * p.l_eff),
    };
}

inline double phi_mean(const EvolutionParams& p, double t) {
    return std::exp(-2.0 * (p.lambda + p.mu) * t);
}

}  // namespace detail

inline MomentPair moments_phi(const EvolutionParams& p, double t) {
    const auto v = detail::phi_variance_terms(p, t);
    return {detail::phi_mean(p, t), v.replacement + v.mutation + v.chance};
}

inline MomentPair moments_varphi(const EvolutionParams& p, double t) {
    const auto v = detail::phi_variance_terms(p, t);
    return {detail::phi_mean(p, t), v.replacement + v.mutation};
}

inline MomentPair moments_chi(const EvolutionParams& p, double t) {
    const auto v = detail::phi_variance_terms(p, t);
    return {0.0, v.chance};
}

inline MomentPair moments(const EvolutionParams& p, double t, Statistic s) {
    switch (s) {
        case Statistic::omega: return moments_omega(p, t);
        case Statistic::phi: return moments_phi(p, t);
        case Statistic::varphi: return moments_varphi(p, t);
        case Statistic::ancestor: return moments_survival(p, t);
    }
    throw invalid_argument("unknown statistic");
}

// mean = exp(-rate * t): rate is 2 lambda (omega), 2 (lambda + mu) (phi,
// varphi) or lambda (ancestor).
inline double decay_rate(const EvolutionParams& p, Statistic s) {
    switch (s) {
        case Statistic::omega: return 2.0 * p.lambda;
        case Statistic::phi:
        case Statistic::varphi: return 2.0 * (p.lambda + p.mu);
        case Statistic::ancestor: return p.lambda;
    }
    throw invalid_argument("unknown statistic");
}

namespace detail {

inline double band_log_ratio(const MomentPair& mp, double t, Statistic s) {
    const double half = 2.0 * mp.sd();
    const double lo = mp.mean - half;
    if (!(lo > 0.0)) {
        throw band_collapse("band of " + std::string(to_string(s)) + " collapses at t=" +
                            std::to_string(t) + " (mean - 2 sd <= 0)");
    }
    return std::log((mp.mean + half) / lo);
}

}  // namespace detail

// Half-width of the 95% dating band divided by t:
//   (1 / (2 rate t)) ln((E + 2 sd) / (E - 2 sd)).
inline double relative_error(const EvolutionParams& p, double t, Statistic s) {
    if (s == Statistic::ancestor) throw invalid_argument("relative_error is defined for omega, phi, varphi");
    if (!(t > 0.0) || !std::isfinite(t)) throw invalid_argument("relative_error needs finite t > 0");
    const double rate = decay_rate(p, s);
    if (!(rate > 0.0)) throw invalid_argument("decay rate is zero; statistic never moves");
    return detail::band_log_ratio(moments(p, t, s), t, s) / (2.0 * rate * t);
}

// relative_error(phi) with Var[phi] cut to its leading replacement term. This
// equals lambda / (lambda + mu) * relative_error(omega) identically.
inline double relative_error_phi_leading_term(const EvolutionParams& p, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw invalid_argument("relative_error needs finite t > 0");
    const double rate = decay_rate(p, Statistic::phi);
    if (!(rate > 0.0)) throw invalid_argument("decay rate is zero; statistic never moves");
    const MomentPair mp{detail::phi_mean(p, t), detail::phi_variance_terms(p, t).replacement};
    return detail::band_log_ratio(mp, t, Statistic::phi) / (2.0 * rate * t);
}

inline RelativeErrorCurve error_curves(const EvolutionParams& p, double t_min, double t_max,
                                       double step) {
    if (!(t_min > 0.0) || !(t_max >= t_min) || !(step > 0.0) || !std::isfinite(t_max))
        throw invalid_argument("error_curves needs 0 < t_min <= t_max and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((t_max - t_min) / step + 1e-9)) + 1;

    auto cell = [&](double t, Statistic s) -> std::optional<double> {
        try {
            return relative_error(p, t, s);
        } catch (const band_collapse&) {
            return std::nullopt;
        }
    };

    RelativeErrorCurve curve;
    curve.rows.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = t_min + static_cast<double>(k) * step;
        curve.rows.push_back({t, cell(t, Statistic::omega), cell(t, Statistic::phi),
                              cell(t, Statistic::varphi)});
    }
    return curve;
}

// Separation time from one observed value of a statistic, with the 95% band
// evaluated at the point estimate:
//   t_hat = -ln(value) / rate,   t_lower/upper = -ln(E(t_hat) +/- 2 sd(t_hat)) / rate.
// When value equals the analytic mean at t this is exactly the band around t.
inline DatingResult date_from_statistic(double value, const EvolutionParams& p, Statistic s) {
    if (!std::isfinite(value) || value > 1.0)
        throw invalid_argument("statistic value must be <= 1, got " + std::to_string(value));
    if (value <= 0.0)
        throw extinct_statistic("statistic at extinction value (" + std::to_string(value) +
                                "); no common ancestor detectable");
    p.validate();
    const double rate = decay_rate(p, s);
    if (!(rate > 0.0)) throw invalid_argument("decay rate is zero; cannot date");

    DatingResult r;
    r.method = s;
    r.t_hat = value == 1.0 ? 0.0 : -std::log(value) / rate;

    const MomentPair mp = moments(p, r.t_hat, s);
    const double half = 2.0 * mp.sd();
    r.t_lower = std::max(0.0, -std::log(mp.mean + half) / rate);
    const double lo = mp.mean - half;
    r.t_upper = lo > 0.0 ? -std::log(lo) / rate : std::numeric_limits<double>::infinity();
    r.t_lower = std::min(r.t_lower, r.t_hat);
    // t_hat first so that an exact tie yields +0, never -ln(1) = -0
    r.t_upper = std::max(r.t_hat, r.t_upper);
    return r;
}

// Rate at which a character actually changes value: (N-1)/N * mu.
inline double mu_hat(const EvolutionParams& p) {
    if (!(p.n_eff > 0.0)) throw invalid_argument("n_eff must be > 0");
    return (p.n_eff - 1.0) / p.n_eff * p.mu;
}

}  // namespace lexiclock
