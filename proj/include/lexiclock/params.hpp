#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"

namespace lexiclock {

// Model constants of the two-process lexicon model. Rates are per year.
// n_eff and l_eff are real valued: fitted effective parameters are rarely
// integers.
struct EvolutionParams {
    double lambda = 1.4e-4;  // word replacement rate
    double mu = 1.6e-4;      // character redraw rate (self-redraw allowed)
    double n_eff = 5.18;     // effective alphabet size
    double l_eff = 7.63;     // effective word length
    int m = 207;             // concepts per list

    // Basic range checks. Formulas with 1/(N-1) check n_eff > 1 themselves.
    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw invalid_argument("lambda must be finite and >= 0");
        if (!(mu >= 0.0) || !std::isfinite(mu))
            throw invalid_argument("mu must be finite and >= 0");
        if (!(n_eff >= 1.0) || !std::isfinite(n_eff))
            throw invalid_argument("n_eff must be finite and >= 1");
        if (!(l_eff >= 1.0) || !std::isfinite(l_eff))
            throw invalid_argument("l_eff must be finite and >= 1");
        if (m < 1) throw invalid_argument("m must be >= 1");
    }

    void require_alphabet() const {
        if (!(n_eff > 1.0)) throw invalid_argument("n_eff must be > 1 for this formula");
    }
};

}  // namespace lexiclock
