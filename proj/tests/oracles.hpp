#pragma once

// Test-only reference implementations. They follow the definitions directly
// and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

// Top-down recursion on the edit-distance definition, memoized on (i, j).
inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
    auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
        if (i == 0) return j;
        if (j == 0) return i;
        long& slot = memo[i][j];
        if (slot >= 0) return static_cast<std::size_t>(slot);
        const std::size_t del = self(self, i - 1, j) + 1;
        const std::size_t ins = self(self, i, j - 1) + 1;
        const std::size_t sub = self(self, i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
        slot = static_cast<long>(std::min({del, ins, sub}));
        return static_cast<std::size_t>(slot);
    };
    return rec(rec, a.size(), b.size());
}

// Every string over `alphabet` of length 0..max_len.
inline std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len) {
    std::vector<std::string> out{""};
    std::vector<std::string> layer{""};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::string> next;
        for (const auto& s : layer)
            for (char c : alphabet) next.push_back(s + c);
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

inline double binomial_pmf(int n, int k, double p) {
    const double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
}

struct Moments {
    double mean, variance;
};

// Exact per-concept moments of phi_i, varphi_i and chi_i by enumerating the
// joint law of (cognacy, number of matching characters) for integer word
// length `len`, then dividing the variance by m for the list average.
struct ListMoments {
    Moments phi, varphi, chi;
};

inline ListMoments enumerate_list_moments(double lambda, double mu, double n, int len, int m, double t) {
    const double keep = std::exp(-2.0 * lambda * t);
    const double agree = (n - 1.0) / n * std::exp(-2.0 * mu * t) + 1.0 / n;
    const double scale = n / (n - 1.0);
    double e_phi = 0, e_phi2 = 0, e_var = 0, e_var2 = 0, e_chi = 0, e_chi2 = 0;
    for (int k = 0; k <= len; ++k) {
        const double x = scale * (static_cast<double>(k) / len - 1.0 / n);
        const double pc = keep * binomial_pmf(len, k, agree);
        const double pn = (1.0 - keep) * binomial_pmf(len, k, 1.0 / n);
        e_phi += (pc + pn) * x;
        e_phi2 += (pc + pn) * x * x;
        e_var += pc * x;
        e_var2 += pc * x * x;
        e_chi += pn * x;
        e_chi2 += pn * x * x;
    }
    return {{e_phi, (e_phi2 - e_phi * e_phi) / m},
            {e_var, (e_var2 - e_var * e_var) / m},
            {e_chi, (e_chi2 - e_chi * e_chi) / m}};
}

}  // namespace oracle
