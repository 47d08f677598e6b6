#pragma once

// Observable statistics on word lists. Words are any random-access range of
// comparable symbols: std::string, std::u32string, std::vector<uint8_t>, ...
// An empty word means the datum is missing.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <ranges>
#include <vector>

#include "errors.hpp"

namespace lexiclock {

template <class W>
concept Word = std::ranges::random_access_range<W> && std::ranges::sized_range<W> &&
               std::equality_comparable<std::ranges::range_value_t<W>>;

enum class Cognacy : std::uint8_t { non_cognate = 0, cognate = 1, unknown = 2 };

using CognacyFlags = std::vector<Cognacy>;

struct PairStatistics {
    double omega = 0.0;
    double mean_distance = 0.0;
    double phi = 0.0;
    double varphi = 0.0;
    double chi = 0.0;
    std::size_t n_compared = 0;
};

// Fraction of equal characters at equal positions.
template <Word A, Word B>
double hamming_overlap(const A& a, const B& b) {
    const auto n = std::ranges::size(a);
    if (n != std::ranges::size(b)) throw invalid_argument("hamming_overlap: length mismatch");
    if (n == 0) throw invalid_argument("hamming_overlap: empty word");
    auto ia = std::ranges::begin(a);
    auto ib = std::ranges::begin(b);
    std::size_t matches = 0;
    for (std::size_t k = 0; k < n; ++k) matches += ia[k] == ib[k];
    return static_cast<double>(matches) / static_cast<double>(n);
}

// Unit-cost insert/delete/substitute distance, two-row dynamic program.
template <Word A, Word B>
std::size_t edit_distance(const A& a, const B& b) {
    const std::size_t na = std::ranges::size(a);
    const std::size_t nb = std::ranges::size(b);
    if (na == 0) return nb;
    if (nb == 0) return na;
    auto ia = std::ranges::begin(a);
    auto ib = std::ranges::begin(b);

    thread_local std::vector<std::size_t> row;
    row.resize(nb + 1);
    for (std::size_t j = 0; j <= nb; ++j) row[j] = j;

    for (std::size_t i = 1; i <= na; ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= nb; ++j) {
            const std::size_t up = row[j];
            const std::size_t sub = diag + (ia[i - 1] == ib[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[nb];
}

// Edit distance over the longer word's length, in [0, 1].
template <Word A, Word B>
double normalized_levenshtein(const A& a, const B& b) {
    const std::size_t longest = std::max(std::ranges::size(a), std::ranges::size(b));
    if (longest == 0) throw invalid_argument("normalized_levenshtein: both words empty");
    return static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

// Per-concept overlap: Hamming for equal-length words, 1 - normalized
// Levenshtein otherwise.
template <Word A, Word B>
double word_overlap(const A& a, const B& b) {
    const auto na = std::ranges::size(a);
    if (na != 0 && na == std::ranges::size(b)) return hamming_overlap(a, b);
    return 1.0 - normalized_levenshtein(a, b);
}

template <Word A, Word B>
double word_distance(const A& a, const B& b) {
    return 1.0 - word_overlap(a, b);
}

// Threshold rule: cognate iff normalized Levenshtein <= theta (inclusive).
template <class ListA, class ListB>
CognacyFlags detect_cognates(const ListA& a, const ListB& b, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw invalid_argument("theta must lie in [0, 1]");
    if (std::size(a) != std::size(b)) throw invalid_argument("word lists differ in length");
    CognacyFlags flags(std::size(a), Cognacy::unknown);
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (std::ranges::empty(a[i]) || std::ranges::empty(b[i])) continue;
        flags[i] = normalized_levenshtein(a[i], b[i]) <= theta ? Cognacy::cognate : Cognacy::non_cognate;
    }
    return flags;
}

// omega, phi, varphi and chi for one language pair. Concepts with an unknown
// flag or a missing word are left out of every sum and of n_compared. The
// cognate and non-cognate sums are accumulated separately so that
// phi == varphi + chi holds exactly.
template <class ListA, class ListB>
PairStatistics pair_statistics(const ListA& a, const ListB& b, const CognacyFlags& flags, double n_eff) {
    if (std::size(a) != std::size(b) || flags.size() != std::size(a))
        throw invalid_argument("pair_statistics: lists and flags must share concept indexing");
    if (!(n_eff > 1.0)) throw invalid_argument("pair_statistics: n_eff must be > 1");

    const double scale = n_eff / (n_eff - 1.0);
    const double chance = 1.0 / n_eff;
    std::size_t compared = 0;
    std::size_t cognates = 0;
    double distance_sum = 0.0;
    double cognate_sum = 0.0;
    double other_sum = 0.0;

    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i] == Cognacy::unknown) continue;
        if (std::ranges::empty(a[i]) || std::ranges::empty(b[i])) continue;
        const double overlap = word_overlap(a[i], b[i]);
        const double term = scale * (overlap - chance);
        ++compared;
        distance_sum += 1.0 - overlap;
        if (flags[i] == Cognacy::cognate) {
            ++cognates;
            cognate_sum += term;
        } else {
            other_sum += term;
        }
    }
    if (compared == 0) throw insufficient_data("pair_statistics: no concept has both words present");

    const double n = static_cast<double>(compared);
    PairStatistics s;
    s.n_compared = compared;
    s.omega = static_cast<double>(cognates) / n;
    s.mean_distance = distance_sum / n;
    s.varphi = cognate_sum / n;
    s.chi = other_sum / n;
    s.phi = s.varphi + s.chi;
    return s;
}

}  // namespace lexiclock
