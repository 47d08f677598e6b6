#pragma once

// Error types shared by every module. All derive from lexiclock::error so a
// front end can catch one base and map it to an exit code.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexiclock {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (negative rate, empty word, ...).
struct invalid_argument : error {
    using error::error;
};

// E - 2 sqrt(Var) <= 0: the statistic carries no dating information at this
// horizon, so the log band is undefined.
struct band_collapse : error {
    using error::error;
};

// The observed statistic sits at its extinction value (<= 0); ln diverges.
struct extinct_statistic : error {
    using error::error;
};

// Too few usable pairs or words to form an average.
struct insufficient_data : error {
    using error::error;
};

// Malformed input file. `line` is 1-based; 0 when not tied to a line.
struct parse_error : error {
    parse_error(const std::string& what, std::size_t line)
        : error(line ? what + " (line " + std::to_string(line) + ")" : what), line(line) {}
    std::size_t line;
};

}  // namespace lexiclock
