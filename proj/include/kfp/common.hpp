#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace kfp {

// Domain violations (invalid graph handed to a compiler, flux imbalance,
// nonpositive concentrations, ...). The CLI maps these to exit code 1.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// I/O and format problems (unreadable file, bad JSON, malformed CSV).
// The CLI maps these to exit code 2.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest decimal that round-trips a double exactly.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace kfp
