#pragma once

#include <stdexcept>
#include <string>

namespace bca {

// Invalid configuration: malformed schema/config documents, bad parameter
// values, unsupported option combinations.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data: response files, partition files,
// ground-truth files, degenerate sample sizes.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure inside an algorithm: factorization breakdown, empty
// graphs, non-convergence.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bca
