// Exception types shared across the library.
//
// Construction-time parameter problems throw InvalidParameter; evaluation
// never re-validates family parameters.  Numeric routines that fail to
// converge throw NumericFailure carrying the last residual.

#pragma once

#include <stdexcept>
#include <string>

namespace copmix {

// Family parameter or configuration value out of its admissible range.
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

// Evaluation requested at a point where the quantity is undefined
// (e.g. the conditional CDF at u = 0 or u = 1).
class BoundaryError : public std::domain_error {
public:
    explicit BoundaryError(const std::string& what) : std::domain_error(what) {}
};

// A denominator vanished at the requested point; the message names the factor.
class DegeneratePoint : public std::domain_error {
public:
    explicit DegeneratePoint(const std::string& what) : std::domain_error(what) {}
};

// A test function has zero sample variance, so a correlation is undefined.
class DegenerateFunction : public std::domain_error {
public:
    explicit DegenerateFunction(const std::string& what) : std::domain_error(what) {}
};

// Envelope integrals that cannot belong to a sub-density.
class InvalidEnvelope : public std::invalid_argument {
public:
    explicit InvalidEnvelope(const std::string& what) : std::invalid_argument(what) {}
};

// Iterative numeric routine failed; carries the last residual seen.
class NumericFailure : public std::runtime_error {
public:
    NumericFailure(const std::string& what, double residual)
        : std::runtime_error(what + " (residual=" + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Malformed CLI specification strings, unreadable input files and the like.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace copmix
