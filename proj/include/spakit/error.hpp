#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spakit {

/// Raised when inputs violate a documented precondition (dimensions, domains).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when the data cannot support the requested number of extractions,
/// or a matrix that must have full column rank does not. Carries whatever
/// indices were extracted before the failure.
class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(const std::string& what, std::vector<std::size_t> partial = {},
                       std::string algorithm = {})
        : std::runtime_error(what), partial_(std::move(partial)), algorithm_(std::move(algorithm)) {}

    const std::vector<std::size_t>& partial_indices() const noexcept { return partial_; }
    const std::string& algorithm() const noexcept { return algorithm_; }

private:
    std::vector<std::size_t> partial_;
    std::string algorithm_;
};

/// An iterative routine hit its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::size_t iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

/// A worst-case certification could not be carried out as constructed.
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File or parse failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spakit
