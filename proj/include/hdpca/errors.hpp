#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdpca {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (bad CSV, non-finite entries, too few rows).
class InputError : public Error {
public:
    using Error::Error;
};

/// A parameter lies outside the domain of the operation (m >= p, c >= 1 for h(c), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The data violate the dimensional regime an operation requires (c_n >= 1 for log-spectral tests).
class RegimeError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Numerical failure: solver non-convergence, degenerate spectra, sub-edge spikes.
class NumericError : public Error {
public:
    using Error::Error;
};

/// One or more leading eigenvalues sit at or below the Marcenko-Pastur bulk edge,
/// so the spike map cannot be inverted there. Indices are 1-based.
class SubEdgeError : public NumericError {
public:
    SubEdgeError(std::vector<std::size_t> indices, double edge);

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    double edge() const noexcept { return edge_; }

private:
    std::vector<std::size_t> indices_;
    double edge_;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, int iterations, double last_residual)
        : NumericError(what), iterations_(iterations), last_residual_(last_residual) {}

    int iterations() const noexcept { return iterations_; }
    double last_residual() const noexcept { return last_residual_; }

private:
    int iterations_;
    double last_residual_;
};

/// Process exit code for the CLI: 2 input, 3 numeric, 4 regime.
int exit_code_for(const Error& e) noexcept;

}  // namespace hdpca
