#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hdpca {

/// n observations (rows) of a p-dimensional vector (columns).
///
/// Construction validates n >= 2, p >= 1 and finiteness, so every
/// DataMatrix that exists is usable by the estimators.
class DataMatrix {
public:
    explicit DataMatrix(Eigen::MatrixXd values);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

private:
    Eigen::MatrixXd values_;
};

/// Descending eigenvalues of a p x p sample covariance formed from n observations.
class Spectrum {
public:
    /// Takes eigenvalues in any order; sorts descending. Entries must be finite and >= 0.
    Spectrum(std::vector<double> eigenvalues, std::size_t n);

    std::size_t p() const noexcept { return eigenvalues_.size(); }
    std::size_t n() const noexcept { return n_; }

    /// c_n = p / (n - 1).
    double cn() const noexcept { return static_cast<double>(p()) / static_cast<double>(n_ - 1); }
    /// Raw p / n ratio.
    double ratio() const noexcept { return static_cast<double>(p()) / static_cast<double>(n_); }

    std::span<const double> values() const noexcept { return eigenvalues_; }
    /// 0-based: lambda(0) is the largest eigenvalue.
    double operator[](std::size_t i) const { return eigenvalues_[i]; }
    double trace() const noexcept;

    /// Eigenvalues with index >= m (the p - m noise eigenvalues when m spikes are assumed).
    std::span<const double> tail(std::size_t m) const;

    /// Same eigenvalues multiplied by k > 0.
    Spectrum scaled(double k) const;

private:
    std::vector<double> eigenvalues_;
    std::size_t n_;
};

/// Subtract each column's mean.
Eigen::MatrixXd center_columns(const Eigen::MatrixXd& x);

/// (1/(n-1)) sum_i (x_i - xbar)(x_i - xbar)'.
Eigen::MatrixXd sample_covariance(const DataMatrix& data);

/// Eigenvalues of sample_covariance(data). When p > n the n x n Gram matrix
/// is decomposed instead and the spectrum is padded with p - n zeros.
Spectrum spectrum(const DataMatrix& data);

/// Eigenvalues of an explicit symmetric matrix, tagged with the sample size n.
Spectrum spectrum_of(const Eigen::MatrixXd& symmetric, std::size_t n);

}  // namespace hdpca
