#include "hdpca/matrixcore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "hdpca/errors.hpp"

namespace hdpca {

namespace {

// Round-off below this fraction of the top eigenvalue is clipped to zero.
constexpr double kClipFraction = 1e-10;

std::vector<double> clip_and_sort(std::vector<double> ev)
{
    std::sort(ev.begin(), ev.end(), std::greater<>());
    const double top = ev.empty() ? 0.0 : std::max(ev.front(), 0.0);
    for (double& v : ev) {
        if (v >= 0.0) continue;
        if (v > -kClipFraction * top) {
            v = 0.0;
        } else {
            std::ostringstream os;
            os << "eigensolver returned eigenvalue " << v << " far below zero (largest " << top << ")";
            throw NumericError(os.str());
        }
    }
    return ev;
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values))
{
    if (values_.rows() < 2) throw InputError("data matrix needs at least 2 observations");
    if (values_.cols() < 1) throw InputError("data matrix needs at least 1 column");
    if (!values_.allFinite()) throw InputError("data matrix contains non-finite entries");
}

Spectrum::Spectrum(std::vector<double> eigenvalues, std::size_t n) : eigenvalues_(std::move(eigenvalues)), n_(n)
{
    if (n_ < 2) throw InputError("spectrum needs a sample size n >= 2");
    if (eigenvalues_.empty()) throw InputError("spectrum needs at least one eigenvalue");
    for (double v : eigenvalues_) {
        if (!std::isfinite(v)) throw InputError("spectrum contains non-finite eigenvalues");
        if (v < 0.0) throw InputError("spectrum contains negative eigenvalues");
    }
    std::sort(eigenvalues_.begin(), eigenvalues_.end(), std::greater<>());
}

double Spectrum::trace() const noexcept
{
    return std::accumulate(eigenvalues_.begin(), eigenvalues_.end(), 0.0);
}

std::span<const double> Spectrum::tail(std::size_t m) const
{
    if (m > p()) throw DomainError("tail index exceeds the dimension");
    return std::span<const double>(eigenvalues_).subspan(m);
}

Spectrum Spectrum::scaled(double k) const
{
    if (!(k > 0.0)) throw DomainError("scale factor must be positive");
    std::vector<double> ev = eigenvalues_;
    for (double& v : ev) v *= k;
    return Spectrum(std::move(ev), n_);
}

Eigen::MatrixXd center_columns(const Eigen::MatrixXd& x)
{
    const Eigen::RowVectorXd mean = x.colwise().mean();
    return x.rowwise() - mean;
}

Eigen::MatrixXd sample_covariance(const DataMatrix& data)
{
    const Eigen::MatrixXd centered = center_columns(data.values());
    const auto n = static_cast<double>(data.rows());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(centered.cols(), centered.cols());
    s.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / (n - 1.0));
    return s.selfadjointView<Eigen::Lower>();
}

Spectrum spectrum(const DataMatrix& data)
{
    const std::size_t n = data.rows();
    const std::size_t p = data.cols();
    if (p <= n) return spectrum_of(sample_covariance(data), n);

    // Same nonzero eigenvalues as the p x p covariance, at O(n^3) cost.
    const Eigen::MatrixXd centered = center_columns(data.values());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(centered.rows(), centered.rows());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / (static_cast<double>(n) - 1.0));
    std::vector<double> ev = clip_and_sort(symmetric_eigenvalues(gram.selfadjointView<Eigen::Lower>()));
    ev.resize(p, 0.0);
    return Spectrum(std::move(ev), n);
}

Spectrum spectrum_of(const Eigen::MatrixXd& symmetric, std::size_t n)
{
    if (symmetric.rows() != symmetric.cols()) throw InputError("matrix is not square");
    if (!symmetric.allFinite()) throw InputError("matrix contains non-finite entries");
    return Spectrum(clip_and_sort(symmetric_eigenvalues(symmetric)), n);
}

}  // namespace hdpca
