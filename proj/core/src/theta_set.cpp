#include "gexp/model/theta_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gexp/errors.hpp"

namespace gexp {

namespace {

void require_finite(const Matrix& m)
{
    if (!m.allFinite()) {
        throw InputError("ThetaSet: matrix entries must be finite");
    }
}

double half_trace(const Matrix& cov, const Matrix& A)
{
    return 0.5 * cov.cwiseProduct(A).sum();
}

} // namespace

ThetaSet ThetaSet::singleton(Matrix gamma)
{
    if (gamma.rows() == 0 || gamma.rows() != gamma.cols()) {
        throw InputError("ThetaSet: singleton matrix must be square and nonempty");
    }
    require_finite(gamma);
    ThetaSet t;
    t.kind_ = Kind::Singleton;
    t.dim_ = static_cast<std::size_t>(gamma.rows());
    t.points_.push_back(std::move(gamma));
    t.finalize();
    return t;
}

ThetaSet ThetaSet::interval(double sigma_low, double sigma_high)
{
    if (!(sigma_low > 0.0) || !(sigma_low <= sigma_high) || !std::isfinite(sigma_high)) {
        throw InputError("ThetaSet: interval requires 0 < sigma_low <= sigma_high < inf");
    }
    ThetaSet t;
    t.kind_ = Kind::Interval1D;
    t.dim_ = 1;
    t.lo_ = sigma_low;
    t.hi_ = sigma_high;
    t.points_.push_back(Matrix::Constant(1, 1, sigma_low));
    t.points_.push_back(Matrix::Constant(1, 1, sigma_high));
    t.finalize();
    return t;
}

ThetaSet ThetaSet::finite(std::vector<Matrix> members)
{
    if (members.empty()) {
        throw InputError("ThetaSet: finite set must be nonempty");
    }
    const auto d = members.front().rows();
    for (const auto& m : members) {
        if (m.rows() == 0 || m.rows() != d || m.cols() != d) {
            throw InputError("ThetaSet: finite set members must be square with a common dimension");
        }
        require_finite(m);
    }
    ThetaSet t;
    t.kind_ = Kind::FiniteSet;
    t.dim_ = static_cast<std::size_t>(d);
    t.points_ = std::move(members);
    t.finalize();
    return t;
}

void ThetaSet::finalize()
{
    max_var_ = 0.0;
    max_diag_ = 0.0;
    min_var_ = std::numeric_limits<double>::infinity();
    covs_.clear();
    for (const auto& g : points_) {
        const Matrix a = g * g.transpose();
        covs_.push_back(a);
        Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
        max_var_ = std::max(max_var_, es.eigenvalues().maxCoeff());
        min_var_ = std::min(min_var_, es.eigenvalues().minCoeff());
        max_diag_ = std::max(max_diag_, a.diagonal().maxCoeff());
    }
}

ThetaSet ThetaSet::with_floor(double sigma0) const
{
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
        throw InputError("ThetaSet: nondegeneracy floor must be a positive real");
    }
    if (min_var_ < sigma0 - 1e-12) {
        throw InputError("ThetaSet: declared nondegeneracy floor " + std::to_string(sigma0)
                         + " exceeds smallest eigenvalue " + std::to_string(min_var_));
    }
    ThetaSet t = *this;
    t.floor_ = sigma0;
    return t;
}

bool ThetaSet::contains(const Matrix& gamma, double tol) const
{
    if (static_cast<std::size_t>(gamma.rows()) != dim_
        || static_cast<std::size_t>(gamma.cols()) != dim_) {
        return false;
    }
    if (kind_ == Kind::Interval1D) {
        const double s = gamma(0, 0);
        return s >= lo_ - tol && s <= hi_ + tol;
    }
    return std::any_of(points_.begin(), points_.end(), [&](const Matrix& m) {
        return (m - gamma).cwiseAbs().maxCoeff() <= tol;
    });
}

bool operator==(const ThetaSet& a, const ThetaSet& b)
{
    if (a.kind_ != b.kind_ || a.dim_ != b.dim_ || a.floor_ != b.floor_
        || a.points_.size() != b.points_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.points_.size(); ++i) {
        if (a.points_[i] != b.points_[i]) {
            return false;
        }
    }
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
}

void require_symmetric(const ThetaSet& theta, const Matrix& A)
{
    const auto d = static_cast<Eigen::Index>(theta.dim());
    if (A.rows() != d || A.cols() != d) {
        throw InputError("G-function: matrix dimension does not match the uncertainty set");
    }
    if (!A.allFinite()) {
        throw InputError("G-function: matrix has non-finite entries");
    }
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InputError("G-function: matrix is not symmetric");
    }
}

double g_function(const ThetaSet& theta, const Matrix& A)
{
    require_symmetric(theta, A);
    if (theta.kind() == ThetaSet::Kind::Interval1D) {
        const double a = A(0, 0);
        const double lo = theta.sigma_low();
        const double hi = theta.sigma_high();
        return 0.5 * (hi * hi * std::max(a, 0.0) - lo * lo * std::max(-a, 0.0));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : theta.covariances()) {
        best = std::max(best, half_trace(c, A));
    }
    return best;
}

std::size_t argmax_index(const ThetaSet& theta, const Matrix& A)
{
    require_symmetric(theta, A);
    return argmax_index_unchecked(theta, A);
}

std::size_t argmax_index_unchecked(const ThetaSet& theta, const Matrix& A) noexcept
{
    if (theta.kind() == ThetaSet::Kind::Interval1D) {
        return A(0, 0) >= 0.0 ? 1 : 0;
    }
    const auto& covs = theta.covariances();
    std::size_t best = 0;
    double best_val = half_trace(covs[0], A);
    for (std::size_t i = 1; i < covs.size(); ++i) {
        const double v = half_trace(covs[i], A);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    return best;
}

const Matrix& argmax_gamma(const ThetaSet& theta, const Matrix& A)
{
    return theta.extreme_points()[argmax_index(theta, A)];
}

} // namespace gexp
