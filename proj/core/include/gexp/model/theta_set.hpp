#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace gexp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The volatility uncertainty set: a bounded, closed set of d x d matrices.
///
/// Three representations are supported, each with an exact supremum in
/// `g_function`:
///   - Singleton: a single matrix (the classical, linear case);
///   - Interval1D: scalar volatilities sigma in [sigma_low, sigma_high], d = 1;
///   - FiniteSet: an explicit list of matrices.
///
/// Continuum sets in d > 1 must be discretised by the caller into a FiniteSet.
class ThetaSet {
public:
    enum class Kind { Singleton, Interval1D, FiniteSet };

    static ThetaSet singleton(Matrix gamma);
    static ThetaSet interval(double sigma_low, double sigma_high);
    static ThetaSet finite(std::vector<Matrix> members);

    /// Returns a copy carrying a declared nondegeneracy floor sigma0, i.e.
    /// gamma gamma^T >= sigma0 I for every member. Throws InputError when
    /// some member violates the declared floor by more than 1e-12.
    ThetaSet with_floor(double sigma0) const;

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    std::optional<double> nondegeneracy_floor() const noexcept { return floor_; }

    /// Interval bounds; only meaningful for Interval1D.
    double sigma_low() const noexcept { return lo_; }
    double sigma_high() const noexcept { return hi_; }

    /// Members for Singleton/FiniteSet; {sigma_low, sigma_high} as 1x1 matrices
    /// for Interval1D. The supremum defining G is always attained here.
    const std::vector<Matrix>& extreme_points() const noexcept { return points_; }
    /// gamma gamma^T for each extreme point, same order.
    const std::vector<Matrix>& covariances() const noexcept { return covs_; }

    /// Largest eigenvalue of gamma gamma^T over the set.
    double max_variance() const noexcept { return max_var_; }
    /// Largest diagonal entry of gamma gamma^T over the set (the constant C
    /// bounding d<B^i>/dt).
    double max_qv_diagonal() const noexcept { return max_diag_; }
    /// Smallest eigenvalue of gamma gamma^T over the set.
    double computed_floor() const noexcept { return min_var_; }

    bool contains(const Matrix& gamma, double tol = 1e-12) const;

    friend bool operator==(const ThetaSet& a, const ThetaSet& b);

private:
    ThetaSet() = default;
    void finalize();

    Kind kind_ = Kind::Singleton;
    std::size_t dim_ = 0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::vector<Matrix> points_;
    std::vector<Matrix> covs_;
    std::optional<double> floor_;
    double max_var_ = 0.0;
    double max_diag_ = 0.0;
    double min_var_ = 0.0;
};

/// G(A) = sup over the set of 1/2 tr(gamma gamma^T A) for symmetric A.
double g_function(const ThetaSet& theta, const Matrix& A);

/// Index into `theta.extreme_points()` of a maximiser of 1/2 tr(gamma gamma^T A).
/// Ties go to the lowest index; for Interval1D a zero curvature selects sigma_high.
std::size_t argmax_index(const ThetaSet& theta, const Matrix& A);

const Matrix& argmax_gamma(const ThetaSet& theta, const Matrix& A);

/// argmax_index without validating A; for inner loops that already know A
/// is symmetric and correctly sized.
std::size_t argmax_index_unchecked(const ThetaSet& theta, const Matrix& A) noexcept;

/// Throws InputError unless A is square of the set's dimension and symmetric
/// to within 1e-12.
void require_symmetric(const ThetaSet& theta, const Matrix& A);

} // namespace gexp
