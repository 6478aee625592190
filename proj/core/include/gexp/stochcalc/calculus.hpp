#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gexp/errors.hpp"
#include "gexp/model/control_policy.hpp"
#include "gexp/model/integrand.hpp"
#include "gexp/montecarlo/estimators.hpp"
#include "gexp/montecarlo/paths.hpp"

namespace gexp::stochcalc {

/// An integrand value exceeded its declared bound along a path.
class IntegrandBoundError : public InputError {
public:
    IntegrandBoundError(std::size_t path, std::size_t step, double norm, double bound);
    std::size_t path() const noexcept { return path_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t path_;
    std::size_t step_;
};

/// exp overflowed while forming the density; carries the offending path's
/// exponent components.
class DensityOverflowError : public NumericalError {
public:
    DensityOverflowError(std::size_t path, double ito, double qv_form);
    std::size_t path() const noexcept { return path_; }
    double ito() const noexcept { return ito_; }
    double qv_form() const noexcept { return qv_form_; }

private:
    std::size_t path_;
    double ito_;
    double qv_form_;
};

/// Per-path arrays [M x (N + 1)] for a bundle.
using PathArray = std::vector<double>;

/// Cumulative sum_k h(t_k, B_{t_k}) . (B_{t_{k+1}} - B_{t_k}).
PathArray ito_integral(const Integrand& h, const montecarlo::PathBundle& bundle);

/// Cumulative sum_k dB_k dB_k^T, stored [M x (N + 1) x d x d] row-major.
std::vector<double> quadratic_variation(const montecarlo::PathBundle& bundle);

struct GirsanovTransform {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::size_t dim = 0;
    PathArray ito;
    /// int h . (d<B> h), i.e. sum_k (h_k . dB_k)^2.
    PathArray qv_form;
    PathArray log_D;
    PathArray D;
    /// [M x (N + 1) x d]
    std::vector<double> B_hat;

    double density(std::size_t p, std::size_t k) const { return D[p * (grid.n_steps() + 1) + k]; }
};

/// Builds D = exp(ito - qv_form / 2) and B_hat = B - sum dB dB^T h from a
/// simulated bundle. Throws DensityOverflowError if exp overflows and
/// IntegrandBoundError if |h| exceeds its bound.
GirsanovTransform girsanov_transform(const Integrand& h, const montecarlo::PathBundle& bundle);

/// Which path a policy observes when the control is chosen jointly with the
/// transform.
enum class Observe { Original, Transformed };

/// Per-path workspace of the streaming transform, sized (N + 1) or (N + 1) d.
struct PathTransform {
    std::vector<double> B;
    std::vector<double> B_hat;
    std::vector<double> ito;
    std::vector<double> qv_form;

    PathTransform(std::size_t n_steps, std::size_t dim);
    double log_density(std::size_t k) const noexcept { return ito[k] - 0.5 * qv_form[k]; }
};

/// Simulates one path under `policy` and transforms it in the same pass.
/// With Observe::Transformed the policy sees B_hat instead of B.
void simulate_transformed_path(const ControlPolicy& policy, const Integrand& h,
                               std::span<const double> dW, Observe observe, std::size_t path,
                               PathTransform& out, Matrix& scratch);

/// E[v D] from samples v_i and log-weights l_i with a log-sum-exp shift.
/// Throws DensityOverflowError when the result is not representable.
montecarlo::EstimateWithError weighted_estimate(std::span<const double> values,
                                                std::span<const double> log_weights,
                                                std::uint64_t seed);

} // namespace gexp::stochcalc
