#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gexp/expectation/recursion.hpp"
#include "gexp/model/functional.hpp"
#include "gexp/model/integrand.hpp"
#include "gexp/montecarlo/estimators.hpp"
#include "gexp/montecarlo/family.hpp"
#include "gexp/stochcalc/calculus.hpp"

namespace gexp::girsanov {

struct NovikovPolicyMoment {
    std::string policy;
    montecarlo::EstimateWithError at_m;
    montecarlo::EstimateWithError at_2m;
    double drift = 0.0;
    bool finite = true;
};

struct NovikovReport {
    enum class Verdict { SatisfiedAtDeskScale, Diverging };

    double epsilon = 0.0;
    double p = 0.0;
    double q = 0.0;
    double p2q2 = 0.0;
    double pq_ratio = 0.0;
    /// max relative deviation of p^2 q^2 and pq(pq-1)/(q-1) from 1 + epsilon
    double identity_error = 0.0;
    std::vector<NovikovPolicyMoment> moments;
    /// sup over the family of E_P[exp((1 + eps)/2 int h.(d<B>h))] at 2M paths
    montecarlo::EstimateWithError sup_estimate;
    std::string sup_policy;
    double max_drift = 0.0;
    /// (1 - 2 c H^2 s^2 dt)^(-N/2) with c = (1 + eps)/2, s^2 = sigma_max^2;
    /// infinite when 2 c H^2 s^2 dt >= 1.
    double discrete_bound = 0.0;
    /// exp(c H^2 s^2 T), the continuous-time limit of discrete_bound.
    double continuous_bound = 0.0;
    Verdict verdict = Verdict::SatisfiedAtDeskScale;
};

/// p = (1 + eps)/(2 sqrt(1 + eps) - 1), q = (2 sqrt(1 + eps) - 1)/sqrt(1 + eps).
double novikov_p(double epsilon);
double novikov_q(double epsilon);

/// Exponential-moment check at M and 2M paths (the first M paths coincide).
/// Overflow gives the Diverging verdict rather than an exception; so does a
/// relative drift above `drift_tolerance` between the two path counts.
NovikovReport novikov_check(const ThetaSet& theta, const Integrand& h, double epsilon,
                            const montecarlo::ControlFamily& family,
                            const montecarlo::BundleParams& params,
                            double drift_tolerance = 0.01);

struct WeightedExpectationSpec {
    ThetaSet theta;
    Integrand h;
    montecarlo::ControlFamily family;
    std::vector<CylinderFunctional> battery;
    montecarlo::BundleParams params;
    /// Add one PDE-guided policy per battery functional to the family.
    bool pde_guided = true;
    /// Policies observe B_hat (the process whose law is being matched).
    stochcalc::Observe observe = stochcalc::Observe::Transformed;
    expectation::PlanOptions plan;
    double epsilon = 1.0;
    std::size_t novikov_paths = 20000;
    double novikov_drift = 0.01;
    double pde_tolerance = 2e-3;
    double se_multiplier = 3.0;
};

/// Throws ConfigurationError unless Theta carries a nondegeneracy floor, the
/// battery is nonempty and shapes agree.
void validate(const WeightedExpectationSpec& spec);

/// sup over the family of E_P[f(B_hat) D_T] with common random numbers;
/// `spec.battery` is replaced by {f}.
montecarlo::UpperEstimate weighted_expectation(const WeightedExpectationSpec& spec,
                                               const CylinderFunctional& f);

struct GirsanovRow {
    std::string name;
    montecarlo::UpperEstimate lhs;
    double rhs_pde = 0.0;
    montecarlo::UpperEstimate rhs_mc;
    double gap = 0.0;
    double band = 0.0;
    bool pass = false;
    std::vector<std::string> pde_warnings;
};

struct GirsanovReport {
    std::vector<GirsanovRow> rows;
    /// weighted mean of D_T (f = 1) per policy
    std::vector<montecarlo::EstimateWithError> normalization;
    NovikovReport novikov;
    bool all_pass = false;
};

/// Runs the Novikov check first (ConfigurationError on a Diverging verdict),
/// then compares Ehat[f(B_hat)] with the PDE value of E[f(B)] for every
/// functional in the battery, passing when the gap is within
/// se_multiplier * SE(lhs) + pde_tolerance.
GirsanovReport verify_girsanov(const WeightedExpectationSpec& spec);

} // namespace gexp::girsanov
