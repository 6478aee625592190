#include "gexp/girsanov/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gexp/errors.hpp"
#include "gexp/util/parallel.hpp"
#include "gexp/util/summation.hpp"

namespace gexp::girsanov {

namespace {

/// Per-path samples [policy][path] of the exponent (1 + eps)/2 qv_form_T.
std::vector<std::vector<double>> novikov_exponents(const Integrand& h, double c,
                                                   const montecarlo::ControlFamily& family,
                                                   const montecarlo::BundleParams& params)
{
    const std::size_t d = family.theta().dim();
    const std::size_t N = params.grid.n_steps();
    std::vector<std::vector<double>> out(family.size(), std::vector<double>(params.n_paths));
    parallel_for(params.n_paths, params.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> dW(N * d);
        stochcalc::PathTransform path(N, d);
        Matrix scratch(d, d);
        for (std::size_t p = lo; p < hi; ++p) {
            montecarlo::draw_increments(params, d, p, dW);
            for (std::size_t q = 0; q < family.size(); ++q) {
                stochcalc::simulate_transformed_path(family.policies()[q], h, dW,
                                                     stochcalc::Observe::Original, p, path,
                                                     scratch);
                out[q][p] = c * path.qv_form[N];
            }
        }
    });
    return out;
}

/// Mean of exp(l_i) over the first `m` samples, in log space. Returns
/// finite = false on overflow.
montecarlo::EstimateWithError exp_mean(std::span<const double> l, std::uint64_t seed,
                                       bool& finite)
{
    finite = true;
    try {
        std::vector<double> ones(l.size(), 1.0);
        return stochcalc::weighted_estimate(ones, l, seed);
    } catch (const stochcalc::DensityOverflowError&) {
        finite = false;
        montecarlo::EstimateWithError e;
        e.value = std::numeric_limits<double>::infinity();
        e.std_error = std::numeric_limits<double>::infinity();
        e.n_paths = l.size();
        e.seed = seed;
        return e;
    }
}

struct WeightedSamples {
    // [function][policy][path]
    montecarlo::FamilyValues lhs;
    montecarlo::FamilyValues rhs;
    // [policy][path]
    std::vector<std::vector<double>> log_D;
};

WeightedSamples weighted_samples(const WeightedExpectationSpec& spec,
                                 const montecarlo::ControlFamily& family,
                                 const std::vector<CylinderFunctional>& battery)
{
    const auto& params = spec.params;
    const std::size_t d = family.theta().dim();
    const std::size_t N = params.grid.n_steps();
    const std::size_t P = family.size();
    const std::size_t F = battery.size();
    std::vector<montecarlo::PathFunction> fns;
    for (const auto& f : battery) {
        fns.push_back(montecarlo::on_path(f, params.grid));
    }
    WeightedSamples s;
    s.lhs.assign(F, std::vector<std::vector<double>>(P, std::vector<double>(params.n_paths)));
    s.rhs = s.lhs;
    s.log_D.assign(P, std::vector<double>(params.n_paths));
    parallel_for(params.n_paths, params.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> dW(N * d);
        stochcalc::PathTransform path(N, d);
        Matrix scratch(d, d);
        for (std::size_t p = lo; p < hi; ++p) {
            montecarlo::draw_increments(params, d, p, dW);
            for (std::size_t q = 0; q < P; ++q) {
                stochcalc::simulate_transformed_path(family.policies()[q], spec.h, dW, spec.observe,
                                                     p, path, scratch);
                s.log_D[q][p] = path.log_density(N);
                const PathView hat(path.B_hat, d, N);
                const PathView orig(path.B, d, N);
                for (std::size_t f = 0; f < F; ++f) {
                    s.lhs[f][q][p] = fns[f](hat);
                    s.rhs[f][q][p] = fns[f](orig);
                }
            }
        }
    });
    return s;
}

montecarlo::UpperEstimate weighted_upper(const montecarlo::ControlFamily& family,
                                         const std::vector<std::vector<double>>& values,
                                         const std::vector<std::vector<double>>& log_D,
                                         std::uint64_t seed)
{
    montecarlo::UpperEstimate u;
    for (std::size_t q = 0; q < values.size(); ++q) {
        u.per_policy.push_back(stochcalc::weighted_estimate(values[q], log_D[q], seed));
    }
    for (std::size_t q = 1; q < u.per_policy.size(); ++q) {
        if (u.per_policy[q].value > u.per_policy[u.argmax].value) {
            u.argmax = q;
        }
    }
    u.estimate = u.per_policy[u.argmax];
    u.argmax_name = family.policies()[u.argmax].name();
    return u;
}

montecarlo::ControlFamily augmented_family(const WeightedExpectationSpec& spec)
{
    montecarlo::ControlFamily family = spec.family;
    if (!spec.pde_guided) {
        return family;
    }
    for (const auto& f : spec.battery) {
        const auto plan = expectation::make_plan(spec.theta, f, spec.plan);
        family = family.merged_with(
            montecarlo::pde_guided_family(spec.params.grid, spec.theta, f, plan));
    }
    return family;
}

} // namespace

double novikov_p(double epsilon)
{
    const double r = std::sqrt(1.0 + epsilon);
    return (1.0 + epsilon) / (2.0 * r - 1.0);
}

double novikov_q(double epsilon)
{
    const double r = std::sqrt(1.0 + epsilon);
    return (2.0 * r - 1.0) / r;
}

NovikovReport novikov_check(const ThetaSet& theta, const Integrand& h, double epsilon,
                            const montecarlo::ControlFamily& family,
                            const montecarlo::BundleParams& params, double drift_tolerance)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InputError("novikov_check: epsilon must be a positive real");
    }
    if (h.dim() != theta.dim() || family.theta().dim() != theta.dim()) {
        throw InputError("novikov_check: integrand, family and Theta dimensions differ");
    }
    if (!(family.grid() == params.grid)) {
        throw InputError("novikov_check: family grid does not match the bundle grid");
    }
    NovikovReport r;
    r.epsilon = epsilon;
    r.p = novikov_p(epsilon);
    r.q = novikov_q(epsilon);
    const double pq = r.p * r.q;
    r.p2q2 = pq * pq;
    r.pq_ratio = pq * (pq - 1.0) / (r.q - 1.0);
    r.identity_error = std::max(std::abs(r.p2q2 - (1.0 + epsilon)),
                                std::abs(r.pq_ratio - (1.0 + epsilon)))
                       / (1.0 + epsilon);

    const double c = 0.5 * (1.0 + epsilon);
    const double H = h.bound();
    const double s2 = theta.max_variance();
    const double x = 2.0 * c * H * H * s2 * params.grid.dt();
    r.discrete_bound = x < 1.0 ? std::pow(1.0 - x, -0.5 * static_cast<double>(params.grid.n_steps()))
                               : std::numeric_limits<double>::infinity();
    r.continuous_bound = std::exp(c * H * H * s2 * params.grid.horizon());

    auto doubled = params;
    doubled.n_paths = 2 * params.n_paths;
    const auto samples = novikov_exponents(h, c, family, doubled);
    bool all_finite = true;
    std::size_t best = 0;
    for (std::size_t q = 0; q < family.size(); ++q) {
        NovikovPolicyMoment m;
        m.policy = family.policies()[q].name();
        bool f1 = true;
        bool f2 = true;
        const std::span<const double> all(samples[q]);
        m.at_m = exp_mean(all.first(params.n_paths), params.seed, f1);
        m.at_2m = exp_mean(all, params.seed, f2);
        m.finite = f1 && f2;
        m.drift = m.finite ? std::abs(m.at_2m.value - m.at_m.value) / m.at_2m.value
                           : std::numeric_limits<double>::infinity();
        all_finite = all_finite && m.finite;
        r.max_drift = std::max(r.max_drift, m.drift);
        r.moments.push_back(m);
        if (m.at_2m.value > r.moments[best].at_2m.value) {
            best = q;
        }
    }
    r.sup_estimate = r.moments[best].at_2m;
    r.sup_policy = r.moments[best].policy;
    r.verdict = all_finite && r.max_drift < drift_tolerance
                    ? NovikovReport::Verdict::SatisfiedAtDeskScale
                    : NovikovReport::Verdict::Diverging;
    return r;
}

void validate(const WeightedExpectationSpec& spec)
{
    if (!spec.theta.nondegeneracy_floor()) {
        throw ConfigurationError(
            "Girsanov experiment: Theta must declare a nondegeneracy floor sigma0");
    }
    if (spec.battery.empty()) {
        throw ConfigurationError("battery must be nonempty");
    }
    if (spec.h.dim() != spec.theta.dim() || !(spec.family.theta() == spec.theta)) {
        throw ConfigurationError("Girsanov experiment: integrand, family and Theta disagree");
    }
    if (!(spec.family.grid() == spec.params.grid)) {
        throw ConfigurationError("Girsanov experiment: family grid does not match the bundle grid");
    }
    if (!std::isfinite(spec.h.bound())) {
        throw ConfigurationError("Girsanov experiment: integrand must be bounded");
    }
    for (const auto& f : spec.battery) {
        if (f.dim() != spec.theta.dim()) {
            throw ConfigurationError("Girsanov experiment: functional dimension does not match Theta");
        }
    }
}

montecarlo::UpperEstimate weighted_expectation(const WeightedExpectationSpec& spec,
                                               const CylinderFunctional& f)
{
    const std::vector<CylinderFunctional> battery{f};
    auto s2 = spec;
    s2.battery = battery;
    validate(s2);
    const auto family = augmented_family(s2);
    const auto samples = weighted_samples(spec, family, battery);
    return weighted_upper(family, samples.lhs[0], samples.log_D, spec.params.seed);
}

GirsanovReport verify_girsanov(const WeightedExpectationSpec& spec)
{
    validate(spec);
    GirsanovReport report;
    auto nov_params = spec.params;
    nov_params.n_paths = std::max<std::size_t>(1, std::min(spec.novikov_paths, spec.params.n_paths));
    report.novikov = novikov_check(spec.theta, spec.h, spec.epsilon, spec.family, nov_params,
                                   spec.novikov_drift);
    if (report.novikov.verdict != NovikovReport::Verdict::SatisfiedAtDeskScale) {
        throw ConfigurationError("Girsanov experiment: G-Novikov check did not pass (max drift "
                                 + std::to_string(report.novikov.max_drift) + ")");
    }

    const auto family = augmented_family(spec);
    const auto samples = weighted_samples(spec, family, spec.battery);
    const std::vector<double> ones(spec.params.n_paths, 1.0);
    for (std::size_t q = 0; q < family.size(); ++q) {
        report.normalization.push_back(
            stochcalc::weighted_estimate(ones, samples.log_D[q], spec.params.seed));
    }

    report.all_pass = true;
    for (std::size_t f = 0; f < spec.battery.size(); ++f) {
        GirsanovRow row;
        row.name = spec.battery[f].name();
        row.lhs = weighted_upper(family, samples.lhs[f], samples.log_D, spec.params.seed);
        row.rhs_mc = montecarlo::upper_of(family, samples.rhs[f], spec.params.seed);
        const auto pde = expectation::g_expectation(spec.theta, spec.battery[f], spec.plan);
        row.rhs_pde = pde.value;
        row.pde_warnings = pde.warnings;
        row.gap = std::abs(row.lhs.estimate.value - row.rhs_pde);
        row.band = spec.se_multiplier * row.lhs.estimate.std_error + spec.pde_tolerance;
        row.pass = row.gap <= row.band;
        report.all_pass = report.all_pass && row.pass;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace gexp::girsanov
