#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gexp/errors.hpp"
#include "gexp/girsanov/girsanov.hpp"
#include "gexp/model/payoffs.hpp"

using namespace gexp;
using namespace gexp::montecarlo;
using namespace gexp::girsanov;

namespace {

Matrix scalar(double v)
{
    return Matrix::Constant(1, 1, v);
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

CylinderFunctional payoff(const std::string& kind, std::vector<double> times, double strike = 0.0,
                          std::size_t dim = 1)
{
    PayoffSpec s;
    s.kind = kind;
    s.times = std::move(times);
    s.strike = strike;
    return make_functional(s, dim);
}

CylinderFunctional increment(const std::string& inner_kind, double s, double t)
{
    PayoffSpec in;
    in.kind = inner_kind;
    PayoffSpec out;
    out.kind = "increment";
    out.times = {s, t};
    out.inner = std::make_shared<const PayoffSpec>(in);
    return make_functional(out, 1);
}

ControlFamily interval_family(const TimeGrid& grid, const ThetaSet& theta)
{
    return bang_bang_family(grid, theta, 2).merged_with(random_schedule_family(grid, theta, 4, 3));
}

WeightedExpectationSpec make_spec(const ThetaSet& theta, Integrand h, std::size_t M,
                                  std::size_t N = 50)
{
    const TimeGrid grid(1.0, N);
    const BundleParams params{grid, M, 2024, 1};
    ControlFamily family = theta.kind() == ThetaSet::Kind::Singleton
                               ? ControlFamily({ControlPolicy::constant(grid, theta, theta.extreme_points()[0])},
                                               ControlFamily::Mode::BangBang)
                               : interval_family(grid, theta);
    WeightedExpectationSpec spec{theta, std::move(h), family, {}, params};
    spec.plan.spacing = 0.02;
    spec.pde_guided = theta.kind() != ThetaSet::Kind::Singleton;
    return spec;
}

bool within(const EstimateWithError& e, double target, double k = 3.0)
{
    return std::abs(e.value - target) <= k * e.std_error;
}

} // namespace

TEST_CASE("Novikov exponents")
{
    CHECK(novikov_p(3.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(novikov_q(3.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(novikov_p(3.0) * novikov_q(3.0) == doctest::Approx(2.0).epsilon(1e-15));
    for (double eps : {0.1, 1.0, 3.0, 0.01, 50.0}) {
        const double p = novikov_p(eps);
        const double q = novikov_q(eps);
        CHECK(p > 1.0);
        CHECK(q > 1.0);
        const double pq = p * q;
        CHECK(std::abs(pq * pq / (1.0 + eps) - 1.0) <= 1e-12);
        CHECK(std::abs(pq * (pq - 1.0) / (q - 1.0) / (1.0 + eps) - 1.0) <= 1e-12);
    }
}

TEST_CASE("novikov_check")
{
    const TimeGrid grid(1.0, 20);
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const auto fam = interval_family(grid, theta);
    const BundleParams params{grid, 20000, 9, 1};

    const auto zero = novikov_check(theta, Integrand::constant(vec({0.0})), 1.0, fam, params);
    CHECK(zero.sup_estimate.value == 1.0);
    CHECK(zero.verdict == NovikovReport::Verdict::SatisfiedAtDeskScale);
    CHECK(zero.identity_error <= 1e-12);
    CHECK(zero.p == doctest::Approx(novikov_p(1.0)));

    // a constant h at sigma_high saturates the discrete bound: E exp(c H^2 s^2 chi2_N dt)
    const auto flat = novikov_check(theta, Integrand::constant(vec({0.7})), 1.0, fam, params);
    CHECK(flat.verdict == NovikovReport::Verdict::SatisfiedAtDeskScale);
    CHECK(flat.sup_estimate.value <= flat.discrete_bound + 3.0 * flat.sup_estimate.std_error);
    CHECK(within(flat.sup_estimate, flat.discrete_bound, 4.0));
    // -N/2 log(1 - x) exceeds N x / 2 by about N x^2 / 4
    const double x = 2.0 * 0.49 / 20.0;
    CHECK(flat.discrete_bound >= flat.continuous_bound);
    CHECK(flat.discrete_bound <= flat.continuous_bound * std::exp(20.0 * x * x / 2.0));
    CHECK(flat.sup_policy == "bang-bang[1,1]");
    for (const auto& m : flat.moments) {
        CHECK(m.finite);
        CHECK(m.drift < 0.01);
    }

    const auto bounded = novikov_check(theta, Integrand::tanh(vec({0.7})), 1.0, fam, params);
    CHECK(bounded.sup_estimate.value < bounded.discrete_bound);

    const auto wild = novikov_check(theta, Integrand::constant(vec({60.0})), 1.0, fam, params);
    CHECK(std::isinf(wild.discrete_bound));
    CHECK(wild.verdict == NovikovReport::Verdict::Diverging);

    CHECK_THROWS_AS(novikov_check(theta, Integrand::constant(vec({0.0})), 0.0, fam, params), InputError);
}

TEST_CASE("weighted_expectation examples")
{
    const auto theta = ThetaSet::interval(0.5, 1.0).with_floor(0.25);
    const auto call = payoff("call", {1.0});

    auto spec = make_spec(theta, Integrand::constant(vec({0.0})), 20000);
    spec.pde_guided = false;
    const auto w0 = weighted_expectation(spec, call);
    const auto u0 = upper_expectation(spec.family, call, spec.params);
    CHECK(w0.estimate.value == u0.estimate.value);
    CHECK(w0.estimate.std_error == u0.estimate.std_error);
    CHECK(w0.argmax == u0.argmax);

    auto spec1 = make_spec(theta, Integrand::constant(vec({1.0})), 20000);
    spec1.pde_guided = false;
    const CylinderFunctional c({1.0}, 1, [](std::span<const double>) { return 2.5; }, 0.0, 2.5, "const");
    const auto wc = weighted_expectation(spec1, c);
    for (const auto& e : wc.per_policy) {
        CHECK(within(e, 2.5));
    }

    const auto classical = ThetaSet::singleton(scalar(1.0)).with_floor(1.0);
    auto spec2 = make_spec(classical, Integrand::constant(vec({0.8})), 100000);
    const auto wx = weighted_expectation(spec2, payoff("identity", {1.0}));
    CHECK(within(wx.estimate, 0.0));
}

TEST_CASE("weighted_expectation is sublinear under common random numbers")
{
    const auto theta = ThetaSet::interval(0.5, 1.0).with_floor(0.25);
    auto spec = make_spec(theta, Integrand::tanh(vec({1.0})), 5000);
    spec.pde_guided = false;
    const auto f = payoff("call", {1.0}, 0.2);
    const auto g = payoff("neg_square", {0.5});
    const CylinderFunctional sum({0.5, 1.0}, 1,
                                 [&](std::span<const double> x) {
                                     return f(x.subspan(1, 1)) + g(x.subspan(0, 1));
                                 });
    const CylinderFunctional twice({1.0}, 1, [&](std::span<const double> x) { return 2.0 * f(x); });
    const double ef = weighted_expectation(spec, f).estimate.value;
    const double eg = weighted_expectation(spec, g).estimate.value;
    CHECK(weighted_expectation(spec, sum).estimate.value <= ef + eg + 1e-12);
    CHECK(weighted_expectation(spec, twice).estimate.value == doctest::Approx(2.0 * ef).epsilon(1e-12));
}

TEST_CASE("validation")
{
    const auto theta = ThetaSet::interval(0.5, 1.0);
    auto spec = make_spec(theta.with_floor(0.25), Integrand::constant(vec({1.0})), 100);
    CHECK_THROWS_AS(verify_girsanov(spec), ConfigurationError);
    try {
        verify_girsanov(spec);
    } catch (const ConfigurationError& e) {
        CHECK(std::string(e.what()) == "battery must be nonempty");
    }
    auto nofloor = make_spec(theta, Integrand::constant(vec({1.0})), 100);
    nofloor.battery = {payoff("square", {1.0})};
    CHECK_THROWS_AS(verify_girsanov(nofloor), ConfigurationError);

    auto wild = make_spec(theta.with_floor(0.25), Integrand::constant(vec({60.0})), 2000, 20);
    wild.battery = {payoff("square", {1.0})};
    CHECK_THROWS_AS(verify_girsanov(wild), ConfigurationError);
}

TEST_CASE("verify_girsanov: classical case")
{
    const auto theta = ThetaSet::singleton(scalar(1.0)).with_floor(1.0);
    // the realised-variance scheme biases E_Q[B_hat_T^2] by -3 h^2 dt, so dt must be small
    auto spec = make_spec(theta, Integrand::constant(vec({0.8})), 100000, 500);
    spec.battery = {payoff("square", {1.0}), payoff("identity", {1.0}), payoff("call", {0.5}, 0.1)};
    const auto r = verify_girsanov(spec);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].rhs_pde == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.rows[0].gap <= 3.0 * r.rows[0].lhs.estimate.std_error + 1e-6);
    CHECK(r.all_pass);
    for (const auto& n : r.normalization) {
        CHECK(within(n, 1.0));
    }
}

TEST_CASE("verify_girsanov: volatility uncertainty")
{
    const auto theta = ThetaSet::interval(0.5, 1.0).with_floor(0.25);

    auto zero = make_spec(theta, Integrand::constant(vec({0.0})), 20000);
    zero.battery = {payoff("call", {1.0}), payoff("neg_square", {1.0})};
    const auto r0 = verify_girsanov(zero);
    for (const auto& row : r0.rows) {
        CHECK(row.lhs.estimate.value == row.rhs_mc.estimate.value);
    }
    CHECK(r0.all_pass);

    auto one = make_spec(theta, Integrand::constant(vec({1.0})), 40000, 400);
    PayoffSpec kink;
    kink.kind = "kink";
    kink.times = {1.0};
    one.battery = {payoff("call", {1.0}), make_functional(kink, 1), increment("square", 0.2, 1.0),
                   payoff("put", {0.5}, -0.2)};
    const auto r1 = verify_girsanov(one);
    CHECK(r1.rows[0].rhs_pde == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(2e-3));
    for (const auto& row : r1.rows) {
        INFO(row.name << " gap " << row.gap << " band " << row.band);
        CHECK(row.pass);
    }
    for (const auto& n : r1.normalization) {
        CHECK(within(n, 1.0));
    }
}

TEST_CASE("stationary increments under the weighted expectation")
{
    const auto theta = ThetaSet::interval(0.5, 1.0).with_floor(0.25);
    auto spec = make_spec(theta, Integrand::constant(vec({1.0})), 40000, 400);
    spec.battery = {increment("call", 0.4, 1.0), payoff("call", {0.6})};
    const auto r = verify_girsanov(spec);
    const auto& a = r.rows[0].lhs.estimate;
    const auto& b = r.rows[1].lhs.estimate;
    CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.std_error, b.std_error) + 2e-3);
    CHECK(r.all_pass);
}

TEST_CASE("verify_girsanov: two dimensions")
{
    Matrix g1 = Matrix::Zero(2, 2);
    g1.diagonal() << 0.5, 1.0;
    Matrix g2 = Matrix::Zero(2, 2);
    g2.diagonal() << 1.0, 0.5;
    const auto theta = ThetaSet::finite({g1, g2}).with_floor(0.25);
    const TimeGrid grid(1.0, 400);
    const BundleParams params{grid, 20000, 77, 1};
    WeightedExpectationSpec spec{theta, Integrand::constant(vec({1.0, 0.0})),
                                bang_bang_family(grid, theta, 2), {}, params};
    spec.plan.spacing = 0.1;
    spec.battery = {payoff("square", {1.0}, 0.0, 2)};
    const auto r = verify_girsanov(spec);
    // |x|^2 is linear in the covariance: sup of tr(gamma gamma^T) T = 1.25
    CHECK(r.rows[0].rhs_pde == doctest::Approx(1.25).epsilon(1e-6));
    INFO("gap " << r.rows[0].gap << " band " << r.rows[0].band);
    CHECK(r.all_pass);
}
