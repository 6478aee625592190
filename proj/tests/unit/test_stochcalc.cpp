#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gexp/errors.hpp"
#include "gexp/montecarlo/estimators.hpp"
#include "gexp/montecarlo/family.hpp"
#include "gexp/stochcalc/calculus.hpp"

using namespace gexp;
using namespace gexp::montecarlo;
using namespace gexp::stochcalc;

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

PathBundle bundle_for(const ThetaSet& theta, const Matrix& gamma, double T, std::size_t N,
                      std::size_t M, std::uint64_t seed = 11)
{
    const BundleParams p{TimeGrid(T, N), M, seed, 1};
    return simulate_law(ControlPolicy::constant(p.grid, theta, gamma), p);
}

bool within(const EstimateWithError& e, double target, double k = 3.0)
{
    return std::abs(e.value - target) <= k * e.std_error;
}

std::vector<double> terminal(const PathArray& a, std::size_t M, std::size_t N)
{
    std::vector<double> out(M);
    for (std::size_t p = 0; p < M; ++p) {
        out[p] = a[p * (N + 1) + N];
    }
    return out;
}

} // namespace

TEST_CASE("ito_integral examples")
{
    const auto theta = ThetaSet::singleton(Matrix::Identity(2, 2));
    const auto b = bundle_for(theta, Matrix::Identity(2, 2), 1.0, 32, 100);
    for (double v : ito_integral(Integrand::constant(vec({0.0, 0.0})), b)) {
        CHECK(v == 0.0);
    }
    const auto I = ito_integral(Integrand::constant(vec({1.0, 0.0})), b);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        const auto B = b.path(p);
        for (std::size_t k = 0; k <= 32; ++k) {
            CHECK(I[p * 33 + k] == doctest::Approx(B[2 * k]).epsilon(0).scale(1).epsilon(1e-13));
        }
    }

    const double c = 0.7;
    const auto one = ThetaSet::singleton(scalar(1.0));
    const auto b1 = bundle_for(one, scalar(1.0), 2.0, 50, 100000);
    const auto I1 = ito_integral(Integrand::constant(vec({c})), b1);
    auto sq = terminal(I1, b1.n_paths, 50);
    for (double& v : sq) {
        v *= v;
    }
    CHECK(within(summarize(sq, 0), c * c * 2.0));
}

TEST_CASE("integrand bound violations are reported")
{
    const auto one = ThetaSet::singleton(scalar(1.0));
    const auto b = bundle_for(one, scalar(1.0), 1.0, 10, 5);
    const auto liar = Integrand::markov(
        1, [](double, std::span<const double> x, std::span<double> out) { out[0] = 1.0 + std::abs(x[0]); },
        1.0, 1.0, "liar");
    CHECK_THROWS_AS(ito_integral(liar, b), IntegrandBoundError);
    CHECK_THROWS_AS(girsanov_transform(liar, b), IntegrandBoundError);
}

TEST_CASE("quadratic variation")
{
    // deterministic schedule in 2D: E<B>_T = sum gamma gamma^T dt
    const TimeGrid grid(1.0, 20);
    Matrix g1(2, 2);
    g1 << 1.0, 0.0, 0.5, 0.5;
    Matrix g2 = Matrix::Identity(2, 2) * 0.6;
    const auto theta = ThetaSet::finite({g1, g2});
    std::vector<Matrix> schedule(20, g1);
    for (std::size_t k = 10; k < 20; ++k) {
        schedule[k] = g2;
    }
    const BundleParams p{grid, 40000, 5, 1};
    const auto b = simulate_law(ControlPolicy::deterministic(grid, theta, schedule), p);
    const auto Q = quadratic_variation(b);
    const Matrix expected = 0.5 * g1 * g1.transpose() + 0.5 * g2 * g2.transpose();
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            std::vector<double> v(p.n_paths);
            for (std::size_t m = 0; m < p.n_paths; ++m) {
                v[m] = Q[(m * 21 + 20) * 4 + i * 2 + j];
            }
            CHECK(within(summarize(v, 0), expected(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
    }

    // realised variance per path in 1D
    const double sigma = 0.8;
    const std::size_t N = 2000;
    const auto b1 = bundle_for(ThetaSet::singleton(scalar(sigma)), scalar(sigma), 1.0, N, 1000);
    const auto Q1 = quadratic_variation(b1);
    for (std::size_t m = 0; m < b1.n_paths; ++m) {
        const double rv = Q1[m * (N + 1) + N];
        CHECK(std::abs(rv - sigma * sigma) <= 6.0 * sigma * sigma * std::sqrt(2.0 / N));
    }

    // discrete integration by parts: B_T B_T^T - sum B (x) dB - sum dB (x) B = sum dB dB^T
    for (std::size_t m = 0; m < 50; ++m) {
        const auto B = b.path(m);
        Eigen::Matrix2d lhs = Eigen::Matrix2d::Zero();
        lhs(0, 0) = B[40] * B[40];
        lhs(0, 1) = B[40] * B[41];
        lhs(1, 0) = B[41] * B[40];
        lhs(1, 1) = B[41] * B[41];
        for (std::size_t k = 0; k < 20; ++k) {
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    const double dBi = B[2 * (k + 1) + i] - B[2 * k + i];
                    const double dBj = B[2 * (k + 1) + j] - B[2 * k + j];
                    lhs(i, j) -= B[2 * k + i] * dBj + dBi * B[2 * k + j];
                }
            }
        }
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                CHECK(lhs(i, j) == doctest::Approx(Q[(m * 21 + 20) * 4 + i * 2 + j]).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("girsanov_transform examples")
{
    const auto one = ThetaSet::singleton(scalar(1.0));
    const auto b = bundle_for(one, scalar(1.0), 1.0, 50, 100000);
    const auto id = girsanov_transform(Integrand::constant(vec({0.0})), b);
    CHECK(std::all_of(id.D.begin(), id.D.end(), [](double d) { return d == 1.0; }));
    CHECK(id.B_hat == b.B);

    const double mu = 0.8;
    const auto g = girsanov_transform(Integrand::constant(vec({mu})), b);
    const auto DT = terminal(g.D, b.n_paths, 50);
    CHECK(within(summarize(DT, 0), 1.0));
    std::vector<double> bhat(b.n_paths);
    std::vector<double> logw(b.n_paths);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        bhat[p] = g.B_hat[p * 51 + 50];
        logw[p] = g.log_D[p * 51 + 50];
        CHECK(g.D[p * 51] == 1.0);
        CHECK(g.B_hat[p * 51] == 0.0);
    }
    CHECK(within(weighted_estimate(bhat, logw, 0), 0.0));
    for (std::size_t i = 0; i < g.D.size(); i += 997) {
        CHECK(g.D[i] > 0.0);
        CHECK(g.D[i] == std::exp(g.ito[i] - 0.5 * g.qv_form[i]));
    }
}

TEST_CASE("density stays a mean-one martingale under every policy")
{
    const TimeGrid grid(1.0, 40);
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const auto fam = bang_bang_family(grid, theta, 2).merged_with(random_schedule_family(grid, theta, 2, 8));
    const auto h = Integrand::tanh(vec({1.0}));
    for (const auto& pol : fam.policies()) {
        const auto b = simulate_law(pol, BundleParams{grid, 40000, 21, 1});
        const auto g = girsanov_transform(h, b);
        for (std::size_t k = 5; k <= 40; k += 5) {
            std::vector<double> d(b.n_paths);
            for (std::size_t p = 0; p < b.n_paths; ++p) {
                d[p] = g.D[p * 41 + k];
            }
            CHECK(within(summarize(d, 0), 1.0));
        }
    }
}

TEST_CASE("decomposition, quadratic variation of B_hat and adaptedness")
{
    const std::size_t N = 200;
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const auto b = bundle_for(theta, scalar(1.0), 1.0, N, 300);
    const auto h = Integrand::tanh(vec({1.5}));
    const auto g = girsanov_transform(h, b);
    const double dt = 1.0 / N;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        const auto B = b.path(p);
        double ito_hat = 0.0;
        double corr = 0.0;
        double qb = 0.0;
        double qh = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            double hv;
            h.evaluate(b.grid.time(k), B.subspan(k, 1), std::span<double>(&hv, 1));
            const double dB = B[k + 1] - B[k];
            const double dBh = g.B_hat[p * (N + 1) + k + 1] - g.B_hat[p * (N + 1) + k];
            ito_hat += hv * dBh;
            corr += hv * dB * dB * hv;
            qb += dB * dB;
            qh += dBh * dBh;
        }
        CHECK(ito_hat + corr == doctest::Approx(g.ito[p * (N + 1) + N]).epsilon(0).scale(1).epsilon(1e-12));
        CHECK(std::abs(qh - qb) <= 46.0 * 1.5 * dt);
    }

    // permuting increments after step k leaves ito up to k unchanged
    const std::size_t k = 120;
    PathBundle shuffled = b;
    std::mt19937_64 rng(3);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        std::vector<double> inc;
        for (std::size_t s = k; s < N; ++s) {
            inc.push_back(b.B[p * (N + 1) + s + 1] - b.B[p * (N + 1) + s]);
        }
        std::shuffle(inc.begin(), inc.end(), rng);
        for (std::size_t s = k; s < N; ++s) {
            shuffled.B[p * (N + 1) + s + 1] = shuffled.B[p * (N + 1) + s] + inc[s - k];
        }
    }
    const auto I0 = ito_integral(h, b);
    const auto I1 = ito_integral(h, shuffled);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        for (std::size_t s = 0; s <= k; ++s) {
            CHECK(I0[p * (N + 1) + s] == I1[p * (N + 1) + s]);
        }
    }
}

TEST_CASE("streaming transform matches the bundle transform")
{
    const BundleParams p{TimeGrid(1.0, 30), 50, 4, 1};
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const auto pol = ControlPolicy::constant(p.grid, theta, scalar(0.75));
    const auto h = Integrand::tanh(vec({0.9}));
    const auto b = simulate_law(pol, p);
    const auto g = girsanov_transform(h, b);
    PathTransform t(30, 1);
    Matrix scratch(1, 1);
    for (std::size_t m = 0; m < p.n_paths; ++m) {
        simulate_transformed_path(pol, h, b.increments(m), Observe::Original, m, t, scratch);
        for (std::size_t k = 0; k <= 30; ++k) {
            CHECK(t.B[k] == b.B[m * 31 + k]);
            // the bundle differences B to recover dB, so only the last bits may differ
            CHECK(std::abs(t.B_hat[k] - g.B_hat[m * 31 + k]) <= 1e-12);
            CHECK(std::abs(t.log_density(k) - g.log_D[m * 31 + k]) <= 1e-12);
        }
    }
}

TEST_CASE("density overflow is reported with diagnostics")
{
    const std::size_t N = 2000;
    PathBundle b{TimeGrid(1.0, N), 1, 0, 1, std::vector<double>(N, 1.0), std::vector<double>(N + 1)};
    for (std::size_t k = 0; k <= N; ++k) {
        b.B[k] = static_cast<double>(k);
    }
    try {
        girsanov_transform(Integrand::constant(vec({1.0})), b);
        FAIL("expected overflow");
    } catch (const DensityOverflowError& e) {
        CHECK(e.path() == 0);
        CHECK(e.ito() > 700.0);
    }
    const double v[] = {1.0, 2.0};
    const double lw[] = {800.0, 0.0};
    CHECK_THROWS_AS(weighted_estimate(v, lw, 0), DensityOverflowError);
    const double small[] = {-800.0, 1.0};
    CHECK(weighted_estimate(v, small, 0).value == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}
