// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gexp/cli/run.hpp"
#include "gexp/expectation/recursion.hpp"
#include "gexp/girsanov/girsanov.hpp"
#include "gexp/model/payoffs.hpp"
#include "gexp/montecarlo/estimators.hpp"
#include "gexp/montecarlo/family.hpp"
#include "gexp/stochcalc/calculus.hpp"
#include "oracles.hpp"

#include <spdlog/spdlog.h>

using namespace gexp;
using namespace gexp::montecarlo;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[1024];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

PayoffSpec spec(const std::string& kind, std::vector<double> times, double strike = 0.0,
                double width = 1.0)
{
    PayoffSpec s;
    s.kind = kind;
    s.times = std::move(times);
    s.strike = strike;
    s.width = width;
    return s;
}

PayoffSpec nested(const std::string& kind, std::vector<double> times, PayoffSpec inner)
{
    PayoffSpec s;
    s.kind = kind;
    s.times = std::move(times);
    s.inner = std::make_shared<const PayoffSpec>(std::move(inner));
    return s;
}

cli::RunConfig load(const std::string& name)
{
    std::ifstream in(std::string(GEXP_CONFIG_DIR) + "/" + name);
    return cli::parse_config(json::parse(in));
}

Vector vec1(double v)
{
    return Vector::Constant(1, v);
}

// 1. x^2 and -x^2 are solved exactly by the G-heat equation.
Outcome polynomial_exactness()
{
    Clock clock;
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const double up = expectation::g_expectation(theta, make_functional(spec("square", {1.0}), 1), expectation::PlanOptions{}).value;
    const double down = expectation::g_expectation(theta, make_functional(spec("neg_square", {1.0}), 1), expectation::PlanOptions{}).value;
    const double t = clock.seconds();
    const bool pass = std::abs(up - 1.0) <= 1e-3 && std::abs(down + 0.25) <= 1e-3 && t < 5.0;
    return {pass, fmt("E[x^2] = %.9f (err %.1e), E[-x^2] = %.9f (err %.1e), %.2f s", up,
                      std::abs(up - 1.0), down, std::abs(down + 0.25), t)};
}

// 2. Convex payoff reduces to the classical price at sigma_high.
Outcome convex_reduction()
{
    Clock clock;
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const auto call = make_functional(spec("call", {1.0}), 1);
    const double oracle = oracle::gaussian_expectation_piecewise([](double x) { return std::max(x, 0.0); },
                                                                 0.0, 1.0, {0.0});
    const double pde = expectation::g_expectation(theta, call, expectation::PlanOptions{}).value;
    const TimeGrid grid(1.0, 50);
    const auto mc = upper_expectation(bang_bang_family(grid, theta, 2), call,
                                      BundleParams{grid, 100000, kSeed, 0});
    const double t = clock.seconds();
    const double se = mc.estimate.std_error;
    const bool pass = std::abs(pde - oracle) <= 2e-3 && std::abs(mc.estimate.value - pde) <= 3.0 * se
                      && t < 30.0;
    return {pass, fmt("oracle %.6f (1/sqrt(2pi) = %.6f), PDE %.6f (err %.1e), MC-upper %.6f "
                      "(|gap| = %.2f SE, argmax %s), %.1f s",
                      oracle, 1.0 / std::sqrt(2.0 * std::numbers::pi), pde, std::abs(pde - oracle),
                      mc.estimate.value, std::abs(mc.estimate.value - pde) / se,
                      mc.argmax_name.c_str(), t)};
}

// 3. MC-upper sits below the PDE value and the PDE-guided policy closes the gap.
Outcome backend_agreement()
{
    Clock clock;
    const auto config = load("mc-backends.json");
    const auto result = cli::run(config);
    bool pass = config.battery.size() >= 10;
    double worst_above = -1e300;
    double worst_rel = -1e300;
    std::string worst;
    for (const auto& row : result.report["results"]) {
        const double mc = row["upper"]["value"];
        const double se = row["upper"]["se"];
        const double pde = row["rhs_pde"];
        const double above = mc - pde - 3.0 * se - 1e-3;
        const double rel = (pde - mc) / std::abs(pde);
        pass = pass && above <= 0.0 && rel <= 0.02;
        worst_above = std::max(worst_above, mc - pde);
        if (rel > worst_rel) {
            worst_rel = rel;
            worst = row["name"];
        }
    }
    return {pass, fmt("%zu functionals; max(MC - PDE) = %.2e; max (PDE - MC)/|PDE| = %.2f%% (%s), %.1f s",
                      config.battery.size(), worst_above, 100.0 * worst_rel, worst.c_str(),
                      clock.seconds())};
}

// 4. The Girsanov experiments shipped as configs.
Outcome girsanov_theorem()
{
    Clock clock;
    bool pass = true;
    std::string detail;
    for (const char* name : {"classical-girsanov.json", "interval-girsanov.json", "girsanov-2d.json"}) {
        Clock one;
        const auto result = cli::run(load(name));
        double worst = 0.0;
        std::size_t rows = 0;
        for (const auto& row : result.report["results"]) {
            const double gap = row["gap"];
            const double band = row["band"];
            worst = std::max(worst, gap / band);
            pass = pass && gap <= band;
            ++rows;
        }
        detail += fmt("%s: %zu rows, max gap/band %.2f, %.0f s; ", name, rows, worst, one.seconds());
    }
    const double t = clock.seconds();
    pass = pass && t < 300.0;
    return {pass, detail + fmt("total %.0f s", t)};
}

// 5. D is a mean-one martingale under every policy.
Outcome density_martingale()
{
    Clock clock;
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const TimeGrid grid(1.0, 80);
    const auto family = bang_bang_family(grid, theta, 2).merged_with(random_schedule_family(grid, theta, 4, 1));
    const auto h = Integrand::constant(vec1(1.0));
    const BundleParams params{grid, 100000, kSeed, 0};
    const std::size_t P = family.size();
    // D at steps 10, 20, ..., 80
    std::vector<std::vector<std::vector<double>>> D(P, std::vector<std::vector<double>>(8, std::vector<double>(params.n_paths)));
    for_each_path(params, 1, [&](std::size_t p, std::span<const double> dW) {
        stochcalc::PathTransform t(grid.n_steps(), 1);
        Matrix scratch(1, 1);
        for (std::size_t q = 0; q < P; ++q) {
            stochcalc::simulate_transformed_path(family.policies()[q], h, dW, stochcalc::Observe::Original, p, t, scratch);
            for (std::size_t j = 0; j < 8; ++j) {
                D[q][j][p] = std::exp(t.log_density(10 * (j + 1)));
            }
        }
    });
    double worst = 0.0;
    std::size_t failures = 0;
    for (std::size_t q = 0; q < P; ++q) {
        for (std::size_t j = 0; j < 8; ++j) {
            const auto e = summarize(D[q][j], kSeed);
            const double z = std::abs(e.value - 1.0) / e.std_error;
            worst = std::max(worst, z);
            failures += z > 3.0 ? 1 : 0;
        }
    }
    return {failures == 0, fmt("%zu policies x 8 times, max |mean D - 1| = %.2f SE, %zu above 3 SE, %.1f s",
                               P, worst, failures, clock.seconds())};
}

// 6. Realised <B_hat>_T against C T (1 + 5%).
Outcome qv_bound()
{
    Clock clock;
    const auto theta = ThetaSet::interval(0.5, 1.0);
    const double C = theta.max_qv_diagonal();
    const auto h = Integrand::constant(vec1(1.0));
    const std::size_t M = 20000;
    double frac[2] = {0.0, 0.0};
    double worst_policy[2] = {0.0, 0.0};
    std::size_t total[2] = {0, 0};
    double trials[2] = {0.0, 0.0};
    for (int r = 0; r < 2; ++r) {
        const std::size_t N = r == 0 ? 4096 : 8192;
        const TimeGrid grid(1.0, N);
        const auto family = bang_bang_family(grid, theta, 2).merged_with(random_schedule_family(grid, theta, 2, 1));
        const std::size_t P = family.size();
        std::vector<std::vector<char>> bad(P, std::vector<char>(M, 0));
        for_each_path(BundleParams{grid, M, kSeed, 0}, 1, [&](std::size_t p, std::span<const double> dW) {
            stochcalc::PathTransform t(N, 1);
            Matrix scratch(1, 1);
            for (std::size_t q = 0; q < P; ++q) {
                stochcalc::simulate_transformed_path(family.policies()[q], h, dW, stochcalc::Observe::Original, p, t, scratch);
                double qv = 0.0;
                for (std::size_t k = 0; k < N; ++k) {
                    const double d = t.B_hat[k + 1] - t.B_hat[k];
                    qv += d * d;
                }
                bad[q][p] = qv > 1.05 * C * grid.horizon();
            }
        });
        for (std::size_t q = 0; q < P; ++q) {
            const auto n = static_cast<std::size_t>(std::count(bad[q].begin(), bad[q].end(), 1));
            total[r] += n;
            worst_policy[r] = std::max(worst_policy[r], static_cast<double>(n) / M);
        }
        trials[r] = static_cast<double>(M * P);
        frac[r] = static_cast<double>(total[r]) / trials[r];
    }
    // binomial noise on the halving check
    const double se = std::sqrt(frac[0] / trials[0] + frac[1] / trials[1]);
    const bool small = frac[0] < 1e-3;
    const bool halves = frac[1] <= 0.5 * frac[0] + 2.0 * se;
    return {small && halves,
            fmt("violation fraction %.2e at N=4096 (worst policy %.2e; need < 1e-3: %s), %.2e at N=8192 "
                "(worst policy %.2e; halves: %s), %.0f s",
                frac[0], worst_policy[0], small ? "yes" : "no", frac[1], worst_policy[1],
                halves ? "yes" : "no", clock.seconds())};
}

// 7. Novikov exponents and a stable exponential moment.
Outcome novikov()
{
    Clock clock;
    double worst_identity = 0.0;
    for (double eps : {0.1, 1.0, 3.0}) {
        const double p = girsanov::novikov_p(eps);
        const double q = girsanov::novikov_q(eps);
        const double pq = p * q;
        worst_identity = std::max(worst_identity, std::abs(pq * pq - (1.0 + eps)) / (1.0 + eps));
        worst_identity = std::max(worst_identity, std::abs(pq * (pq - 1.0) / (q - 1.0) - (1.0 + eps)) / (1.0 + eps));
    }
    const auto r = cli::run(load("novikov.json"));
    const auto& nov = r.report["novikov"];
    const double drift = nov["max_drift"];
    const double sup = nov["sup_estimate"]["value"];
    const double bound = nov["discrete_bound"];
    const bool pass = worst_identity <= 1e-12 && drift < 0.01 && nov["verdict"] == "satisfied-at-desk-scale";
    return {pass, fmt("max relative identity error %.1e; sup moment %.5f (bound %.5f), max drift %.2e, %.1f s",
                      worst_identity, sup, bound, drift, clock.seconds())};
}

// 8. Sublinearity of the estimators and of the PDE backend.
Outcome sublinearity()
{
    Clock clock;
    const auto theta = ThetaSet::interval(0.5, 1.0).with_floor(0.25);
    const TimeGrid grid(1.0, 50);
    const BundleParams params{grid, 20000, kSeed, 0};
    const auto family = bang_bang_family(grid, theta, 2).merged_with(random_schedule_family(grid, theta, 4, 1));
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    auto random_payoff = [&](double t) {
        const double a = U(rng);
        const double b = U(rng);
        const double k1 = 0.8 * U(rng);
        const double k2 = 0.8 * U(rng);
        return CylinderFunctional({0.5, t}, 1, [=](std::span<const double> x) {
            return a * std::max(x[1] - k1, 0.0) + b * std::max(k2 - x[0], 0.0) + 0.3 * a * b * std::tanh(x[1]);
        });
    };

    // exact common-random-number identities, up to 1e-12 relative
    double worst_sub = -1e300;
    double worst_hom = 0.0;
    const auto h = Integrand::tanh(vec1(1.0));
    girsanov::WeightedExpectationSpec ws{theta, h, family, {}, params, false};
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_payoff(1.0);
        const auto g = random_payoff(1.0);
        const double lam = 0.1 + 3.0 * (U(rng) + 1.0);
        const CylinderFunctional sum({0.5, 1.0}, 1, [&](std::span<const double> x) { return f(x) + g(x); });
        const CylinderFunctional scaled({0.5, 1.0}, 1, [&](std::span<const double> x) { return lam * f(x); });
        const std::vector<CylinderFunctional> battery{f, g, sum, scaled};
        const auto u = upper_expectation(family, battery, params);
        const double scale = std::abs(u[0].estimate.value) + std::abs(u[1].estimate.value) + 1e-300;
        worst_sub = std::max(worst_sub, (u[2].estimate.value - u[0].estimate.value - u[1].estimate.value) / scale);
        worst_hom = std::max(worst_hom, std::abs(u[3].estimate.value - lam * u[0].estimate.value) / (lam * scale));
        const double wf = girsanov::weighted_expectation(ws, f).estimate.value;
        const double wg = girsanov::weighted_expectation(ws, g).estimate.value;
        const double wsum = girsanov::weighted_expectation(ws, sum).estimate.value;
        const double wscaled = girsanov::weighted_expectation(ws, scaled).estimate.value;
        const double wscale = std::abs(wf) + std::abs(wg) + 1e-300;
        worst_sub = std::max(worst_sub, (wsum - wf - wg) / wscale);
        worst_hom = std::max(worst_hom, std::abs(wscaled - lam * wf) / (lam * wscale));
    }
    const bool exact = worst_sub <= 1e-12 && worst_hom <= 1e-12;

    // PDE backend on 100 random pairs f <= g
    expectation::PlanOptions plan;
    plan.spacing = 0.1;
    const double tol = 1e-9;
    double worst_mono = -1e300;
    double worst_const = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const bool two_time = pair % 5 == 0;
        const double a = U(rng);
        const double k = U(rng);
        const double c = U(rng);
        const double bump = 0.5 * (U(rng) + 1.0);
        const double kb = U(rng);
        auto base = [=](double x) { return a * std::max(x - k, 0.0) + 0.5 * std::sin(2.0 * c * x) - 0.2 * std::abs(x - c); };
        std::vector<double> times = two_time ? std::vector<double>{0.5, 1.0} : std::vector<double>{1.0};
        auto at = [two_time](std::span<const double> x) { return two_time ? x[1] - 0.5 * x[0] : x[0]; };
        const CylinderFunctional f(times, 1, [=](std::span<const double> x) { return base(at(x)); });
        const CylinderFunctional g(times, 1, [=](std::span<const double> x) {
            return base(at(x)) + bump * std::max(at(x) - kb, 0.0);
        });
        const CylinderFunctional shifted(times, 1, [=](std::span<const double> x) { return base(at(x)) + c; });
        const double ef = expectation::g_expectation(theta, f, plan).value;
        const double eg = expectation::g_expectation(theta, g, plan).value;
        const double es = expectation::g_expectation(theta, shifted, plan).value;
        worst_mono = std::max(worst_mono, ef - eg);
        worst_const = std::max(worst_const, std::abs(es - ef - c));
    }
    const bool pde = worst_mono <= tol && worst_const <= tol;
    return {exact && pde,
            fmt("CRN: max subadditivity excess %.1e, max homogeneity error %.1e (rel, 10 trials, MC and "
                "weighted); PDE on 100 pairs: max E[f]-E[g] = %.1e, max constant error %.1e; %.1f s",
                worst_sub, worst_hom, worst_mono, worst_const, clock.seconds())};
}

void compare_json(const json& a, const json& b, const std::string& path, double& worst, std::vector<std::string>& diffs)
{
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>();
        const double y = b.get<double>();
        const double rel = x == y ? 0.0 : std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
        worst = std::max(worst, rel);
        if (rel > 1e-10) {
            diffs.push_back(path);
        }
    } else if (a.is_object() && b.is_object()) {
        for (const auto& [key, value] : a.items()) {
            if (key == "threads") {
                continue;
            }
            if (!b.contains(key)) {
                diffs.push_back(path + "." + key);
                continue;
            }
            compare_json(value, b[key], path + "." + key, worst, diffs);
        }
    } else if (a.is_array() && b.is_array() && a.size() == b.size()) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            compare_json(a[i], b[i], path + "[" + std::to_string(i) + "]", worst, diffs);
        }
    } else if (a != b) {
        diffs.push_back(path);
    }
}

// 9. Worker count does not change any report value.
Outcome determinism()
{
    Clock clock;
    double worst = 0.0;
    std::vector<std::string> diffs;
    bool csv_equal = true;
    std::size_t runs = 0;
    for (const char* name : {"mc-backends.json", "classical-girsanov.json", "interval-girsanov.json",
                             "capacity.json", "novikov.json", "expect-battery.json"}) {
        auto config = load(name);
        config.paths = std::min<std::size_t>(config.paths, 4000);
        std::vector<json> reports;
        std::vector<std::string> csv;
        for (unsigned threads : {1u, 3u}) {
            config.threads = threads;
            std::ostringstream dump;
            reports.push_back(cli::run(config, &dump).report);
            csv.push_back(dump.str());
        }
        compare_json(reports[0], reports[1], std::string(name) + ":$", worst, diffs);
        csv_equal = csv_equal && csv[0] == csv[1];
        ++runs;
    }
    std::string first = diffs.empty() ? "none" : diffs.front();
    return {diffs.empty() && csv_equal,
            fmt("%zu configs at 1 and 3 workers: max relative difference %.1e, differing fields: %s, "
                "per-path CSV identical: %s, %.1f s",
                runs, worst, first.c_str(), csv_equal ? "yes" : "no", clock.seconds())};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"polynomial exactness", polynomial_exactness},
        {"convex-payoff reduction", convex_reduction},
        {"backend agreement", backend_agreement},
        {"Girsanov theorem", girsanov_theorem},
        {"density martingale", density_martingale},
        {"quadratic variation bound", qv_bound},
        {"Novikov identities and moment stability", novikov},
        {"sublinearity suite", sublinearity},
        {"determinism across worker counts", determinism},
    };
    spdlog::set_level(spdlog::level::warn);
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        wanted.insert(std::atoi(argv[i]));
    }
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!wanted.empty() && !wanted.count(id)) {
            continue;
        }
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
