#include <benchmark/benchmark.h>

#include "gexp/expectation/recursion.hpp"
#include "gexp/gheat/grid.hpp"
#include "gexp/gheat/solver.hpp"
#include "gexp/model/payoffs.hpp"
#include "gexp/montecarlo/estimators.hpp"
#include "gexp/montecarlo/family.hpp"
#include "gexp/girsanov/girsanov.hpp"

using namespace gexp;
using namespace gexp::montecarlo;

namespace {

PayoffSpec payoff(const std::string& kind, std::vector<double> times)
{
    PayoffSpec s;
    s.kind = kind;
    s.times = std::move(times);
    return s;
}

PayoffSpec increment_of(const std::string& kind, std::vector<double> times)
{
    PayoffSpec s = payoff("increment", std::move(times));
    s.inner = std::make_shared<const PayoffSpec>(payoff(kind, {}));
    return s;
}

ThetaSet theta_for(std::size_t dim)
{
    if (dim == 1) {
        return ThetaSet::interval(0.5, 1.0);
    }
    Matrix a = Matrix::Identity(2, 2);
    Matrix b = Matrix::Identity(2, 2);
    a(0, 0) = 0.25;
    b(1, 1) = 0.25;
    return ThetaSet::finite({a, b});
}

// range(0): dimension, range(1): spacing in thousandths
void BM_GHeatSolve(benchmark::State& state)
{
    const auto dim = static_cast<std::size_t>(state.range(0));
    const double spacing = static_cast<double>(state.range(1)) / 1000.0;
    const auto theta = theta_for(dim);
    const auto f = make_functional(payoff("call", {1.0}), dim);
    const auto grid = gheat::SpatialGrid::covering(theta, 1.0, 1.0, spacing);
    const double dt = 0.9 * gheat::max_stable_dt(theta, grid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gheat::solve_gheat(theta, f, grid, 1.0, dt));
    }
    state.counters["nodes"] = static_cast<double>(grid.total_nodes());
}
BENCHMARK(BM_GHeatSolve)->Args({1, 10})->Args({1, 5})->Args({2, 100})->Args({2, 50})->Unit(benchmark::kMillisecond);

// two-time functional: one anchored stage per PDE node
void BM_Recursion(benchmark::State& state)
{
    const auto theta = theta_for(1);
    const auto f = make_functional(increment_of("call", {0.5, 1.0}), 1);
    expectation::PlanOptions options;
    options.spacing = static_cast<double>(state.range(0)) / 1000.0;
    options.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(expectation::g_expectation(theta, f, options).value);
    }
}
BENCHMARK(BM_Recursion)->Arg(50)->Arg(20)->Unit(benchmark::kMillisecond);

// path-steps per second, plain schedules against the PDE-guided policy
void BM_PathSimulation(benchmark::State& state)
{
    const bool guided = state.range(0) != 0;
    const auto theta = theta_for(1);
    const TimeGrid grid(1.0, 100);
    const auto f = make_functional(payoff("butterfly", {1.0}), 1);
    expectation::PlanOptions options;
    options.threads = 1;
    const auto family = guided ? pde_guided_family(grid, theta, f, expectation::make_plan(theta, f, options))
                               : bang_bang_family(grid, theta, 1);
    const BundleParams params{grid, 2000, 1, 1};
    const auto fn = on_path(f, grid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_family(family, std::span(&fn, 1), params));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * params.n_paths * grid.n_steps()
                                                      * family.size()));
}
BENCHMARK(BM_PathSimulation)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_WeightedExpectation(benchmark::State& state)
{
    const auto theta = theta_for(1).with_floor(0.25);
    const TimeGrid grid(1.0, static_cast<std::size_t>(state.range(0)));
    const auto f = make_functional(payoff("call", {1.0}), 1);
    girsanov::WeightedExpectationSpec spec{theta, Integrand::constant(Vector::Constant(1, 1.0)),
                                           bang_bang_family(grid, theta, 2), {},
                                           BundleParams{grid, 2000, 1, 1}, false};
    for (auto _ : state) {
        benchmark::DoNotOptimize(girsanov::weighted_expectation(spec, f).estimate.value);
    }
}
BENCHMARK(BM_WeightedExpectation)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
