#include "gexp/expectation/recursion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gexp/errors.hpp"
#include "gexp/gheat/solver.hpp"
#include "gexp/util/parallel.hpp"
#include "recursion_detail.hpp"

namespace gexp::expectation {

namespace {

constexpr std::size_t kMaxPoint = 8;

double stage_gap(const std::vector<double>& times, std::size_t j)
{
    return times[j] - (j == 0 ? 0.0 : times[j - 1]);
}

std::size_t steps_for(double gap, double dt)
{
    return gap > 0.0 ? static_cast<std::size_t>(std::ceil(gap / dt - 1e-9)) : 0;
}

/// Value of u(gap, x) for data `data`, where x is the last d coordinates of
/// `anchor` (the origin when no argument is frozen).
double solve_at(const BackwardRecursionPlan& plan, gheat::GridFunction data, double gap,
                std::span<const double> anchor)
{
    const std::size_t d = plan.dim();
    std::array<double, 2> origin{};
    std::span<const double> x = anchor.empty() ? std::span<const double>(origin.data(), d)
                                               : anchor.subspan(anchor.size() - d, d);
    if (gap <= 0.0) {
        return gheat::evaluate_at(data, x);
    }
    const auto u = gheat::solve_gheat(plan.theta(), std::move(data), gap, plan.dt());
    return gheat::evaluate_at(u, x);
}

double probe_residual(const BackwardRecursionPlan& plan, const detail::StageFunction& next,
                      const LatticeFunction& computed, std::size_t stage, double gap)
{
    const std::size_t width = stage * plan.dim();
    const Axis& ax = plan.anchor_axis();
    std::mt19937_64 rng(0x5eedULL + stage);
    // Probes sit at anchor-cell midpoints in the inner half of the box.
    const std::size_t lo = ax.count / 4;
    const std::size_t hi = std::max(lo, (3 * ax.count) / 4 - 1);
    std::uniform_int_distribution<std::size_t> cell(lo, hi);
    std::array<double, kMaxPoint> p{};
    double worst = 0.0;
    for (std::size_t n = 0; n < plan.options().probes; ++n) {
        for (std::size_t a = 0; a < width; ++a) {
            p[a] = ax.coord(cell(rng)) + 0.5 * ax.spacing;
        }
        const std::span<const double> point(p.data(), width);
        const double direct = solve_at(plan, detail::stage_data(plan, next, point), gap, point);
        worst = std::max(worst, std::abs(direct - computed(point)));
    }
    return worst;
}

} // namespace

std::size_t BackwardRecursionPlan::anchor_count(std::size_t frozen) const noexcept
{
    std::size_t n = 1;
    for (std::size_t i = 0; i < frozen * dim(); ++i) {
        n *= anchor_axis_.count;
    }
    return n;
}

BackwardRecursionPlan make_plan(const ThetaSet& theta, const CylinderFunctional& f,
                                const PlanOptions& options)
{
    if (f.dim() != theta.dim()) {
        throw InputError("make_plan: functional and uncertainty set dimensions differ");
    }
    if (theta.dim() > 2) {
        throw ConfigurationError("make_plan: the PDE backend supports d = 1 and d = 2 only");
    }
    if (f.arity() > options.max_arity || f.width() > options.max_width) {
        std::ostringstream msg;
        msg << "make_plan: functional with k = " << f.arity() << ", d k = " << f.width()
            << " exceeds the caps k <= " << options.max_arity << ", d k <= " << options.max_width;
        throw ConfigurationError(msg.str());
    }
    if (!(options.spacing > 0.0) || !(options.offset >= 0.0) || options.anchor_stride == 0
        || !(options.cfl_fraction > 0.0 && options.cfl_fraction <= 1.0)) {
        throw ConfigurationError(
            "make_plan: need spacing > 0, offset >= 0, anchor_stride >= 1, cfl_fraction in (0, 1]");
    }
    gheat::check_monotone_stencil(theta);

    const double horizon = f.times().back();
    const double L = 6.0 * std::sqrt(theta.max_variance() * horizon) + options.offset;
    if (!(L > 0.0)) {
        throw ConfigurationError("make_plan: degenerate box; use a positive offset");
    }
    const std::size_t s = options.anchor_stride;
    auto half = static_cast<std::size_t>(std::ceil(L / options.spacing - 1e-9));
    half = std::max<std::size_t>(half, 1);
    half = ((half + s - 1) / s) * s;

    BackwardRecursionPlan plan(theta, gheat::SpatialGrid(theta.dim(), L, 2 * half + 1));
    plan.times_ = f.times();
    plan.stride_ = s;
    plan.options_ = options;
    plan.dt_ = options.cfl_fraction * gheat::max_stable_dt(theta, plan.grid_);
    const double h = plan.grid_.spacing();
    plan.node_axis_ = Axis{-L, h, plan.grid_.n_nodes()};
    plan.anchor_axis_ = Axis{-L, h * static_cast<double>(s), 2 * half / s + 1};

    double work = 0.0;
    const auto nodes = static_cast<double>(plan.grid_.total_nodes());
    for (std::size_t j = 0; j < f.arity(); ++j) {
        work += static_cast<double>(plan.anchor_count(j)) * nodes
                * static_cast<double>(steps_for(stage_gap(plan.times_, j), plan.dt_));
    }
    if (work > options.max_work) {
        std::ostringstream msg;
        msg << "make_plan: recursion needs about " << work << " node updates, above the budget "
            << options.max_work << "; coarsen spacing or raise anchor_stride";
        throw ConfigurationError(msg.str());
    }
    return plan;
}

namespace detail {

std::vector<Axis> anchor_axes(const BackwardRecursionPlan& plan, std::size_t frozen)
{
    return std::vector<Axis>(frozen * plan.dim(), plan.anchor_axis());
}

void anchor_point(const BackwardRecursionPlan& plan, std::size_t frozen, std::size_t flat,
                  std::span<double> out)
{
    const Axis& ax = plan.anchor_axis();
    for (std::size_t a = 0; a < frozen * plan.dim(); ++a) {
        out[a] = ax.coord(flat % ax.count);
        flat /= ax.count;
    }
}

gheat::GridFunction stage_data(const BackwardRecursionPlan& plan, const StageFunction& F,
                               std::span<const double> anchor)
{
    const auto& grid = plan.grid();
    const std::size_t d = grid.dim();
    gheat::GridFunction data{grid, 0.0, std::vector<double>(grid.total_nodes())};
    std::array<double, kMaxPoint> x{};
    std::copy(anchor.begin(), anchor.end(), x.begin());
    const std::span<double> y(x.data() + anchor.size(), d);
    const std::span<const double> full(x.data(), anchor.size() + d);
    for (std::size_t k = 0; k < grid.total_nodes(); ++k) {
        grid.node_point(k, y);
        data.values[k] = F(full);
    }
    return data;
}

void check_plan(const ThetaSet& theta, const CylinderFunctional& f,
                const BackwardRecursionPlan& plan)
{
    if (!(plan.theta() == theta)) {
        throw InputError("g_expectation: plan was built for a different uncertainty set");
    }
    if (plan.times() != f.times() || plan.dim() != f.dim()) {
        throw InputError("g_expectation: plan was built for a different functional shape");
    }
}

std::vector<StageFunction> reduce(const BackwardRecursionPlan& plan, const CylinderFunctional& f,
                                  std::size_t stop, ExpectationResult& result)
{
    const std::size_t k = f.arity();
    std::vector<StageFunction> chain;
    chain.emplace_back(&f);
    const auto& times = plan.times();
    for (std::size_t j = k - 1; j >= stop && j >= 1; --j) {
        const StageFunction& next = chain.back();
        const double gap = stage_gap(times, j);
        auto F = std::make_shared<LatticeFunction>(anchor_axes(plan, j));
        const std::size_t count = plan.anchor_count(j);
        const std::size_t width = j * plan.dim();
        parallel_for(count, plan.options().threads, [&](std::size_t lo, std::size_t hi) {
            std::array<double, kMaxPoint> a{};
            for (std::size_t n = lo; n < hi; ++n) {
                anchor_point(plan, j, n, a);
                const std::span<const double> anchor(a.data(), width);
                F->values()[n] = solve_at(plan, stage_data(plan, next, anchor), gap, anchor);
            }
        });
        StageDiagnostics diag;
        diag.stage = j;
        diag.t_begin = times[j - 1];
        diag.t_end = times[j];
        diag.anchors = count;
        diag.steps_per_solve = steps_for(gap, plan.dt());
        diag.max_probe_residual = probe_residual(plan, next, *F, j, gap);
        result.max_probe_residual = std::max(result.max_probe_residual, diag.max_probe_residual);
        if (diag.max_probe_residual > plan.options().probe_tolerance) {
            std::ostringstream msg;
            msg << "stage " << j << ": anchor lattice probe residual " << diag.max_probe_residual
                << " exceeds tolerance " << plan.options().probe_tolerance;
            result.warnings.push_back(msg.str());
        }
        result.stages.push_back(diag);
        chain.emplace_back(std::shared_ptr<const LatticeFunction>(std::move(F)));
        if (j == 1) {
            break;
        }
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

} // namespace detail

ExpectationResult g_expectation(const ThetaSet& theta, const CylinderFunctional& f,
                                const BackwardRecursionPlan& plan)
{
    detail::check_plan(theta, f, plan);
    ExpectationResult result;
    const auto chain = detail::reduce(plan, f, 1, result);
    const double gap = plan.times().front();
    result.value = solve_at(plan, detail::stage_data(plan, chain.front(), {}), gap, {});
    StageDiagnostics diag;
    diag.stage = 0;
    diag.t_begin = 0.0;
    diag.t_end = gap;
    diag.anchors = 1;
    diag.steps_per_solve = steps_for(gap, plan.dt());
    result.stages.push_back(diag);
    return result;
}

ExpectationResult g_expectation(const ThetaSet& theta, const CylinderFunctional& f,
                                const PlanOptions& options)
{
    return g_expectation(theta, f, make_plan(theta, f, options));
}

double ConditionalExpectation::operator()(std::span<const double> x) const
{
    switch (kind_) {
    case Kind::Identity:
        return (*identity_)(x);
    case Kind::Constant:
        return constant_;
    case Kind::Lattice:
        return (*lattice_)(x);
    }
    return constant_;
}

CylinderFunctional ConditionalExpectation::as_functional(std::string name) const
{
    auto self = std::make_shared<const ConditionalExpectation>(*this);
    return CylinderFunctional(
        times_, dim_, [self](std::span<const double> x) { return (*self)(x); },
        std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        std::move(name));
}

ConditionalExpectation conditional_g_expectation(const ThetaSet& theta,
                                                 const CylinderFunctional& f, double t,
                                                 const BackwardRecursionPlan& plan)
{
    detail::check_plan(theta, f, plan);
    const auto& times = plan.times();
    const double tol = 1e-12 * std::max(1.0, times.back());
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InputError("conditional_g_expectation: t must be a nonnegative time");
    }
    ConditionalExpectation out;
    out.dim_ = f.dim();
    const auto i = static_cast<std::size_t>(
        std::count_if(times.begin(), times.end(), [&](double s) { return s <= t + tol; }));
    if (i == times.size()) {
        out.kind_ = ConditionalExpectation::Kind::Identity;
        out.times_ = times;
        out.identity_ = std::make_shared<const CylinderFunctional>(f);
        return out;
    }
    if (t <= tol && i == 0) {
        out.kind_ = ConditionalExpectation::Kind::Constant;
        out.times_ = {0.0};
        out.constant_ = g_expectation(theta, f, plan).value;
        return out;
    }

    ExpectationResult scratch;
    const auto chain = detail::reduce(plan, f, i + 1, scratch);
    const detail::StageFunction& next = chain.front();
    const double gap = times[i] - t;
    const std::size_t d = plan.dim();

    auto axes = detail::anchor_axes(plan, i);
    for (std::size_t a = 0; a < d; ++a) {
        axes.push_back(plan.node_axis());
    }
    auto H = std::make_shared<LatticeFunction>(std::move(axes));
    const std::size_t count = plan.anchor_count(i);
    const std::size_t nodes = plan.grid().total_nodes();
    parallel_for(count, plan.options().threads, [&](std::size_t lo, std::size_t hi) {
        std::array<double, kMaxPoint> a{};
        for (std::size_t n = lo; n < hi; ++n) {
            detail::anchor_point(plan, i, n, a);
            auto data = detail::stage_data(plan, next, std::span<const double>(a.data(), i * d));
            if (gap > 0.0) {
                data = gheat::solve_gheat(theta, std::move(data), gap, plan.dt());
            }
            for (std::size_t m = 0; m < nodes; ++m) {
                H->values()[n + count * m] = data.values[m];
            }
        }
    });
    out.kind_ = ConditionalExpectation::Kind::Lattice;
    out.times_.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(i));
    out.times_.push_back(t);
    out.lattice_ = std::move(H);
    return out;
}

} // namespace gexp::expectation
