#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gexp/expectation/lattice_function.hpp"
#include "gexp/gheat/grid.hpp"
#include "gexp/model/functional.hpp"
#include "gexp/model/theta_set.hpp"

namespace gexp::expectation {

struct PlanOptions {
    /// Target spatial step; the actual step is never larger.
    double spacing = 0.05;
    /// Added to 6 sigma_max sqrt(T) to give the box half width.
    double offset = 1.0;
    /// Anchors sit on every `anchor_stride`-th PDE node.
    std::size_t anchor_stride = 1;
    /// dt = cfl_fraction * h^2 / (2 d sigma_max^2).
    double cfl_fraction = 0.9;
    std::size_t probes = 4;
    double probe_tolerance = 5e-3;
    unsigned threads = 0;
    std::size_t max_arity = 4;
    std::size_t max_width = 6;
    /// Upper bound on node updates (anchors x nodes x steps) for a whole plan.
    double max_work = 4e10;
};

/// Grids and step sizes for the backward recursion of one functional.
/// Every stage shares the PDE box; anchors for frozen arguments live on a
/// sub-lattice of the same nodes.
class BackwardRecursionPlan {
public:
    const ThetaSet& theta() const noexcept { return theta_; }
    const std::vector<double>& times() const noexcept { return times_; }
    std::size_t dim() const noexcept { return grid_.dim(); }
    const gheat::SpatialGrid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    std::size_t anchor_stride() const noexcept { return stride_; }
    const Axis& anchor_axis() const noexcept { return anchor_axis_; }
    const Axis& node_axis() const noexcept { return node_axis_; }
    const PlanOptions& options() const noexcept { return options_; }
    /// Number of anchor tuples for a stage with `frozen` frozen times.
    std::size_t anchor_count(std::size_t frozen) const noexcept;

private:
    friend BackwardRecursionPlan make_plan(const ThetaSet&, const CylinderFunctional&,
                                           const PlanOptions&);
    BackwardRecursionPlan(ThetaSet theta, gheat::SpatialGrid grid)
        : theta_(std::move(theta)), grid_(grid)
    {
    }

    ThetaSet theta_;
    std::vector<double> times_;
    gheat::SpatialGrid grid_;
    double dt_ = 0.0;
    std::size_t stride_ = 1;
    Axis anchor_axis_;
    Axis node_axis_;
    PlanOptions options_;
};

/// Validates caps (k <= max_arity, d k <= max_width, d in {1, 2}), the
/// stencil monotonicity and the work budget. Throws ConfigurationError.
BackwardRecursionPlan make_plan(const ThetaSet& theta, const CylinderFunctional& f,
                                const PlanOptions& options = {});

struct StageDiagnostics {
    std::size_t stage = 0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t anchors = 0;
    std::size_t steps_per_solve = 0;
    double max_probe_residual = 0.0;
};

struct ExpectationResult {
    double value = 0.0;
    std::vector<StageDiagnostics> stages;
    double max_probe_residual = 0.0;
    std::vector<std::string> warnings;
};

/// G-expectation of f(B_{t_1}, ..., B_{t_k}) by chaining G-heat solves from
/// the last time backwards.
ExpectationResult g_expectation(const ThetaSet& theta, const CylinderFunctional& f,
                                const BackwardRecursionPlan& plan);
ExpectationResult g_expectation(const ThetaSet& theta, const CylinderFunctional& f,
                                const PlanOptions& options = {});

/// E_t[f] as a function of (B_{t_1}, ..., B_{t_i}, B_t) where i counts the
/// times t_j <= t. When every time has passed it is f itself; at t = 0 it is
/// the constant E[f].
class ConditionalExpectation {
public:
    enum class Kind { Identity, Constant, Lattice };

    Kind kind() const noexcept { return kind_; }
    /// Times of the arguments: (t_1, ..., t_i, t), or f's own times for Identity.
    const std::vector<double>& times() const noexcept { return times_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t width() const noexcept { return times_.size() * dim_; }
    const LatticeFunction& lattice() const { return *lattice_; }

    double operator()(std::span<const double> x) const;
    CylinderFunctional as_functional(std::string name = "conditional") const;

private:
    friend ConditionalExpectation conditional_g_expectation(const ThetaSet&,
                                                            const CylinderFunctional&, double,
                                                            const BackwardRecursionPlan&);
    Kind kind_ = Kind::Constant;
    std::vector<double> times_;
    std::size_t dim_ = 1;
    double constant_ = 0.0;
    std::shared_ptr<const CylinderFunctional> identity_;
    std::shared_ptr<const LatticeFunction> lattice_;
};

ConditionalExpectation conditional_g_expectation(const ThetaSet& theta,
                                                 const CylinderFunctional& f, double t,
                                                 const BackwardRecursionPlan& plan);

} // namespace gexp::expectation
