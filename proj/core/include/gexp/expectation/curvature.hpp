#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "gexp/expectation/lattice_function.hpp"
#include "gexp/expectation/recursion.hpp"
#include "gexp/model/control_policy.hpp"
#include "gexp/model/time_grid.hpp"

namespace gexp::expectation {

/// Hessians of the value function V(t_m, x_1, ..., x_i, x) at the steps t_m
/// of a Monte Carlo grid, where i counts the functional's times <= t_m.
/// Frozen arguments are read from the observed path at the snapped
/// functional times.
///
/// Snapshots are kept on every `snapshot_stride()`-th step of each stage,
/// counted from the stage's first step; the steps in between reuse the last
/// kept snapshot. The stride is the smallest one that fits `max_doubles`.
class PdeCurvatureField final : public CurvatureField {
public:
    /// Throws ConfigurationError when even one snapshot per stage exceeds
    /// `max_doubles` stored values, InputError when a functional time is not
    /// on `grid`.
    PdeCurvatureField(const ThetaSet& theta, const CylinderFunctional& f,
                      const BackwardRecursionPlan& plan, const TimeGrid& grid,
                      double max_doubles = 4e7);

    std::size_t dim() const override { return dim_; }
    void hessian(std::size_t step, const PathView& observed, Matrix& out) const override;

    std::size_t stored_doubles() const noexcept { return stored_; }
    std::size_t snapshot_stride() const noexcept { return stride_; }

private:
    std::size_t dim_;
    std::size_t arity_;
    std::vector<std::size_t> time_index_;
    std::vector<std::size_t> stage_of_step_;
    std::vector<LatticeFunction> snapshots_;
    // snapshot index used at each step
    std::vector<std::size_t> source_;
    std::size_t stride_ = 1;
    std::size_t stored_ = 0;
};

std::shared_ptr<const PdeCurvatureField> make_curvature_field(const ThetaSet& theta,
                                                              const CylinderFunctional& f,
                                                              const BackwardRecursionPlan& plan,
                                                              const TimeGrid& grid);

} // namespace gexp::expectation
