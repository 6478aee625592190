#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gexp/expectation/lattice_function.hpp"
#include "gexp/expectation/recursion.hpp"
#include "gexp/gheat/grid.hpp"
#include "gexp/model/functional.hpp"

namespace gexp::expectation::detail {

/// F_j of the recursion: the functional itself for j = k, a lattice otherwise.
class StageFunction {
public:
    explicit StageFunction(const CylinderFunctional* phi) : phi_(phi) {}
    explicit StageFunction(std::shared_ptr<const LatticeFunction> f) : lattice_(std::move(f)) {}

    double operator()(std::span<const double> x) const
    {
        return phi_ != nullptr ? (*phi_)(x) : (*lattice_)(x);
    }
    const std::shared_ptr<const LatticeFunction>& lattice() const noexcept { return lattice_; }

private:
    const CylinderFunctional* phi_ = nullptr;
    std::shared_ptr<const LatticeFunction> lattice_;
};

/// Coordinates of anchor tuple `flat` among `frozen` frozen times.
void anchor_point(const BackwardRecursionPlan& plan, std::size_t frozen, std::size_t flat,
                  std::span<double> out);

std::vector<Axis> anchor_axes(const BackwardRecursionPlan& plan, std::size_t frozen);

/// Samples y -> F(anchor, y) on the plan's PDE grid.
gheat::GridFunction stage_data(const BackwardRecursionPlan& plan, const StageFunction& F,
                               std::span<const double> anchor);

/// Returns F_stop, ..., F_k (index 0 holds F_stop). Diagnostics for every
/// computed stage are appended to `result`.
std::vector<StageFunction> reduce(const BackwardRecursionPlan& plan, const CylinderFunctional& f,
                                  std::size_t stop, ExpectationResult& result);

void check_plan(const ThetaSet& theta, const CylinderFunctional& f,
                const BackwardRecursionPlan& plan);

} // namespace gexp::expectation::detail
