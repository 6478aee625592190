#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gexp/model/path_view.hpp"
#include "gexp/model/theta_set.hpp"
#include "gexp/model/time_grid.hpp"

namespace gexp {

/// Source of the (numerically differentiated) Hessian of a value function,
/// queried along a path to steer a PDE-guided control.
class CurvatureField {
public:
    virtual ~CurvatureField() = default;
    virtual std::size_t dim() const = 0;
    /// Writes D^2 v(t_step, x) into `out`, where x and any frozen arguments
    /// are read from `observed` (steps 0..step).
    virtual void hessian(std::size_t step, const PathView& observed, Matrix& out) const = 0;
};

/// A Theta-valued, adapted, piecewise-constant volatility policy on a time
/// grid. The matrix applied on (t_k, t_{k+1}] is `control(k, ...)` and may
/// only depend on the observed path up to t_k.
class ControlPolicy {
public:
    enum class Kind { Deterministic, Feedback, PDEGuided };
    using Rule = std::function<Matrix(std::size_t step, std::span<const double> current)>;

    static ControlPolicy deterministic(const TimeGrid& grid, const ThetaSet& theta,
                                       std::vector<Matrix> schedule, std::string name = {});
    static ControlPolicy constant(const TimeGrid& grid, const ThetaSet& theta,
                                  const Matrix& gamma, std::string name = {});
    static ControlPolicy feedback(const TimeGrid& grid, const ThetaSet& theta, Rule rule,
                                  std::string name = "feedback");
    static ControlPolicy pde_guided(const TimeGrid& grid, const ThetaSet& theta,
                                    std::shared_ptr<const CurvatureField> field,
                                    std::string name = "pde-guided");

    Kind kind() const noexcept { return kind_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    const ThetaSet& theta() const noexcept { return theta_; }
    const std::string& name() const noexcept { return name_; }
    /// Only for Deterministic policies.
    const std::vector<Matrix>& schedule() const { return *schedule_; }

    /// The matrix for step k. `scratch` is used for kinds that build the
    /// matrix on the fly; the returned reference is valid until the next call.
    /// Throws InputError when a feedback rule leaves Theta.
    const Matrix& control(std::size_t step, const PathView& observed, Matrix& scratch) const;

private:
    ControlPolicy(const TimeGrid& grid, const ThetaSet& theta) : grid_(grid), theta_(theta) {}

    Kind kind_ = Kind::Deterministic;
    TimeGrid grid_;
    ThetaSet theta_;
    std::string name_;
    std::shared_ptr<const std::vector<Matrix>> schedule_;
    Rule rule_;
    std::shared_ptr<const CurvatureField> field_;
};

} // namespace gexp
