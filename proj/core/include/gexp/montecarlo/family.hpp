#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gexp/expectation/recursion.hpp"
#include "gexp/model/control_policy.hpp"

namespace gexp::montecarlo {

/// A finite, nonempty subfamily of admissible controls on one time grid.
class ControlFamily {
public:
    enum class Mode { BangBang, RandomSchedules, PDEGuided, Mixed };

    /// Throws InputError when empty or when policies disagree on grid or Theta.
    ControlFamily(std::vector<ControlPolicy> policies, Mode mode);

    const std::vector<ControlPolicy>& policies() const noexcept { return policies_; }
    std::size_t size() const noexcept { return policies_.size(); }
    Mode mode() const noexcept { return mode_; }
    const TimeGrid& grid() const noexcept { return policies_.front().grid(); }
    const ThetaSet& theta() const noexcept { return policies_.front().theta(); }

    ControlFamily merged_with(const ControlFamily& other) const;

private:
    std::vector<ControlPolicy> policies_;
    Mode mode_;
};

/// Every schedule that is constant on each of `blocks` near-equal time blocks
/// and takes an extreme point of Theta there: |ext Theta|^blocks policies.
/// blocks = 1 gives the constant controls. Throws ConfigurationError above
/// 4096 policies.
ControlFamily bang_bang_family(const TimeGrid& grid, const ThetaSet& theta, std::size_t blocks);

/// `count` schedules drawn blockwise: uniform over the members of a finite
/// set, uniform on [sigma_low, sigma_high] for an interval.
ControlFamily random_schedule_family(const TimeGrid& grid, const ThetaSet& theta,
                                     std::size_t count, std::uint64_t seed, std::size_t blocks = 8);

/// The single feedback policy gamma = argmax_gamma(D^2 V) steered by the
/// PDE value function of `f`.
ControlFamily pde_guided_family(const TimeGrid& grid, const ThetaSet& theta,
                                const CylinderFunctional& f,
                                const expectation::BackwardRecursionPlan& plan);

} // namespace gexp::montecarlo
