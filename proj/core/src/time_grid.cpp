#include "gexp/model/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gexp/errors.hpp"

namespace gexp {

TimeGrid::TimeGrid(double horizon, std::size_t n_steps)
    : horizon_(horizon), n_steps_(n_steps)
{
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InputError("TimeGrid: horizon must be a positive real");
    }
    if (n_steps == 0) {
        throw InputError("TimeGrid: need at least one step");
    }
    dt_ = horizon / static_cast<double>(n_steps);
    times_.resize(n_steps + 1);
    for (std::size_t k = 0; k < n_steps; ++k) {
        times_[k] = static_cast<double>(k) * dt_;
    }
    times_[n_steps] = horizon;
}

std::size_t TimeGrid::snap(double t) const
{
    if (!(t >= -0.5 * dt_) || !(t <= horizon_ + 0.5 * dt_)) {
        throw InputError("TimeGrid: time " + std::to_string(t) + " lies off the grid [0, "
                         + std::to_string(horizon_) + "] by more than dt/2");
    }
    const double idx = std::floor(t / dt_ + 0.5);
    if (idx <= 0.0) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(idx), n_steps_);
}

bool TimeGrid::on_grid(double t) const noexcept
{
    if (!(t >= -0.5 * dt_) || !(t <= horizon_ + 0.5 * dt_)) {
        return false;
    }
    return std::abs(times_[snap(t)] - t) <= 1e-9 * dt_;
}

} // namespace gexp
