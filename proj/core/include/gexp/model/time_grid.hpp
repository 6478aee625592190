#pragma once

#include <cstddef>
#include <vector>

namespace gexp {

/// Uniform grid 0 = t_0 < t_1 < ... < t_N = T.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return dt_; }
    double time(std::size_t k) const noexcept { return times_[k]; }
    const std::vector<double>& times() const noexcept { return times_; }

    /// Nearest grid index to t (ties round up). Throws InputError when t lies
    /// outside [-dt/2, T + dt/2].
    std::size_t snap(double t) const;

    /// True when t coincides with a grid time to within 1e-9 * dt.
    bool on_grid(double t) const noexcept;

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept
    {
        return a.horizon_ == b.horizon_ && a.n_steps_ == b.n_steps_;
    }

private:
    double horizon_;
    std::size_t n_steps_;
    double dt_;
    std::vector<double> times_;
};

} // namespace gexp
