#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gexp/model/theta_set.hpp"

namespace gexp::gheat {

/// Uniform tensor grid on [-L, L]^d, d in {1, 2}, with an odd number of
/// nodes per axis so that the origin is a node. Flat index = i0 + n * i1.
class SpatialGrid {
public:
    SpatialGrid(std::size_t dim, double half_width, std::size_t n_nodes);

    /// Smallest grid with spacing <= `target_spacing` whose half width is
    /// 6 sigma_max sqrt(horizon) + offset.
    static SpatialGrid covering(const ThetaSet& theta, double horizon, double offset,
                                double target_spacing);

    std::size_t dim() const noexcept { return dim_; }
    double half_width() const noexcept { return half_width_; }
    std::size_t n_nodes() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }
    std::size_t total_nodes() const noexcept { return total_; }
    double coord(std::size_t i) const noexcept { return -half_width_ + static_cast<double>(i) * h_; }
    std::size_t center_index() const noexcept { return (n_ - 1) / 2; }

    /// Writes the coordinates of flat node `flat` into `out` (size dim).
    void node_point(std::size_t flat, std::span<double> out) const noexcept;

    friend bool operator==(const SpatialGrid& a, const SpatialGrid& b) noexcept
    {
        return a.dim_ == b.dim_ && a.half_width_ == b.half_width_ && a.n_ == b.n_;
    }

private:
    std::size_t dim_;
    double half_width_;
    std::size_t n_;
    double h_;
    std::size_t total_;
};

/// Samples u(t, .) of a value function on a SpatialGrid.
struct GridFunction {
    SpatialGrid grid;
    double t = 0.0;
    std::vector<double> values;

    double max_abs() const noexcept;
};

/// Multilinear interpolation; throws OutOfDomainError outside [-L, L]^d.
double evaluate_at(const GridFunction& u, std::span<const double> x);

/// Centered second differences at every node, packed per node as
/// {u_xx} (d = 1) or {u_xx, u_xy, u_yy} (d = 2). Edge nodes get zero
/// normal and mixed derivatives, matching the linear far-field boundary rule.
std::vector<double> hessian_field(const GridFunction& u);

inline constexpr std::size_t hessian_components(std::size_t dim) noexcept
{
    return dim * (dim + 1) / 2;
}

} // namespace gexp::gheat
