#include "gexp/gheat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gexp/errors.hpp"

namespace gexp::gheat {

SpatialGrid::SpatialGrid(std::size_t dim, double half_width, std::size_t n_nodes)
    : dim_(dim), half_width_(half_width), n_(n_nodes)
{
    if (dim_ != 1 && dim_ != 2) {
        throw InputError("SpatialGrid: only dimensions 1 and 2 are supported");
    }
    if (!(half_width_ > 0.0) || !std::isfinite(half_width_)) {
        throw InputError("SpatialGrid: half width must be a positive real");
    }
    if (n_ < 3 || n_ % 2 == 0) {
        throw InputError("SpatialGrid: node count must be odd and at least 3, got "
                         + std::to_string(n_));
    }
    h_ = 2.0 * half_width_ / static_cast<double>(n_ - 1);
    total_ = dim_ == 1 ? n_ : n_ * n_;
}

SpatialGrid SpatialGrid::covering(const ThetaSet& theta, double horizon, double offset,
                                  double target_spacing)
{
    if (!(target_spacing > 0.0)) {
        throw InputError("SpatialGrid: target spacing must be positive");
    }
    const double L = 6.0 * std::sqrt(theta.max_variance() * std::max(horizon, 0.0)) + offset;
    if (!(L > 0.0)) {
        throw InputError("SpatialGrid: degenerate covering box");
    }
    auto half_cells = static_cast<std::size_t>(std::ceil(L / target_spacing - 1e-9));
    half_cells = std::max<std::size_t>(half_cells, 1);
    return SpatialGrid(theta.dim(), L, 2 * half_cells + 1);
}

void SpatialGrid::node_point(std::size_t flat, std::span<double> out) const noexcept
{
    out[0] = coord(flat % n_);
    if (dim_ == 2) {
        out[1] = coord(flat / n_);
    }
}

double GridFunction::max_abs() const noexcept
{
    double m = 0.0;
    for (double v : values) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double evaluate_at(const GridFunction& u, std::span<const double> x)
{
    const auto& g = u.grid;
    if (x.size() != g.dim()) {
        throw InputError("evaluate_at: point dimension does not match the grid");
    }
    const double L = g.half_width();
    const double slack = 1e-12 * L;
    std::size_t idx[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (std::size_t a = 0; a < g.dim(); ++a) {
        if (!(x[a] >= -L - slack && x[a] <= L + slack)) {
            throw OutOfDomainError("evaluate_at: point outside the computational box [-"
                                   + std::to_string(L) + ", " + std::to_string(L) + "]");
        }
        const double s = std::clamp((x[a] + L) / g.spacing(), 0.0,
                                    static_cast<double>(g.n_nodes() - 1));
        auto i = static_cast<std::size_t>(std::floor(s));
        i = std::min(i, g.n_nodes() - 2);
        idx[a] = i;
        frac[a] = s - static_cast<double>(i);
    }
    const auto n = g.n_nodes();
    const auto& v = u.values;
    if (g.dim() == 1) {
        return (1.0 - frac[0]) * v[idx[0]] + frac[0] * v[idx[0] + 1];
    }
    const std::size_t base = idx[0] + n * idx[1];
    const double f0 = frac[0];
    const double f1 = frac[1];
    return (1.0 - f0) * (1.0 - f1) * v[base] + f0 * (1.0 - f1) * v[base + 1]
           + (1.0 - f0) * f1 * v[base + n] + f0 * f1 * v[base + n + 1];
}

std::vector<double> hessian_field(const GridFunction& u)
{
    const auto& g = u.grid;
    const auto n = g.n_nodes();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const auto& v = u.values;
    if (g.dim() == 1) {
        std::vector<double> out(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_h2;
        }
        return out;
    }
    std::vector<double> out(3 * n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = i + n * j;
            double* h = &out[3 * c];
            const bool xi = i > 0 && i + 1 < n;
            const bool yi = j > 0 && j + 1 < n;
            if (xi) {
                h[0] = (v[c + 1] - 2.0 * v[c] + v[c - 1]) * inv_h2;
            }
            if (yi) {
                h[2] = (v[c + n] - 2.0 * v[c] + v[c - n]) * inv_h2;
            }
            if (xi && yi) {
                h[1] = 0.25 * (v[c + n + 1] - v[c - n + 1] - v[c + n - 1] + v[c - n - 1]) * inv_h2;
            }
        }
    }
    return out;
}

} // namespace gexp::gheat
