#include "gexp/gheat/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "gexp/errors.hpp"

namespace gexp::gheat {

namespace {

struct Coeffs {
    double a11;
    double a22;
    double a12;
};

std::vector<Coeffs> coefficients(const ThetaSet& theta)
{
    std::vector<Coeffs> out;
    for (const auto& c : theta.covariances()) {
        if (c.rows() == 1) {
            out.push_back({c(0, 0), 0.0, 0.0});
        } else {
            out.push_back({c(0, 0), c(1, 1), c(0, 1)});
        }
    }
    return out;
}

void require_finite(const std::vector<double>& v, double t)
{
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericalError("solve_gheat: non-finite value at t = " + std::to_string(t));
        }
    }
}

// One explicit step from `u` into `next`.
void step_1d(const std::vector<Coeffs>& cs, const std::vector<double>& u,
             std::vector<double>& next, double lambda)
{
    double a_max = -std::numeric_limits<double>::infinity();
    double a_min = std::numeric_limits<double>::infinity();
    for (const auto& c : cs) {
        a_max = std::max(a_max, c.a11);
        a_min = std::min(a_min, c.a11);
    }
    const auto n = u.size();
    next[0] = u[0];
    next[n - 1] = u[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d2 = u[i + 1] - 2.0 * u[i] + u[i - 1];
        next[i] = u[i] + 0.5 * lambda * (d2 >= 0.0 ? a_max : a_min) * d2;
    }
}

void step_2d(const std::vector<Coeffs>& cs, std::size_t n, const std::vector<double>& u,
             std::vector<double>& next, double lambda)
{
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = i + n * j;
            const bool xi = i > 0 && i + 1 < n;
            const bool yi = j > 0 && j + 1 < n;
            const double uc = u[c];
            const double dxx = xi ? u[c + 1] - 2.0 * uc + u[c - 1] : 0.0;
            const double dyy = yi ? u[c + n] - 2.0 * uc + u[c - n] : 0.0;
            double dplus = 0.0;
            double dminus = 0.0;
            if (xi && yi) {
                const double axis = u[c + 1] + u[c - 1] + u[c + n] + u[c - n];
                dplus = 0.5 * (2.0 * uc + u[c + n + 1] + u[c - n - 1] - axis);
                dminus = -0.5 * (2.0 * uc + u[c - n + 1] + u[c + n - 1] - axis);
            }
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& k : cs) {
                const double cross = k.a12 >= 0.0 ? dplus : dminus;
                best = std::max(best, 0.5 * k.a11 * dxx + 0.5 * k.a22 * dyy + k.a12 * cross);
            }
            next[c] = uc + lambda * best;
        }
    }
}

void require_cfl(const ThetaSet& theta, const SpatialGrid& grid, double dt)
{
    const double bound = max_stable_dt(theta, grid);
    if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
        throw ConfigurationError("solve_gheat: dt = " + std::to_string(dt)
                                 + " violates the CFL bound h^2/(2 d sigma_max^2) = "
                                 + std::to_string(bound));
    }
}

} // namespace

double max_stable_dt(const ThetaSet& theta, const SpatialGrid& grid)
{
    const double h = grid.spacing();
    return h * h / (2.0 * static_cast<double>(grid.dim()) * theta.max_variance());
}

void check_monotone_stencil(const ThetaSet& theta)
{
    if (theta.dim() == 1) {
        return;
    }
    if (theta.dim() != 2) {
        throw ConfigurationError("G-heat solver supports dimensions 1 and 2 only");
    }
    for (const auto& c : theta.covariances()) {
        const double off = std::abs(c(0, 1));
        if (c(0, 0) < off || c(1, 1) < off) {
            throw ConfigurationError(
                "G-heat solver: covariance is not diagonally dominant; the mixed-derivative "
                "stencil would not be monotone");
        }
    }
}

GridFunction sample(const CylinderFunctional& phi, const SpatialGrid& grid)
{
    if (phi.arity() != 1 || phi.dim() != grid.dim()) {
        throw InputError("G-heat: initial data must be a single-time functional of the grid dimension");
    }
    GridFunction u{grid, 0.0, std::vector<double>(grid.total_nodes())};
    std::array<double, 2> x{};
    for (std::size_t k = 0; k < grid.total_nodes(); ++k) {
        grid.node_point(k, x);
        u.values[k] = phi(std::span<const double>(x.data(), grid.dim()));
    }
    return u;
}

std::vector<GridFunction> solve_gheat_snapshots(const ThetaSet& theta, GridFunction initial,
                                                std::span<const double> snapshot_times, double dt)
{
    const auto& grid = initial.grid;
    if (theta.dim() != grid.dim()) {
        throw InputError("solve_gheat: uncertainty set and grid dimensions differ");
    }
    check_monotone_stencil(theta);
    require_cfl(theta, grid, dt);
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())
        || (!snapshot_times.empty() && snapshot_times.front() < 0.0)) {
        throw InputError("solve_gheat: snapshot times must be nonnegative and ascending");
    }

    const auto cs = coefficients(theta);
    const double h2 = grid.spacing() * grid.spacing();
    std::vector<GridFunction> out;
    out.reserve(snapshot_times.size());
    std::vector<double> u = std::move(initial.values);
    std::vector<double> next(u.size());
    double elapsed = 0.0;
    const double t0 = initial.t;

    for (double target : snapshot_times) {
        const double gap = target - elapsed;
        if (gap > 0.0) {
            const auto steps = static_cast<std::size_t>(std::ceil(gap / dt - 1e-9));
            const double lambda = (gap / static_cast<double>(steps)) / h2;
            for (std::size_t s = 0; s < steps; ++s) {
                if (grid.dim() == 1) {
                    step_1d(cs, u, next, lambda);
                } else {
                    step_2d(cs, grid.n_nodes(), u, next, lambda);
                }
                u.swap(next);
            }
            elapsed = target;
            require_finite(u, t0 + target);
        }
        out.push_back(GridFunction{grid, t0 + target, u});
    }
    return out;
}

GridFunction solve_gheat(const ThetaSet& theta, GridFunction initial, double t_final, double dt)
{
    if (!(t_final > 0.0)) {
        throw InputError("solve_gheat: t_final must be positive");
    }
    const double times[] = {t_final};
    return std::move(solve_gheat_snapshots(theta, std::move(initial), times, dt).front());
}

GridFunction solve_gheat(const ThetaSet& theta, const CylinderFunctional& phi,
                         const SpatialGrid& grid, double t_final, double dt)
{
    return solve_gheat(theta, sample(phi, grid), t_final, dt);
}

} // namespace gexp::gheat
