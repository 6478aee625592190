#pragma once

#include <span>
#include <vector>

#include "gexp/gheat/grid.hpp"
#include "gexp/model/functional.hpp"
#include "gexp/model/theta_set.hpp"

namespace gexp::gheat {

/// Largest admissible explicit step, h^2 / (2 d sigma_max^2).
double max_stable_dt(const ThetaSet& theta, const SpatialGrid& grid);

/// Rejects 2D uncertainty sets whose covariances are not diagonally
/// dominant (a_ii >= sum_{j != i} |a_ij|); the mixed-derivative stencil is
/// monotone only under that condition. Throws ConfigurationError.
void check_monotone_stencil(const ThetaSet& theta);

/// Samples a single-time functional on every node of `grid`.
GridFunction sample(const CylinderFunctional& phi, const SpatialGrid& grid);

/// Explicit monotone scheme for du/dt = G(D^2 u), u(0, .) = phi:
///   u^{m+1} = u^m + dt * max_gamma L_gamma^h u^m
/// with centered second differences. In 2D the mixed term uses the
/// seven-point stencil oriented by the sign of a_12, which is monotone under
/// diagonal dominance. At edge nodes the normal and mixed second differences
/// vanish (ghost nodes continue the solution linearly).
///
/// The requested `dt` must satisfy the CFL bound (ConfigurationError
/// otherwise); the actual step is t_final / ceil(t_final / dt) <= dt.
/// NumericalError is thrown if a non-finite value appears.
GridFunction solve_gheat(const ThetaSet& theta, const CylinderFunctional& phi,
                         const SpatialGrid& grid, double t_final, double dt);

GridFunction solve_gheat(const ThetaSet& theta, GridFunction initial, double t_final, double dt);

/// Marches `initial` through the ascending `snapshot_times` (measured from
/// initial.t) and returns the solution at each. Zero gaps are allowed.
std::vector<GridFunction> solve_gheat_snapshots(const ThetaSet& theta, GridFunction initial,
                                                std::span<const double> snapshot_times, double dt);

} // namespace gexp::gheat
