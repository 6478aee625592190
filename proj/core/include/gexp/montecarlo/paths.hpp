#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gexp/model/control_policy.hpp"
#include "gexp/model/time_grid.hpp"
#include "gexp/montecarlo/rng.hpp"
#include "gexp/util/parallel.hpp"

namespace gexp::montecarlo {

struct BundleParams {
    TimeGrid grid;
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Materialised increments and controlled paths, stored path-major:
/// dW[(p N + k) d + i] and B[(p (N + 1) + k) d + i].
struct PathBundle {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    std::vector<double> dW;
    std::vector<double> B;

    std::span<const double> increments(std::size_t p) const;
    std::span<const double> path(std::size_t p) const;
    PathView view(std::size_t p) const;
};

/// The N d Gaussian increments (variance dt) of path `p`.
void draw_increments(const BundleParams& params, std::size_t dim, std::size_t p,
                     std::span<double> dW);

/// B_{k+1} = B_k + gamma_k dW_k with B_0 = 0, where gamma_k is chosen by the
/// policy from B observed up to step k. `B` holds (N + 1) d values.
void simulate_path(const ControlPolicy& policy, std::span<const double> dW, std::span<double> B,
                   Matrix& scratch);

/// dB = gamma dW for a single step.
void apply_control(const Matrix& gamma, const double* dW, double* dB) noexcept;

PathBundle simulate_law(const ControlPolicy& policy, const BundleParams& params);

/// Streams paths without materialising a bundle: body(p, dW) is
/// called once per path index with that path's increments.
template <class Body>
void for_each_path(const BundleParams& params, std::size_t dim, Body&& body)
{
    const std::size_t width = params.grid.n_steps() * dim;
    parallel_for(params.n_paths, params.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> dW(width);
        for (std::size_t p = lo; p < hi; ++p) {
            draw_increments(params, dim, p, dW);
            body(p, std::span<const double>(dW));
        }
    });
}

} // namespace gexp::montecarlo
