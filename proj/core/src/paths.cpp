#include "gexp/montecarlo/paths.hpp"

#include <algorithm>

#include "gexp/errors.hpp"

namespace gexp::montecarlo {

std::span<const double> PathBundle::increments(std::size_t p) const
{
    const std::size_t w = grid.n_steps() * dim;
    return std::span<const double>(dW).subspan(p * w, w);
}

std::span<const double> PathBundle::path(std::size_t p) const
{
    const std::size_t w = (grid.n_steps() + 1) * dim;
    return std::span<const double>(B).subspan(p * w, w);
}

PathView PathBundle::view(std::size_t p) const
{
    return PathView(path(p), dim, grid.n_steps());
}

void draw_increments(const BundleParams& params, std::size_t dim, std::size_t p,
                     std::span<double> dW)
{
    gaussian_stream(params.seed, p, params.grid.dt(), dW.first(params.grid.n_steps() * dim));
}

void apply_control(const Matrix& gamma, const double* dW, double* dB) noexcept
{
    const auto d = gamma.rows();
    if (d == 1) {
        dB[0] = gamma(0, 0) * dW[0];
        return;
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            s += gamma(i, j) * dW[j];
        }
        dB[i] = s;
    }
}

void simulate_path(const ControlPolicy& policy, std::span<const double> dW, std::span<double> B,
                   Matrix& scratch)
{
    const std::size_t d = policy.theta().dim();
    const std::size_t N = policy.grid().n_steps();
    std::fill(B.begin(), B.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
    std::vector<double> dB(d);
    for (std::size_t k = 0; k < N; ++k) {
        const PathView observed(B, d, k);
        const Matrix& gamma = policy.control(k, observed, scratch);
        apply_control(gamma, &dW[k * d], dB.data());
        for (std::size_t i = 0; i < d; ++i) {
            B[(k + 1) * d + i] = B[k * d + i] + dB[i];
        }
    }
}

PathBundle simulate_law(const ControlPolicy& policy, const BundleParams& params)
{
    if (!(policy.grid() == params.grid)) {
        throw InputError("simulate_law: policy grid does not match the bundle grid");
    }
    if (params.n_paths == 0) {
        throw InputError("simulate_law: need at least one path");
    }
    const std::size_t d = policy.theta().dim();
    const std::size_t N = params.grid.n_steps();
    PathBundle bundle{params.grid, params.n_paths, params.seed, d, {}, {}};
    bundle.dW.resize(params.n_paths * N * d);
    bundle.B.resize(params.n_paths * (N + 1) * d);
    parallel_for(params.n_paths, params.threads, [&](std::size_t lo, std::size_t hi) {
        Matrix scratch(d, d);
        for (std::size_t p = lo; p < hi; ++p) {
            std::span<double> dW(&bundle.dW[p * N * d], N * d);
            draw_increments(params, d, p, dW);
            simulate_path(policy, dW, std::span<double>(&bundle.B[p * (N + 1) * d], (N + 1) * d),
                          scratch);
        }
    });
    return bundle;
}

} // namespace gexp::montecarlo
