#include "gexp/model/functional.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gexp/errors.hpp"

namespace gexp {

CylinderFunctional::CylinderFunctional(std::vector<double> times, std::size_t dim, Map phi,
                                       double lipschitz, double bound, std::string name)
    : times_(std::move(times)), dim_(dim), phi_(std::move(phi)), lipschitz_(lipschitz),
      bound_(bound), name_(std::move(name))
{
    if (times_.empty()) {
        throw InputError("CylinderFunctional: needs at least one evaluation time");
    }
    if (dim_ == 0) {
        throw InputError("CylinderFunctional: dimension must be positive");
    }
    if (!std::is_sorted(times_.begin(), times_.end())) {
        throw InputError("CylinderFunctional: evaluation times must be sorted ascending");
    }
    if (!(times_.front() >= 0.0) || !std::all_of(times_.begin(), times_.end(),
                                                   [](double t) { return std::isfinite(t); })) {
        throw InputError("CylinderFunctional: evaluation times must be finite and nonnegative");
    }
    if (!phi_) {
        throw InputError("CylinderFunctional: empty map");
    }
    if (!(lipschitz_ >= 0.0) || !(bound_ >= 0.0)) {
        throw InputError("CylinderFunctional: Lipschitz constant and bound must be nonnegative");
    }
}

double CylinderFunctional::observed_lipschitz(std::size_t pairs, double radius,
                                              std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<double> x(width());
    std::vector<double> y(width());
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        double dist2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
            dist2 += (x[i] - y[i]) * (x[i] - y[i]);
        }
        if (dist2 == 0.0) {
            continue;
        }
        worst = std::max(worst, std::abs(phi_(x) - phi_(y)) / std::sqrt(dist2));
    }
    return worst;
}

bool CylinderFunctional::spot_check_lipschitz(std::size_t pairs, double radius,
                                              std::uint64_t seed) const
{
    return observed_lipschitz(pairs, radius, seed) <= lipschitz_ * (1.0 + 1e-9);
}

} // namespace gexp
