#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gexp {

/// A cylinder functional phi(B_{t_1}, ..., B_{t_k}).
///
/// `phi` receives the k path values flattened time-major: the first `dim`
/// entries are B_{t_1}, the next `dim` are B_{t_2}, and so on. The declared
/// Lipschitz constant and bound may be +inf for unbounded test payoffs such
/// as x^2.
class CylinderFunctional {
public:
    using Map = std::function<double(std::span<const double>)>;

    CylinderFunctional(std::vector<double> times, std::size_t dim, Map phi,
                       double lipschitz = std::numeric_limits<double>::infinity(),
                       double bound = std::numeric_limits<double>::infinity(),
                       std::string name = {});

    const std::vector<double>& times() const noexcept { return times_; }
    std::size_t arity() const noexcept { return times_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t width() const noexcept { return times_.size() * dim_; }
    double lipschitz() const noexcept { return lipschitz_; }
    double bound() const noexcept { return bound_; }
    const std::string& name() const noexcept { return name_; }

    double operator()(std::span<const double> x) const { return phi_(x); }
    const Map& map() const noexcept { return phi_; }

    /// Largest observed |phi(x) - phi(y)| / |x - y| over `pairs` random pairs
    /// drawn uniformly from [-radius, radius]^width.
    double observed_lipschitz(std::size_t pairs, double radius, std::uint64_t seed) const;

    /// True when the observed ratio never exceeds the declared constant
    /// (with 1e-9 relative slack).
    bool spot_check_lipschitz(std::size_t pairs, double radius, std::uint64_t seed) const;

private:
    std::vector<double> times_;
    std::size_t dim_;
    Map phi_;
    double lipschitz_;
    double bound_;
    std::string name_;
};

} // namespace gexp
