#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gexp::expectation {

struct Axis {
    double origin = 0.0;
    double spacing = 1.0;
    std::size_t count = 1;

    double coord(std::size_t i) const noexcept { return origin + static_cast<double>(i) * spacing; }
    double last() const noexcept { return coord(count - 1); }
};

/// Values on a tensor lattice (axis 0 varies fastest), possibly vector valued
/// with `components` entries per node. Queries use multilinear interpolation;
/// points outside the lattice are clamped onto its boundary.
class LatticeFunction {
public:
    LatticeFunction() = default;
    LatticeFunction(std::vector<Axis> axes, std::size_t components = 1);

    std::size_t dims() const noexcept { return axes_.size(); }
    std::size_t components() const noexcept { return components_; }
    std::size_t nodes() const noexcept { return nodes_; }
    const std::vector<Axis>& axes() const noexcept { return axes_; }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    void node_point(std::size_t flat, std::span<double> out) const noexcept;

    /// First component at x.
    double operator()(std::span<const double> x) const noexcept;
    /// All components at x, written to `out`.
    void evaluate(std::span<const double> x, std::span<double> out) const noexcept;

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t components_ = 1;
    std::size_t nodes_ = 1;
    std::vector<double> values_;
};

} // namespace gexp::expectation
