#include "gexp/expectation/lattice_function.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gexp/errors.hpp"

namespace gexp::expectation {

namespace {
constexpr std::size_t kMaxDims = 8;
}

LatticeFunction::LatticeFunction(std::vector<Axis> axes, std::size_t components)
    : axes_(std::move(axes)), components_(components)
{
    if (axes_.size() > kMaxDims) {
        throw InputError("LatticeFunction: at most 8 dimensions are supported");
    }
    if (components_ == 0) {
        throw InputError("LatticeFunction: need at least one component");
    }
    strides_.resize(axes_.size());
    nodes_ = 1;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (axes_[a].count == 0 || !(axes_[a].spacing > 0.0)) {
            throw InputError("LatticeFunction: axes need a positive spacing and count");
        }
        strides_[a] = nodes_;
        nodes_ *= axes_[a].count;
    }
    values_.assign(nodes_ * components_, 0.0);
}

void LatticeFunction::node_point(std::size_t flat, std::span<double> out) const noexcept
{
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        out[a] = axes_[a].coord(flat % axes_[a].count);
        flat /= axes_[a].count;
    }
}

double LatticeFunction::operator()(std::span<const double> x) const noexcept
{
    if (components_ == 1) {
        double v = 0.0;
        evaluate(x, std::span<double>(&v, 1));
        return v;
    }
    std::array<double, 16> buf{};
    evaluate(x, std::span<double>(buf.data(), std::min<std::size_t>(components_, buf.size())));
    return buf[0];
}

void LatticeFunction::evaluate(std::span<const double> x, std::span<double> out) const noexcept
{
    const std::size_t D = axes_.size();
    const std::size_t C = std::min(out.size(), components_);
    std::array<std::size_t, kMaxDims> base{};
    std::array<double, kMaxDims> frac{};
    std::array<std::size_t, kMaxDims> step{};
    std::size_t base_flat = 0;
    for (std::size_t a = 0; a < D; ++a) {
        const auto& ax = axes_[a];
        if (ax.count == 1) {
            base[a] = 0;
            frac[a] = 0.0;
            step[a] = 0;
            continue;
        }
        const double s = std::clamp((x[a] - ax.origin) / ax.spacing, 0.0,
                                    static_cast<double>(ax.count - 1));
        auto i = static_cast<std::size_t>(s);
        i = std::min(i, ax.count - 2);
        base[a] = i;
        frac[a] = s - static_cast<double>(i);
        step[a] = strides_[a];
        base_flat += i * strides_[a];
    }
    for (std::size_t c = 0; c < C; ++c) {
        out[c] = 0.0;
    }
    const std::size_t corners = std::size_t{1} << D;
    for (std::size_t m = 0; m < corners; ++m) {
        double w = 1.0;
        std::size_t flat = base_flat;
        for (std::size_t a = 0; a < D; ++a) {
            if (m & (std::size_t{1} << a)) {
                w *= frac[a];
                flat += step[a];
            } else {
                w *= 1.0 - frac[a];
            }
        }
        if (w == 0.0) {
            continue;
        }
        const double* v = &values_[flat * components_];
        for (std::size_t c = 0; c < C; ++c) {
            out[c] += w * v[c];
        }
    }
}

} // namespace gexp::expectation
