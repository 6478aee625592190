#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "gexp/model/functional.hpp"

namespace gexp {

/// Built-in test-function vocabulary. Every payoff declares an honest
/// Lipschitz constant and bound, so no user-supplied expressions are accepted.
///
/// Single-time kinds (one entry in `times`, or none when used as `inner`):
///   constant(value), identity(coord), square = |x|^2, neg_square = -|x|^2,
///   call(strike, coord), put(strike, coord),
///   indicator_smoothed(strike, width, coord): ramp from 0 to 1 over
///     [strike - width/2, strike + width/2],
///   kink(up, down, coord): up * x^+ - down * x^-,
///   butterfly(strike, width, coord).
/// Multi-time kinds built on a single-time `inner`:
///   increment: inner(x_2 - x_1) on exactly two times,
///   sum_over_times, product_over_times, max_over_times.
struct PayoffSpec {
    std::string kind;
    std::vector<double> times;
    double value = 0.0;
    double strike = 0.0;
    double width = 1.0;
    double up = 1.0;
    double down = 0.5;
    std::size_t coord = 0;
    std::shared_ptr<const PayoffSpec> inner;

    friend bool operator==(const PayoffSpec& a, const PayoffSpec& b);
};

bool is_single_time_kind(const std::string& kind);
bool is_multi_time_kind(const std::string& kind);

/// Builds the functional for a d-dimensional path. Throws InputError on an
/// unknown kind, a wrong number of times or an out-of-range coordinate.
CylinderFunctional make_functional(const PayoffSpec& spec, std::size_t dim);

/// Human-readable label, e.g. "call(K=0)@[1]".
std::string describe(const PayoffSpec& spec);

} // namespace gexp
