#include "gexp/model/payoffs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "gexp/errors.hpp"

namespace gexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array kSingleKinds{"constant", "identity", "square", "neg_square", "call",
                                  "put", "indicator_smoothed", "kink", "butterfly"};
constexpr std::array kMultiKinds{"increment", "sum_over_times", "product_over_times",
                                 "max_over_times"};

using PointMap = std::function<double(std::span<const double>)>;

struct PointPayoff {
    PointMap f;
    double lipschitz;
    double bound;
};

double sq_norm(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return s;
}

PointPayoff single(const PayoffSpec& s, std::size_t dim)
{
    const auto c = s.coord;
    if (c >= dim) {
        throw InputError("payoff '" + s.kind + "': coord " + std::to_string(c)
                         + " out of range for dimension " + std::to_string(dim));
    }
    const double K = s.strike;
    const double w = s.width;
    if (s.kind == "constant") {
        const double v = s.value;
        return {[v](std::span<const double>) { return v; }, 0.0, std::abs(v)};
    }
    if (s.kind == "identity") {
        return {[c](std::span<const double> x) { return x[c]; }, 1.0, kInf};
    }
    if (s.kind == "square") {
        return {[](std::span<const double> x) { return sq_norm(x); }, kInf, kInf};
    }
    if (s.kind == "neg_square") {
        return {[](std::span<const double> x) { return -sq_norm(x); }, kInf, kInf};
    }
    if (s.kind == "call") {
        return {[c, K](std::span<const double> x) { return std::max(x[c] - K, 0.0); }, 1.0, kInf};
    }
    if (s.kind == "put") {
        return {[c, K](std::span<const double> x) { return std::max(K - x[c], 0.0); }, 1.0, kInf};
    }
    if (s.kind == "indicator_smoothed") {
        if (!(w > 0.0)) {
            throw InputError("payoff 'indicator_smoothed': width must be positive");
        }
        return {[c, K, w](std::span<const double> x) {
                    return std::clamp((x[c] - K) / w + 0.5, 0.0, 1.0);
                },
                1.0 / w, 1.0};
    }
    if (s.kind == "kink") {
        const double up = s.up;
        const double down = s.down;
        return {[c, up, down](std::span<const double> x) {
                    return up * std::max(x[c], 0.0) - down * std::max(-x[c], 0.0);
                },
                std::max(std::abs(up), std::abs(down)), kInf};
    }
    if (s.kind == "butterfly") {
        if (!(w > 0.0)) {
            throw InputError("payoff 'butterfly': width must be positive");
        }
        return {[c, K, w](std::span<const double> x) {
                    const double y = x[c] - K;
                    return std::max(y + w, 0.0) - 2.0 * std::max(y, 0.0) + std::max(y - w, 0.0);
                },
                1.0, w};
    }
    throw InputError("unknown single-time payoff kind '" + s.kind + "'");
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string describe_point(const PayoffSpec& s)
{
    if (s.kind == "constant") {
        return "constant(" + fmt(s.value) + ")";
    }
    if (s.kind == "call" || s.kind == "put") {
        return s.kind + "(K=" + fmt(s.strike) + ")";
    }
    if (s.kind == "indicator_smoothed" || s.kind == "butterfly") {
        return s.kind + "(K=" + fmt(s.strike) + ",w=" + fmt(s.width) + ")";
    }
    if (s.kind == "kink") {
        return "kink(" + fmt(s.up) + "," + fmt(s.down) + ")";
    }
    return s.kind;
}

} // namespace

bool operator==(const PayoffSpec& a, const PayoffSpec& b)
{
    const bool inner_eq = (!a.inner && !b.inner) || (a.inner && b.inner && *a.inner == *b.inner);
    return a.kind == b.kind && a.times == b.times && a.value == b.value && a.strike == b.strike
           && a.width == b.width && a.up == b.up && a.down == b.down && a.coord == b.coord
           && inner_eq;
}

bool is_single_time_kind(const std::string& kind)
{
    return std::find(kSingleKinds.begin(), kSingleKinds.end(), kind) != kSingleKinds.end();
}

bool is_multi_time_kind(const std::string& kind)
{
    return std::find(kMultiKinds.begin(), kMultiKinds.end(), kind) != kMultiKinds.end();
}

CylinderFunctional make_functional(const PayoffSpec& spec, std::size_t dim)
{
    if (is_single_time_kind(spec.kind)) {
        if (spec.times.size() != 1) {
            throw InputError("payoff '" + spec.kind + "' takes exactly one evaluation time");
        }
        auto p = single(spec, dim);
        return CylinderFunctional(spec.times, dim, std::move(p.f), p.lipschitz, p.bound,
                                  describe(spec));
    }
    if (!is_multi_time_kind(spec.kind)) {
        throw InputError("unknown payoff kind '" + spec.kind + "'");
    }
    if (!spec.inner || !is_single_time_kind(spec.inner->kind)) {
        throw InputError("payoff '" + spec.kind + "' needs a single-time 'inner' payoff");
    }
    const auto k = spec.times.size();
    if (k == 0) {
        throw InputError("payoff '" + spec.kind + "' needs evaluation times");
    }
    auto p = single(*spec.inner, dim);
    const auto sqrt_k = std::sqrt(static_cast<double>(k));

    if (spec.kind == "increment") {
        if (k != 2) {
            throw InputError("payoff 'increment' takes exactly two evaluation times");
        }
        auto f = [g = p.f, dim](std::span<const double> x) {
            std::array<double, 8> buf{};
            for (std::size_t i = 0; i < dim; ++i) {
                buf[i] = x[dim + i] - x[i];
            }
            return g(std::span<const double>(buf.data(), dim));
        };
        if (dim > 8) {
            throw InputError("payoff 'increment': dimension above 8 is not supported");
        }
        return CylinderFunctional(spec.times, dim, std::move(f), std::sqrt(2.0) * p.lipschitz,
                                  p.bound, describe(spec));
    }
    if (spec.kind == "sum_over_times") {
        auto f = [g = p.f, dim, k](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                s += g(x.subspan(j * dim, dim));
            }
            return s;
        };
        return CylinderFunctional(spec.times, dim, std::move(f), sqrt_k * p.lipschitz,
                                  static_cast<double>(k) * p.bound, describe(spec));
    }
    if (spec.kind == "product_over_times") {
        auto f = [g = p.f, dim, k](std::span<const double> x) {
            double s = 1.0;
            for (std::size_t j = 0; j < k; ++j) {
                s *= g(x.subspan(j * dim, dim));
            }
            return s;
        };
        const double b = p.bound;
        const double lip = std::isfinite(b) ? std::pow(b, static_cast<double>(k - 1)) * sqrt_k
                                                  * p.lipschitz
                                            : kInf;
        return CylinderFunctional(spec.times, dim, std::move(f), lip,
                                  std::pow(b, static_cast<double>(k)), describe(spec));
    }
    // max_over_times
    auto f = [g = p.f, dim, k](std::span<const double> x) {
        double s = -kInf;
        for (std::size_t j = 0; j < k; ++j) {
            s = std::max(s, g(x.subspan(j * dim, dim)));
        }
        return s;
    };
    return CylinderFunctional(spec.times, dim, std::move(f), p.lipschitz, p.bound,
                              describe(spec));
}

std::string describe(const PayoffSpec& spec)
{
    std::string head;
    if (spec.inner) {
        head = spec.kind + "[" + describe_point(*spec.inner) + "]";
    } else {
        head = describe_point(spec);
    }
    std::string t = "@[";
    for (std::size_t i = 0; i < spec.times.size(); ++i) {
        t += (i ? "," : "") + fmt(spec.times[i]);
    }
    return head + t + "]";
}

} // namespace gexp
