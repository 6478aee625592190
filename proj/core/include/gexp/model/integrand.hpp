#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "gexp/model/theta_set.hpp"

namespace gexp {

/// The Girsanov integrand h. Boundedness plus a Markov dependence on
/// (t, B_t) is the checkable stand-in for membership in M^2_G.
class Integrand {
public:
    enum class Kind { Constant, Tanh, Markov };
    using Rule = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

    static Integrand constant(Vector h);
    /// h_i(t, x) = scale_i * tanh(x_i).
    static Integrand tanh(Vector scale);
    /// Arbitrary Markov rule with a declared bound |h| <= h_max.
    static Integrand markov(std::size_t dim, Rule rule, double h_max, double lipschitz,
                            std::string name = "markov");

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    double bound() const noexcept { return h_max_; }
    double lipschitz() const noexcept { return lipschitz_; }
    const std::string& name() const noexcept { return name_; }
    /// The constant vector (Constant) or the scale vector (Tanh).
    const Vector& parameters() const noexcept { return params_; }
    bool is_zero() const noexcept;

    /// Writes h(t, x) into `out` (size dim). Left-endpoint evaluation is the
    /// caller's responsibility.
    void evaluate(double t, std::span<const double> x, std::span<double> out) const;

    friend bool operator==(const Integrand& a, const Integrand& b);

private:
    Integrand() = default;

    Kind kind_ = Kind::Constant;
    std::size_t dim_ = 0;
    Vector params_;
    Rule rule_;
    double h_max_ = 0.0;
    double lipschitz_ = 0.0;
    std::string name_;
};

} // namespace gexp
