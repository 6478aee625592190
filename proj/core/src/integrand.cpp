#include "gexp/model/integrand.hpp"

#include <cmath>

#include "gexp/errors.hpp"

namespace gexp {

Integrand Integrand::constant(Vector h)
{
    if (h.size() == 0 || !h.allFinite()) {
        throw InputError("Integrand: constant vector must be nonempty and finite");
    }
    Integrand out;
    out.kind_ = Kind::Constant;
    out.dim_ = static_cast<std::size_t>(h.size());
    out.h_max_ = h.norm();
    out.lipschitz_ = 0.0;
    out.params_ = std::move(h);
    out.name_ = "constant";
    return out;
}

Integrand Integrand::tanh(Vector scale)
{
    if (scale.size() == 0 || !scale.allFinite()) {
        throw InputError("Integrand: tanh scale must be nonempty and finite");
    }
    Integrand out;
    out.kind_ = Kind::Tanh;
    out.dim_ = static_cast<std::size_t>(scale.size());
    out.h_max_ = scale.norm();
    out.lipschitz_ = scale.cwiseAbs().maxCoeff();
    out.params_ = std::move(scale);
    out.name_ = "tanh";
    return out;
}

Integrand Integrand::markov(std::size_t dim, Rule rule, double h_max, double lipschitz,
                            std::string name)
{
    if (dim == 0 || !rule) {
        throw InputError("Integrand: Markov rule needs a positive dimension and a callable");
    }
    if (!(h_max >= 0.0) || !std::isfinite(h_max)) {
        throw InputError("Integrand: Markov rule needs a finite declared bound");
    }
    Integrand out;
    out.kind_ = Kind::Markov;
    out.dim_ = dim;
    out.rule_ = std::move(rule);
    out.h_max_ = h_max;
    out.lipschitz_ = lipschitz;
    out.name_ = std::move(name);
    return out;
}

bool Integrand::is_zero() const noexcept
{
    return kind_ != Kind::Markov && params_.cwiseAbs().maxCoeff() == 0.0;
}

void Integrand::evaluate(double t, std::span<const double> x, std::span<double> out) const
{
    switch (kind_) {
    case Kind::Constant:
        for (std::size_t i = 0; i < dim_; ++i) {
            out[i] = params_[static_cast<Eigen::Index>(i)];
        }
        return;
    case Kind::Tanh:
        for (std::size_t i = 0; i < dim_; ++i) {
            out[i] = params_[static_cast<Eigen::Index>(i)] * std::tanh(x[i]);
        }
        return;
    case Kind::Markov:
        rule_(t, x, out);
        return;
    }
}

bool operator==(const Integrand& a, const Integrand& b)
{
    if (a.kind_ != b.kind_ || a.dim_ != b.dim_) {
        return false;
    }
    if (a.kind_ == Integrand::Kind::Markov) {
        return false;
    }
    return a.params_ == b.params_;
}

} // namespace gexp
