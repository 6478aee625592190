#include "gexp/stochcalc/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gexp::stochcalc {

namespace {

std::string bound_message(std::size_t path, std::size_t step, double norm, double bound)
{
    std::ostringstream msg;
    msg << "integrand bound violated on path " << path << " at step " << step << ": |h| = "
        << norm << " > " << bound;
    return msg.str();
}

std::string overflow_message(std::size_t path, double ito, double qv)
{
    std::ostringstream msg;
    msg << "density overflow on path " << path << ": ito = " << ito << ", qv_form = " << qv;
    return msg.str();
}

/// h(t_k, x) with the bound check; writes into `hv`.
void checked_h(const Integrand& h, double t, std::span<const double> x, std::span<double> hv,
               std::size_t path, std::size_t step)
{
    h.evaluate(t, x, hv);
    double n2 = 0.0;
    for (double v : hv) {
        n2 += v * v;
    }
    const double norm = std::sqrt(n2);
    if (!(norm <= h.bound() * (1.0 + 1e-12))) {
        throw IntegrandBoundError(path, step, norm, h.bound());
    }
}

/// One step of the transform given dB; h is evaluated at the left endpoint.
void transform_step(const Integrand& h, double t, std::size_t d, const double* B_k,
                    const double* dB, double* hv, const double* Bhat_k, double* Bhat_next,
                    double& ito, double& qv, std::size_t path, std::size_t step)
{
    checked_h(h, t, std::span<const double>(B_k, d), std::span<double>(hv, d), path, step);
    double hdB = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        hdB += hv[i] * dB[i];
    }
    ito += hdB;
    qv += hdB * hdB;
    // (dB dB^T h)_i = dB_i (dB . h)
    for (std::size_t i = 0; i < d; ++i) {
        Bhat_next[i] = Bhat_k[i] + dB[i] - dB[i] * hdB;
    }
}

} // namespace

IntegrandBoundError::IntegrandBoundError(std::size_t path, std::size_t step, double norm,
                                         double bound)
    : InputError(bound_message(path, step, norm, bound)), path_(path), step_(step)
{
}

DensityOverflowError::DensityOverflowError(std::size_t path, double ito, double qv_form)
    : NumericalError(overflow_message(path, ito, qv_form)), path_(path), ito_(ito), qv_form_(qv_form)
{
}

PathArray ito_integral(const Integrand& h, const montecarlo::PathBundle& bundle)
{
    if (h.dim() != bundle.dim) {
        throw InputError("ito_integral: integrand and bundle dimensions differ");
    }
    const std::size_t N = bundle.grid.n_steps();
    const std::size_t d = bundle.dim;
    PathArray out(bundle.n_paths * (N + 1), 0.0);
    std::vector<double> hv(d);
    for (std::size_t p = 0; p < bundle.n_paths; ++p) {
        const auto B = bundle.path(p);
        double* I = &out[p * (N + 1)];
        for (std::size_t k = 0; k < N; ++k) {
            checked_h(h, bundle.grid.time(k), B.subspan(k * d, d), hv, p, k);
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                s += hv[i] * (B[(k + 1) * d + i] - B[k * d + i]);
            }
            I[k + 1] = I[k] + s;
        }
    }
    return out;
}

std::vector<double> quadratic_variation(const montecarlo::PathBundle& bundle)
{
    const std::size_t N = bundle.grid.n_steps();
    const std::size_t d = bundle.dim;
    const std::size_t dd = d * d;
    std::vector<double> out(bundle.n_paths * (N + 1) * dd, 0.0);
    for (std::size_t p = 0; p < bundle.n_paths; ++p) {
        const auto B = bundle.path(p);
        double* Q = &out[p * (N + 1) * dd];
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t i = 0; i < d; ++i) {
                const double dBi = B[(k + 1) * d + i] - B[k * d + i];
                for (std::size_t j = 0; j < d; ++j) {
                    const double dBj = B[(k + 1) * d + j] - B[k * d + j];
                    Q[(k + 1) * dd + i * d + j] = Q[k * dd + i * d + j] + dBi * dBj;
                }
            }
        }
    }
    return out;
}

GirsanovTransform girsanov_transform(const Integrand& h, const montecarlo::PathBundle& bundle)
{
    if (h.dim() != bundle.dim) {
        throw InputError("girsanov_transform: integrand and bundle dimensions differ");
    }
    const std::size_t N = bundle.grid.n_steps();
    const std::size_t d = bundle.dim;
    const std::size_t M = bundle.n_paths;
    GirsanovTransform g{bundle.grid, M, d, {}, {}, {}, {}, {}};
    g.ito.assign(M * (N + 1), 0.0);
    g.qv_form.assign(M * (N + 1), 0.0);
    g.log_D.assign(M * (N + 1), 0.0);
    g.D.assign(M * (N + 1), 1.0);
    g.B_hat.assign(M * (N + 1) * d, 0.0);
    std::vector<double> hv(d);
    std::vector<double> dB(d);
    for (std::size_t p = 0; p < M; ++p) {
        const auto B = bundle.path(p);
        double* ito = &g.ito[p * (N + 1)];
        double* qv = &g.qv_form[p * (N + 1)];
        double* Bh = &g.B_hat[p * (N + 1) * d];
        for (std::size_t k = 0; k < N; ++k) {
            for (std::size_t i = 0; i < d; ++i) {
                dB[i] = B[(k + 1) * d + i] - B[k * d + i];
            }
            ito[k + 1] = ito[k];
            qv[k + 1] = qv[k];
            transform_step(h, bundle.grid.time(k), d, &B[k * d], dB.data(), hv.data(), &Bh[k * d],
                           &Bh[(k + 1) * d], ito[k + 1], qv[k + 1], p, k);
        }
        for (std::size_t k = 0; k <= N; ++k) {
            const std::size_t at = p * (N + 1) + k;
            g.log_D[at] = ito[k] - 0.5 * qv[k];
            g.D[at] = std::exp(g.log_D[at]);
            if (!std::isfinite(g.D[at])) {
                throw DensityOverflowError(p, ito[k], qv[k]);
            }
        }
    }
    return g;
}

PathTransform::PathTransform(std::size_t n_steps, std::size_t dim)
    : B((n_steps + 1) * dim), B_hat((n_steps + 1) * dim), ito(n_steps + 1), qv_form(n_steps + 1)
{
}

void simulate_transformed_path(const ControlPolicy& policy, const Integrand& h,
                               std::span<const double> dW, Observe observe, std::size_t path,
                               PathTransform& out, Matrix& scratch)
{
    const std::size_t d = policy.theta().dim();
    const std::size_t N = policy.grid().n_steps();
    double dB[8];
    double hv[8];
    std::vector<double> big;
    double* dBp = dB;
    double* hvp = hv;
    if (d > 8) {
        big.resize(2 * d);
        dBp = big.data();
        hvp = big.data() + d;
    }
    std::fill_n(out.B.begin(), d, 0.0);
    std::fill_n(out.B_hat.begin(), d, 0.0);
    out.ito[0] = 0.0;
    out.qv_form[0] = 0.0;
    const auto& seen = observe == Observe::Transformed ? out.B_hat : out.B;
    for (std::size_t k = 0; k < N; ++k) {
        const Matrix& gamma = policy.control(k, PathView(seen, d, k), scratch);
        montecarlo::apply_control(gamma, &dW[k * d], dBp);
        for (std::size_t i = 0; i < d; ++i) {
            out.B[(k + 1) * d + i] = out.B[k * d + i] + dBp[i];
        }
        out.ito[k + 1] = out.ito[k];
        out.qv_form[k + 1] = out.qv_form[k];
        transform_step(h, policy.grid().time(k), d, &out.B[k * d], dBp, hvp, &out.B_hat[k * d],
                       &out.B_hat[(k + 1) * d], out.ito[k + 1], out.qv_form[k + 1], path, k);
    }
}

montecarlo::EstimateWithError weighted_estimate(std::span<const double> values,
                                                std::span<const double> log_weights,
                                                std::uint64_t seed)
{
    if (values.size() != log_weights.size() || values.empty()) {
        throw InputError("weighted_estimate: need matching, nonempty samples and weights");
    }
    double m = -std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        if (log_weights[i] > m) {
            m = log_weights[i];
            worst = i;
        }
    }
    if (!std::isfinite(m)) {
        throw DensityOverflowError(worst, log_weights[worst], 0.0);
    }
    const double shift = std::max(m, 0.0);
    std::vector<double> prod(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        prod[i] = values[i] * std::exp(log_weights[i] - shift);
    }
    auto e = montecarlo::summarize(prod, seed);
    if (shift > 0.0) {
        const double scale = std::exp(shift);
        e.value *= scale;
        e.std_error *= scale;
        if (!std::isfinite(e.value) || !std::isfinite(e.std_error)) {
            throw DensityOverflowError(worst, log_weights[worst], 0.0);
        }
    }
    return e;
}

} // namespace gexp::stochcalc
