#include "gexp/montecarlo/estimators.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "gexp/errors.hpp"
#include "gexp/util/summation.hpp"

namespace gexp::montecarlo {

EstimateWithError summarize(std::span<const double> values, std::uint64_t seed)
{
    EstimateWithError e;
    e.n_paths = values.size();
    e.seed = seed;
    if (values.empty()) {
        return e;
    }
    const double M = static_cast<double>(values.size());
    const double shift = values.front();
    std::vector<double> work(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        work[i] = values[i] - shift;
    }
    e.value = shift + pairwise_sum(work) / M;
    if (values.size() > 1) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double r = values[i] - e.value;
            work[i] = r * r;
        }
        e.std_error = std::sqrt(pairwise_sum(work) / (M - 1.0) / M);
    }
    return e;
}

PathFunction on_path(const CylinderFunctional& f, const TimeGrid& grid)
{
    std::vector<std::size_t> idx;
    for (double t : f.times()) {
        idx.push_back(grid.snap(t));
    }
    const std::size_t d = f.dim();
    return [f, idx, d](const PathView& path) {
        double x[16];
        std::vector<double> big;
        double* dst = x;
        if (idx.size() * d > 16) {
            big.resize(idx.size() * d);
            dst = big.data();
        }
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const auto v = path.at(idx[j]);
            for (std::size_t i = 0; i < d; ++i) {
                dst[j * d + i] = v[i];
            }
        }
        return f(std::span<const double>(dst, idx.size() * d));
    };
}

FamilyValues evaluate_family(const ControlFamily& family, std::span<const PathFunction> functions,
                             const BundleParams& params)
{
    if (!(family.grid() == params.grid)) {
        throw InputError("evaluate_family: family grid does not match the bundle grid");
    }
    if (params.n_paths == 0) {
        throw InputError("evaluate_family: need at least one path");
    }
    const std::size_t d = family.theta().dim();
    const std::size_t N = params.grid.n_steps();
    const std::size_t P = family.size();
    FamilyValues out(functions.size(),
                     std::vector<std::vector<double>>(P, std::vector<double>(params.n_paths)));
    parallel_for(params.n_paths, params.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> dW(N * d);
        std::vector<double> B((N + 1) * d);
        Matrix scratch(d, d);
        for (std::size_t p = lo; p < hi; ++p) {
            draw_increments(params, d, p, dW);
            for (std::size_t q = 0; q < P; ++q) {
                simulate_path(family.policies()[q], dW, B, scratch);
                const PathView view(B, d, N);
                for (std::size_t f = 0; f < functions.size(); ++f) {
                    out[f][q][p] = functions[f](view);
                }
            }
        }
    });
    return out;
}

EstimateWithError expectation_under(const ControlPolicy& policy, const CylinderFunctional& f,
                                    const PathBundle& bundle)
{
    if (!(policy.grid() == bundle.grid) || policy.theta().dim() != bundle.dim
        || f.dim() != bundle.dim) {
        throw InputError("expectation_under: policy, functional and bundle shapes differ");
    }
    const auto g = on_path(f, bundle.grid);
    std::vector<double> values(bundle.n_paths);
    for (std::size_t p = 0; p < bundle.n_paths; ++p) {
        values[p] = g(bundle.view(p));
    }
    return summarize(values, bundle.seed);
}

EstimateWithError expectation_under(const ControlPolicy& policy, const CylinderFunctional& f,
                                    const BundleParams& params)
{
    if (f.dim() != policy.theta().dim()) {
        throw InputError("expectation_under: functional and policy dimensions differ");
    }
    const ControlFamily single({policy}, ControlFamily::Mode::Mixed);
    const PathFunction g[] = {on_path(f, params.grid)};
    const auto values = evaluate_family(single, g, params);
    return summarize(values[0][0], params.seed);
}

UpperEstimate upper_of(const ControlFamily& family,
                       const std::vector<std::vector<double>>& per_policy_values,
                       std::uint64_t seed)
{
    UpperEstimate u;
    for (const auto& v : per_policy_values) {
        u.per_policy.push_back(summarize(v, seed));
    }
    for (std::size_t q = 1; q < u.per_policy.size(); ++q) {
        if (u.per_policy[q].value > u.per_policy[u.argmax].value) {
            u.argmax = q;
        }
    }
    u.estimate = u.per_policy[u.argmax];
    u.argmax_name = family.policies()[u.argmax].name();
    return u;
}

std::vector<UpperEstimate> upper_expectation(const ControlFamily& family,
                                             std::span<const CylinderFunctional> battery,
                                             const BundleParams& params)
{
    std::vector<PathFunction> fns;
    for (const auto& f : battery) {
        if (f.dim() != family.theta().dim()) {
            throw InputError("upper_expectation: functional and family dimensions differ");
        }
        fns.push_back(on_path(f, params.grid));
    }
    const auto values = evaluate_family(family, fns, params);
    std::vector<UpperEstimate> out;
    for (const auto& v : values) {
        out.push_back(upper_of(family, v, params.seed));
    }
    return out;
}

UpperEstimate upper_expectation(const ControlFamily& family, const CylinderFunctional& f,
                                const BundleParams& params)
{
    return upper_expectation(family, std::span<const CylinderFunctional>(&f, 1), params).front();
}

UpperEstimate capacity(const ControlFamily& family, const PathPredicate& event,
                       const BundleParams& params)
{
    const PathFunction indicator[] = {
        [&event](const PathView& path) { return event(path) ? 1.0 : 0.0; }};
    const auto values = evaluate_family(family, indicator, params);
    return upper_of(family, values[0], params.seed);
}

void write_path_values_csv(std::ostream& os, const std::vector<std::string>& names,
                           const std::vector<std::span<const double>>& columns)
{
    if (names.size() != columns.size()) {
        throw InputError("write_path_values_csv: one name per column required");
    }
    os << "path";
    for (const auto& n : names) {
        os << ',' << n;
    }
    os << '\n' << std::setprecision(17);
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        os << r;
        for (const auto& c : columns) {
            os << ',' << c[r];
        }
        os << '\n';
    }
}

} // namespace gexp::montecarlo
