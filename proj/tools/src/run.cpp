#include "gexp/cli/run.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <spdlog/spdlog.h>

#include "gexp/errors.hpp"
#include "gexp/expectation/recursion.hpp"
#include "gexp/gheat/solver.hpp"
#include "gexp/girsanov/girsanov.hpp"
#include "gexp/montecarlo/estimators.hpp"
#include "gexp/montecarlo/family.hpp"
#include "gexp/stochcalc/calculus.hpp"
#include "gexp/util/parallel.hpp"

namespace gexp::cli {

namespace {

using montecarlo::ControlFamily;

json to_json(const montecarlo::EstimateWithError& e)
{
    return json{{"value", e.value}, {"se", e.std_error}, {"n_paths", e.n_paths}, {"seed", e.seed}};
}

json to_json(const montecarlo::UpperEstimate& u)
{
    json per = json::array();
    for (const auto& e : u.per_policy) {
        per.push_back(json{{"value", e.value}, {"se", e.std_error}});
    }
    return json{{"value", u.estimate.value},
                {"se", u.estimate.std_error},
                {"argmax", u.argmax_name},
                {"per_policy", std::move(per)}};
}

montecarlo::BundleParams bundle_params(const RunConfig& c)
{
    return {c.grid, c.paths, c.seed, c.threads};
}

expectation::PlanOptions plan_options(const RunConfig& c)
{
    auto p = c.pde;
    p.threads = c.threads;
    return p;
}

std::vector<CylinderFunctional> battery(const RunConfig& c)
{
    std::vector<CylinderFunctional> out;
    for (const auto& p : c.battery) {
        out.push_back(make_functional(p, c.theta->dim()));
    }
    return out;
}

ControlFamily base_family(const RunConfig& c)
{
    std::optional<ControlFamily> fam;
    if (c.family.bang_bang_blocks > 0) {
        fam = montecarlo::bang_bang_family(c.grid, *c.theta, c.family.bang_bang_blocks);
    }
    if (c.family.random_schedules > 0) {
        auto r = montecarlo::random_schedule_family(c.grid, *c.theta, c.family.random_schedules,
                                                    c.family.random_seed, c.family.random_blocks);
        fam = fam ? fam->merged_with(r) : r;
    }
    return *fam;
}

std::string label(const CylinderFunctional& f, std::size_t i)
{
    return f.name().empty() ? "f" + std::to_string(i) : f.name();
}

RunResult run_gheat(const RunConfig& c, std::ostream* dump)
{
    const ThetaSet& theta = *c.theta;
    const std::size_t d = theta.dim();
    auto points = c.points;
    if (points.empty()) {
        points.push_back(std::vector<double>(d, 0.0));
    }
    RunResult out;
    out.report["results"] = json::array();
    if (dump) {
        *dump << "function";
        for (std::size_t i = 0; i < d; ++i) {
            *dump << ",x" << i;
        }
        *dump << ",value\n";
        dump->precision(17);
    }
    const auto fns = battery(c);
    for (std::size_t i = 0; i < fns.size(); ++i) {
        const auto& f = fns[i];
        const double t = f.times().front();
        const auto grid = gheat::SpatialGrid::covering(theta, t, c.pde.offset, c.pde.spacing);
        const double dt = c.pde.cfl_fraction * gheat::max_stable_dt(theta, grid);
        const auto u = gheat::solve_gheat(theta, f, grid, t, dt);
        json vals = json::array();
        for (const auto& x : points) {
            vals.push_back(json{{"x", x}, {"value", gheat::evaluate_at(u, x)}});
        }
        spdlog::info("gheat {}: u(t={}, 0) computed on {} nodes", label(f, i), t, grid.total_nodes());
        out.report["results"].push_back(json{{"name", label(f, i)},
                                             {"time", t},
                                             {"half_width", grid.half_width()},
                                             {"spacing", grid.spacing()},
                                             {"dt", dt},
                                             {"points", std::move(vals)}});
        if (dump) {
            std::vector<double> x(d);
            for (std::size_t n = 0; n < grid.total_nodes(); ++n) {
                grid.node_point(n, x);
                *dump << label(f, i);
                for (double v : x) {
                    *dump << ',' << v;
                }
                *dump << ',' << u.values[n] << '\n';
            }
        }
    }
    return out;
}

json expectation_row(const CylinderFunctional& f, std::size_t i,
                     const expectation::ExpectationResult& r)
{
    json stages = json::array();
    for (const auto& s : r.stages) {
        stages.push_back(json{{"stage", s.stage},
                              {"t_begin", s.t_begin},
                              {"t_end", s.t_end},
                              {"anchors", s.anchors},
                              {"steps_per_solve", s.steps_per_solve},
                              {"max_probe_residual", s.max_probe_residual}});
    }
    return json{{"name", label(f, i)},
                {"value", r.value},
                {"max_probe_residual", r.max_probe_residual},
                {"stages", std::move(stages)},
                {"warnings", r.warnings}};
}

RunResult run_expect(const RunConfig& c)
{
    RunResult out;
    out.report["results"] = json::array();
    const auto fns = battery(c);
    for (std::size_t i = 0; i < fns.size(); ++i) {
        const auto plan = expectation::make_plan(*c.theta, fns[i], plan_options(c));
        const auto r = expectation::g_expectation(*c.theta, fns[i], plan);
        for (const auto& w : r.warnings) {
            spdlog::warn("{}: {}", label(fns[i], i), w);
        }
        spdlog::info("expect {} = {}", label(fns[i], i), r.value);
        out.report["results"].push_back(expectation_row(fns[i], i, r));
    }
    return out;
}

void dump_columns(std::ostream& os, const std::vector<std::string>& names,
                  const std::vector<std::vector<double>>& cols)
{
    std::vector<std::span<const double>> spans(cols.begin(), cols.end());
    montecarlo::write_path_values_csv(os, names, spans);
}

RunResult run_mc(const RunConfig& c, std::ostream* dump)
{
    const auto fns = battery(c);
    ControlFamily family = base_family(c);
    if (c.family.pde_guided) {
        for (const auto& f : fns) {
            const auto plan = expectation::make_plan(*c.theta, f, plan_options(c));
            family = family.merged_with(montecarlo::pde_guided_family(c.grid, *c.theta, f, plan));
        }
    }
    spdlog::info("mc: {} policies, {} paths, seed {}", family.size(), c.paths, c.seed);
    std::vector<montecarlo::PathFunction> pfs;
    for (const auto& f : fns) {
        pfs.push_back(montecarlo::on_path(f, c.grid));
    }
    const auto values = montecarlo::evaluate_family(family, pfs, bundle_params(c));
    RunResult out;
    out.report["results"] = json::array();
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    const double k = c.tolerances.se_multiplier;
    for (std::size_t i = 0; i < fns.size(); ++i) {
        const auto u = montecarlo::upper_of(family, values[i], c.seed);
        json row{{"name", label(fns[i], i)}, {"upper", to_json(u)}};
        if (c.compare_pde) {
            const auto plan = expectation::make_plan(*c.theta, fns[i], plan_options(c));
            const double pde = expectation::g_expectation(*c.theta, fns[i], plan).value;
            const double se = u.estimate.std_error;
            const bool above = u.estimate.value <= pde + k * se + c.tolerances.backend_slack;
            const bool close = !c.family.pde_guided
                               || pde - u.estimate.value <= c.tolerances.relative_gap * std::abs(pde) + k * se;
            row["rhs_pde"] = pde;
            row["pass"] = above && close;
            out.all_pass = out.all_pass && above && close;
            spdlog::info("mc {}: upper {} (se {}), pde {}", label(fns[i], i), u.estimate.value, se, pde);
        }
        out.report["results"].push_back(std::move(row));
        names.push_back(label(fns[i], i) + "@" + u.argmax_name);
        cols.push_back(values[i][u.argmax]);
    }
    if (dump) {
        dump_columns(*dump, names, cols);
    }
    return out;
}

RunResult run_capacity(const RunConfig& c, std::ostream* dump)
{
    const ControlFamily family = base_family(c);
    std::vector<montecarlo::PathFunction> pfs;
    for (const auto& ev : c.events) {
        const std::size_t k = c.grid.snap(ev.time);
        const double lo = ev.lower.value_or(-std::numeric_limits<double>::infinity());
        const double hi = ev.upper.value_or(std::numeric_limits<double>::infinity());
        const std::size_t i = ev.coord;
        pfs.push_back([=](const PathView& p) {
            const double x = p.at(k)[i];
            return lo <= x && x <= hi ? 1.0 : 0.0;
        });
    }
    const auto values = montecarlo::evaluate_family(family, pfs, bundle_params(c));
    RunResult out;
    out.report["results"] = json::array();
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    for (std::size_t e = 0; e < c.events.size(); ++e) {
        const auto u = montecarlo::upper_of(family, values[e], c.seed);
        const std::string name = c.events[e].name.empty() ? "event" + std::to_string(e) : c.events[e].name;
        spdlog::info("capacity {} = {} (se {})", name, u.estimate.value, u.estimate.std_error);
        out.report["results"].push_back(json{{"name", name}, {"capacity", to_json(u)}});
        names.push_back(name + "@" + u.argmax_name);
        cols.push_back(values[e][u.argmax]);
    }
    if (dump) {
        dump_columns(*dump, names, cols);
    }
    return out;
}

/// Terminal B, B_hat, log D and qv_form under one policy, one row per path.
void dump_transform(const RunConfig& c, const ControlPolicy& policy, stochcalc::Observe observe,
                    std::ostream& os)
{
    const std::size_t d = c.theta->dim();
    const std::size_t N = c.grid.n_steps();
    const auto params = bundle_params(c);
    std::vector<std::vector<double>> cols(2 * d + 2, std::vector<double>(c.paths));
    parallel_for(c.paths, c.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> dW(N * d);
        stochcalc::PathTransform t(N, d);
        Matrix scratch(d, d);
        for (std::size_t p = lo; p < hi; ++p) {
            montecarlo::draw_increments(params, d, p, dW);
            stochcalc::simulate_transformed_path(policy, *c.integrand, dW, observe, p, t, scratch);
            for (std::size_t i = 0; i < d; ++i) {
                cols[i][p] = t.B[N * d + i];
                cols[d + i][p] = t.B_hat[N * d + i];
            }
            cols[2 * d][p] = t.log_density(N);
            cols[2 * d + 1][p] = t.qv_form[N];
        }
    });
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d; ++i) {
        names.push_back("B_T[" + std::to_string(i) + "]");
    }
    for (std::size_t i = 0; i < d; ++i) {
        names.push_back("B_hat_T[" + std::to_string(i) + "]");
    }
    names.push_back("log_D_T");
    names.push_back("qv_form_T");
    for (auto& n : names) {
        n += "@" + policy.name();
    }
    dump_columns(os, names, cols);
}

json to_json(const girsanov::NovikovReport& r)
{
    json moments = json::array();
    for (const auto& m : r.moments) {
        moments.push_back(json{{"policy", m.policy},
                               {"at_m", to_json(m.at_m)},
                               {"at_2m", to_json(m.at_2m)},
                               {"drift", m.finite ? json(m.drift) : json(nullptr)},
                               {"finite", m.finite}});
    }
    const bool ok = r.verdict == girsanov::NovikovReport::Verdict::SatisfiedAtDeskScale;
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return json{{"epsilon", r.epsilon},
                {"p", r.p},
                {"q", r.q},
                {"p2q2", r.p2q2},
                {"pq_ratio", r.pq_ratio},
                {"identity_error", r.identity_error},
                {"moments", std::move(moments)},
                {"sup_estimate", to_json(r.sup_estimate)},
                {"sup_policy", r.sup_policy},
                {"max_drift", finite_or_null(r.max_drift)},
                {"discrete_bound", finite_or_null(r.discrete_bound)},
                {"continuous_bound", finite_or_null(r.continuous_bound)},
                {"verdict", ok ? "satisfied-at-desk-scale" : "diverging"}};
}

RunResult run_girsanov(const RunConfig& c, std::ostream* dump)
{
    const girsanov::WeightedExpectationSpec spec{*c.theta,
                                                 *c.integrand,
                                                 base_family(c),
                                                 battery(c),
                                                 bundle_params(c),
                                                 c.family.pde_guided,
                                                 stochcalc::Observe::Transformed,
                                                 plan_options(c),
                                                 c.epsilon,
                                                 c.tolerances.novikov_paths,
                                                 c.tolerances.novikov_drift,
                                                 c.tolerances.pde,
                                                 c.tolerances.se_multiplier};
    const auto r = girsanov::verify_girsanov(spec);
    RunResult out;
    out.report["results"] = json::array();
    for (const auto& row : r.rows) {
        spdlog::info("girsanov {}: lhs {} rhs_pde {} gap {} band {} -> {}", row.name,
                     row.lhs.estimate.value, row.rhs_pde, row.gap, row.band, row.pass ? "pass" : "FAIL");
        out.report["results"].push_back(json{{"name", row.name},
                                             {"lhs", row.lhs.estimate.value},
                                             {"se", row.lhs.estimate.std_error},
                                             {"lhs_argmax", row.lhs.argmax_name},
                                             {"rhs_pde", row.rhs_pde},
                                             {"rhs_mc", row.rhs_mc.estimate.value},
                                             {"rhs_mc_se", row.rhs_mc.estimate.std_error},
                                             {"gap", row.gap},
                                             {"band", row.band},
                                             {"pass", row.pass},
                                             {"pde_warnings", row.pde_warnings}});
    }
    json norm = json::array();
    for (const auto& e : r.normalization) {
        norm.push_back(to_json(e));
    }
    out.report["normalization"] = std::move(norm);
    out.report["novikov"] = to_json(r.novikov);
    out.all_pass = r.all_pass;
    if (dump) {
        dump_transform(c, spec.family.policies().front(), stochcalc::Observe::Transformed, *dump);
    }
    return out;
}

RunResult run_novikov(const RunConfig& c, std::ostream* dump)
{
    const ControlFamily family = base_family(c);
    const auto r = girsanov::novikov_check(*c.theta, *c.integrand, c.epsilon, family,
                                           bundle_params(c), c.tolerances.novikov_drift);
    const bool satisfied = r.verdict == girsanov::NovikovReport::Verdict::SatisfiedAtDeskScale;
    const bool identities = r.identity_error <= 1e-12;
    const bool bounded = r.sup_estimate.value
                         <= r.discrete_bound + c.tolerances.se_multiplier * r.sup_estimate.std_error;
    spdlog::info("novikov: sup {} (drift {}), discrete bound {}, verdict {}", r.sup_estimate.value,
                 r.max_drift, r.discrete_bound, satisfied ? "satisfied" : "diverging");
    RunResult out;
    out.report["novikov"] = to_json(r);
    out.report["checks"] = json{{"satisfied", satisfied}, {"identities", identities}, {"bounded", bounded}};
    out.all_pass = satisfied && identities && bounded;
    if (dump) {
        dump_transform(c, family.policies().front(), stochcalc::Observe::Original, *dump);
    }
    return out;
}

} // namespace

RunResult run(const RunConfig& c, std::ostream* dump)
{
    const std::string hash = config_hash(c);
    spdlog::info("{}: config {} seed {} paths {} threads {}", to_string(c.experiment), hash, c.seed,
                 c.paths, resolve_threads(c.threads));
    RunResult out;
    switch (c.experiment) {
    case Experiment::GHeat: out = run_gheat(c, dump); break;
    case Experiment::Expect: out = run_expect(c); break;
    case Experiment::MC: out = run_mc(c, dump); break;
    case Experiment::Capacity: out = run_capacity(c, dump); break;
    case Experiment::Girsanov: out = run_girsanov(c, dump); break;
    case Experiment::Novikov: out = run_novikov(c, dump); break;
    }
    out.report["experiment"] = to_string(c.experiment);
    out.report["config_hash"] = hash;
    out.report["seed"] = c.seed;
    out.report["paths"] = c.paths;
    out.report["threads"] = resolve_threads(c.threads);
    out.report["config"] = serialize(c);
    out.report["all_pass"] = out.all_pass;
    return out;
}

} // namespace gexp::cli
