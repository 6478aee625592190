#include "gexp/cli/run_config.hpp"

#include <cmath>
#include <cstdio>

#include "gexp/errors.hpp"
#include "gexp/gheat/solver.hpp"

namespace gexp::cli {

namespace {

constexpr const char* kExperimentNames[] = {"gheat", "expect", "mc", "capacity", "girsanov",
                                            "novikov"};

std::vector<double> number_array(const json& j, const std::string& path)
{
    if (!j.is_array()) {
        throw SchemaError(path, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a number");
        }
        out.push_back(j[i].get<double>());
    }
    return out;
}

std::optional<double> optional_number(JsonReader& r, const std::string& key)
{
    if (const json* v = r.optional(key)) {
        if (!v->is_number()) {
            throw SchemaError(r.child_path(key), "expected a number");
        }
        return v->get<double>();
    }
    return std::nullopt;
}

FamilyConfig family_from_json(const json& j, const std::string& path)
{
    JsonReader r(j, path);
    FamilyConfig f;
    f.bang_bang_blocks = r.count_or("bang_bang_blocks", f.bang_bang_blocks);
    f.random_schedules = r.count_or("random_schedules", f.random_schedules);
    f.random_blocks = r.count_or("random_blocks", f.random_blocks);
    f.random_seed = r.count_or("random_seed", f.random_seed);
    f.pde_guided = r.boolean_or("pde_guided", f.pde_guided);
    r.finish();
    return f;
}

json to_json(const FamilyConfig& f)
{
    return json{{"bang_bang_blocks", f.bang_bang_blocks},
                {"random_schedules", f.random_schedules},
                {"random_blocks", f.random_blocks},
                {"random_seed", f.random_seed},
                {"pde_guided", f.pde_guided}};
}

EventConfig event_from_json(const json& j, const std::string& path)
{
    JsonReader r(j, path);
    EventConfig e;
    if (const json* n = r.optional("name")) {
        if (!n->is_string()) {
            throw SchemaError(r.child_path("name"), "expected a string");
        }
        e.name = n->get<std::string>();
    }
    e.time = r.number("time");
    e.coord = r.count_or("coord", 0);
    e.lower = optional_number(r, "lower");
    e.upper = optional_number(r, "upper");
    r.finish();
    return e;
}

json to_json(const EventConfig& e)
{
    json j{{"name", e.name}, {"time", e.time}, {"coord", e.coord}};
    if (e.lower) {
        j["lower"] = *e.lower;
    }
    if (e.upper) {
        j["upper"] = *e.upper;
    }
    return j;
}

Tolerances tolerances_from_json(const json& j, const std::string& path)
{
    JsonReader r(j, path);
    Tolerances t;
    t.pde = r.number_or("pde", t.pde);
    t.se_multiplier = r.number_or("se_multiplier", t.se_multiplier);
    t.backend_slack = r.number_or("backend_slack", t.backend_slack);
    t.relative_gap = r.number_or("relative_gap", t.relative_gap);
    t.novikov_drift = r.number_or("novikov_drift", t.novikov_drift);
    t.novikov_paths = r.count_or("novikov_paths", t.novikov_paths);
    r.finish();
    return t;
}

json to_json(const Tolerances& t)
{
    return json{{"pde", t.pde},
                {"se_multiplier", t.se_multiplier},
                {"backend_slack", t.backend_slack},
                {"relative_gap", t.relative_gap},
                {"novikov_drift", t.novikov_drift},
                {"novikov_paths", t.novikov_paths}};
}

expectation::PlanOptions plan_from_json(const json& j, const std::string& path)
{
    JsonReader r(j, path);
    expectation::PlanOptions p;
    p.spacing = r.number_or("spacing", p.spacing);
    p.offset = r.number_or("offset", p.offset);
    p.anchor_stride = r.count_or("anchor_stride", p.anchor_stride);
    p.cfl_fraction = r.number_or("cfl_fraction", p.cfl_fraction);
    p.probes = r.count_or("probes", p.probes);
    p.probe_tolerance = r.number_or("probe_tolerance", p.probe_tolerance);
    p.max_arity = r.count_or("max_arity", p.max_arity);
    p.max_width = r.count_or("max_width", p.max_width);
    p.max_work = r.number_or("max_work", p.max_work);
    r.finish();
    return p;
}

json to_json(const expectation::PlanOptions& p)
{
    return json{{"spacing", p.spacing},
                {"offset", p.offset},
                {"anchor_stride", p.anchor_stride},
                {"cfl_fraction", p.cfl_fraction},
                {"probes", p.probes},
                {"probe_tolerance", p.probe_tolerance},
                {"max_arity", p.max_arity},
                {"max_width", p.max_width},
                {"max_work", p.max_work}};
}

} // namespace

std::string to_string(Experiment e)
{
    return kExperimentNames[static_cast<int>(e)];
}

Experiment experiment_from_string(const std::string& name, const std::string& path)
{
    for (int i = 0; i < 6; ++i) {
        if (name == kExperimentNames[i]) {
            return static_cast<Experiment>(i);
        }
    }
    throw SchemaError(path, "unknown experiment '" + name + "'");
}

RunConfig parse_config(const json& j)
{
    JsonReader r(j, "$");
    RunConfig c;
    c.experiment = experiment_from_string(r.string("experiment"), "$.experiment");
    c.theta = theta_from_json(r.required("theta"), "$.theta");
    if (const json* g = r.optional("grid")) {
        c.grid = time_grid_from_json(*g, "$.grid");
    }
    c.paths = r.count_or("paths", c.paths);
    c.seed = r.count_or("seed", c.seed);
    c.threads = static_cast<unsigned>(r.count_or("threads", c.threads));
    if (const json* f = r.optional("family")) {
        c.family = family_from_json(*f, "$.family");
    }
    if (const json* b = r.optional("battery")) {
        if (!b->is_array()) {
            throw SchemaError("$.battery", "expected an array of payoffs");
        }
        for (std::size_t i = 0; i < b->size(); ++i) {
            c.battery.push_back(payoff_from_json((*b)[i], "$.battery[" + std::to_string(i) + "]"));
        }
    }
    if (const json* h = r.optional("integrand")) {
        c.integrand = integrand_from_json(*h, "$.integrand");
    }
    c.epsilon = r.number_or("epsilon", c.epsilon);
    if (const json* p = r.optional("pde")) {
        c.pde = plan_from_json(*p, "$.pde");
    }
    if (const json* t = r.optional("tolerances")) {
        c.tolerances = tolerances_from_json(*t, "$.tolerances");
    }
    if (const json* e = r.optional("events")) {
        if (!e->is_array()) {
            throw SchemaError("$.events", "expected an array of events");
        }
        for (std::size_t i = 0; i < e->size(); ++i) {
            c.events.push_back(event_from_json((*e)[i], "$.events[" + std::to_string(i) + "]"));
        }
    }
    if (const json* p = r.optional("points")) {
        if (!p->is_array()) {
            throw SchemaError("$.points", "expected an array of points");
        }
        for (std::size_t i = 0; i < p->size(); ++i) {
            c.points.push_back(number_array((*p)[i], "$.points[" + std::to_string(i) + "]"));
        }
    }
    c.compare_pde = r.boolean_or("compare_pde", c.compare_pde);
    r.finish();
    return c;
}

json serialize(const RunConfig& c)
{
    json j;
    j["experiment"] = to_string(c.experiment);
    j["theta"] = to_json(*c.theta);
    j["grid"] = to_json(c.grid);
    j["paths"] = c.paths;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["family"] = to_json(c.family);
    json battery = json::array();
    for (const auto& p : c.battery) {
        battery.push_back(to_json(p));
    }
    j["battery"] = std::move(battery);
    if (c.integrand) {
        j["integrand"] = to_json(*c.integrand);
    }
    j["epsilon"] = c.epsilon;
    j["pde"] = to_json(c.pde);
    j["tolerances"] = to_json(c.tolerances);
    json events = json::array();
    for (const auto& e : c.events) {
        events.push_back(to_json(e));
    }
    j["events"] = std::move(events);
    j["points"] = c.points;
    j["compare_pde"] = c.compare_pde;
    return j;
}

std::string config_hash(const RunConfig& config)
{
    json j = serialize(config);
    j.erase("threads");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate(const RunConfig& c)
{
    const ThetaSet& theta = *c.theta;
    const std::size_t d = theta.dim();
    const auto e = c.experiment;
    const bool needs_battery = e != Experiment::Capacity && e != Experiment::Novikov;
    if (needs_battery && c.battery.empty()) {
        throw ConfigurationError("battery must be nonempty");
    }
    if (e == Experiment::Capacity && c.events.empty()) {
        throw ConfigurationError("events must be nonempty");
    }
    if ((e == Experiment::Girsanov || e == Experiment::Novikov) && !c.integrand) {
        throw ConfigurationError("$.integrand: required for the " + to_string(e) + " experiment");
    }
    if (c.integrand && c.integrand->dim() != d) {
        throw ConfigurationError("$.integrand: dimension does not match Theta");
    }
    if (e == Experiment::Girsanov && !theta.nondegeneracy_floor()) {
        throw ConfigurationError("$.theta.nondegeneracy_floor: required for the girsanov experiment");
    }
    if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) {
        throw ConfigurationError("$.epsilon: must be a positive real");
    }
    if (c.paths == 0) {
        throw ConfigurationError("$.paths: must be positive");
    }
    const bool simulates = e == Experiment::MC || e == Experiment::Capacity
                           || e == Experiment::Girsanov || e == Experiment::Novikov;
    if (simulates && c.family.bang_bang_blocks == 0 && c.family.random_schedules == 0) {
        throw ConfigurationError("$.family: the control family is empty");
    }

    std::vector<CylinderFunctional> fns;
    for (std::size_t i = 0; i < c.battery.size(); ++i) {
        const std::string path = "$.battery[" + std::to_string(i) + "]";
        try {
            fns.push_back(make_functional(c.battery[i], d));
        } catch (const InputError& err) {
            throw ConfigurationError(path + ": " + err.what());
        }
        if (e == Experiment::GHeat && fns.back().arity() != 1) {
            throw ConfigurationError(path + ": gheat takes single-time payoffs only");
        }
        if (simulates) {
            for (double t : fns.back().times()) {
                const double k = t / c.grid.dt();
                if (t > c.grid.horizon() + 1e-12 || std::abs(k - std::round(k)) > 1e-9) {
                    throw ConfigurationError(path + ": time " + std::to_string(t)
                                             + " is not on the simulation grid");
                }
            }
        }
    }
    for (std::size_t i = 0; i < c.events.size(); ++i) {
        const auto& ev = c.events[i];
        const std::string path = "$.events[" + std::to_string(i) + "]";
        if (ev.coord >= d) {
            throw ConfigurationError(path + ".coord: out of range");
        }
        c.grid.snap(ev.time);
    }
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        if (c.points[i].size() != d) {
            throw ConfigurationError("$.points[" + std::to_string(i) + "]: expected "
                                     + std::to_string(d) + " coordinates");
        }
    }

    const bool uses_pde = e == Experiment::Expect || e == Experiment::Girsanov
                          || (e == Experiment::MC && (c.compare_pde || c.family.pde_guided));
    if (uses_pde) {
        for (const auto& f : fns) {
            expectation::make_plan(theta, f, c.pde);
        }
    }
    if (e == Experiment::GHeat && d == 2) {
        gheat::check_monotone_stencil(theta);
    }
}

} // namespace gexp::cli
