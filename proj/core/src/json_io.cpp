#include "gexp/model/json_io.hpp"

#include <cmath>
#include <vector>

namespace gexp {

JsonReader::JsonReader(const json& j, std::string path) : j_(j), path_(std::move(path))
{
    if (!j_.is_object()) {
        throw SchemaError(path_, "expected an object");
    }
}

const json& JsonReader::required(const std::string& key)
{
    if (!j_.contains(key)) {
        throw SchemaError(child_path(key), "missing required field");
    }
    seen_.insert(key);
    return j_.at(key);
}

const json* JsonReader::optional(const std::string& key)
{
    if (!j_.contains(key)) {
        return nullptr;
    }
    seen_.insert(key);
    const json& v = j_.at(key);
    return v.is_null() ? nullptr : &v;
}

double JsonReader::number(const std::string& key)
{
    const json& v = required(key);
    if (!v.is_number()) {
        throw SchemaError(child_path(key), "expected a number");
    }
    return v.get<double>();
}

double JsonReader::number_or(const std::string& key, double fallback)
{
    const json* v = optional(key);
    if (!v) {
        return fallback;
    }
    if (!v->is_number()) {
        throw SchemaError(child_path(key), "expected a number");
    }
    return v->get<double>();
}

std::size_t JsonReader::count_or(const std::string& key, std::size_t fallback)
{
    const json* v = optional(key);
    if (!v) {
        return fallback;
    }
    if (!v->is_number_unsigned()) {
        throw SchemaError(child_path(key), "expected a nonnegative integer");
    }
    return v->get<std::size_t>();
}

std::string JsonReader::string(const std::string& key)
{
    const json& v = required(key);
    if (!v.is_string()) {
        throw SchemaError(child_path(key), "expected a string");
    }
    return v.get<std::string>();
}

bool JsonReader::boolean_or(const std::string& key, bool fallback)
{
    const json* v = optional(key);
    if (!v) {
        return fallback;
    }
    if (!v->is_boolean()) {
        throw SchemaError(child_path(key), "expected a boolean");
    }
    return v->get<bool>();
}

void JsonReader::finish() const
{
    for (const auto& [key, value] : j_.items()) {
        if (!seen_.count(key)) {
            throw SchemaError(child_path(key), "unknown field");
        }
    }
}

Matrix matrix_from_json(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) {
        throw SchemaError(path, "expected a nonempty array of rows");
    }
    const auto rows = j.size();
    std::size_t cols = 0;
    Matrix m;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        const auto rp = path + "[" + std::to_string(r) + "]";
        if (!row.is_array() || row.empty()) {
            throw SchemaError(rp, "expected a nonempty array of numbers");
        }
        if (r == 0) {
            cols = row.size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw SchemaError(rp, "ragged matrix row");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number()) {
                throw SchemaError(rp + "[" + std::to_string(c) + "]", "expected a number");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const ThetaSet& theta)
{
    json j;
    switch (theta.kind()) {
    case ThetaSet::Kind::Singleton:
        j["kind"] = "singleton";
        j["matrix"] = matrix_to_json(theta.extreme_points().front());
        break;
    case ThetaSet::Kind::Interval1D:
        j["kind"] = "interval";
        j["sigma_low"] = theta.sigma_low();
        j["sigma_high"] = theta.sigma_high();
        break;
    case ThetaSet::Kind::FiniteSet: {
        j["kind"] = "finite";
        json ms = json::array();
        for (const auto& m : theta.extreme_points()) {
            ms.push_back(matrix_to_json(m));
        }
        j["matrices"] = std::move(ms);
        break;
    }
    }
    if (auto f = theta.nondegeneracy_floor()) {
        j["nondegeneracy_floor"] = *f;
    }
    return j;
}

ThetaSet theta_from_json(const json& j, const std::string& path)
{
    JsonReader r(j, path);
    const auto kind = r.string("kind");
    std::optional<ThetaSet> theta;
    try {
        if (kind == "singleton") {
            theta = ThetaSet::singleton(matrix_from_json(r.required("matrix"), r.child_path("matrix")));
        } else if (kind == "interval") {
            const double lo = r.number("sigma_low");
            const double hi = r.number("sigma_high");
            theta = ThetaSet::interval(lo, hi);
        } else if (kind == "finite") {
            const json& ms = r.required("matrices");
            if (!ms.is_array()) {
                throw SchemaError(r.child_path("matrices"), "expected an array of matrices");
            }
            std::vector<Matrix> members;
            for (std::size_t i = 0; i < ms.size(); ++i) {
                members.push_back(
                    matrix_from_json(ms[i], r.child_path("matrices") + "[" + std::to_string(i) + "]"));
            }
            theta = ThetaSet::finite(std::move(members));
        } else {
            throw SchemaError(r.child_path("kind"),
                              "expected one of singleton, interval, finite; got '" + kind + "'");
        }
        if (const json* f = r.optional("nondegeneracy_floor")) {
            if (!f->is_number()) {
                throw SchemaError(r.child_path("nondegeneracy_floor"), "expected a number");
            }
            theta = theta->with_floor(f->get<double>());
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const InputError& e) {
        throw SchemaError(path, e.what());
    }
    r.finish();
    return *theta;
}

json to_json(const TimeGrid& grid)
{
    return json{{"horizon", grid.horizon()}, {"n_steps", grid.n_steps()}};
}

TimeGrid time_grid_from_json(const json& j, const std::string& path)
{
    JsonReader r(j, path);
    const double horizon = r.number("horizon");
    const json& n = r.required("n_steps");
    if (!n.is_number_unsigned()) {
        throw SchemaError(r.child_path("n_steps"), "expected a positive integer");
    }
    r.finish();
    try {
        return TimeGrid(horizon, n.get<std::size_t>());
    } catch (const InputError& e) {
        throw SchemaError(path, e.what());
    }
}

json to_json(const PayoffSpec& s)
{
    json j;
    j["payoff"] = s.kind;
    if (!s.times.empty()) {
        j["times"] = s.times;
    }
    if (s.inner) {
        j["inner"] = to_json(*s.inner);
        return j;
    }
    if (s.kind == "constant") {
        j["value"] = s.value;
        return j;
    }
    if (s.kind == "square" || s.kind == "neg_square") {
        return j;
    }
    j["coord"] = s.coord;
    if (s.kind == "call" || s.kind == "put") {
        j["strike"] = s.strike;
    } else if (s.kind == "indicator_smoothed" || s.kind == "butterfly") {
        j["strike"] = s.strike;
        j["width"] = s.width;
    } else if (s.kind == "kink") {
        j["up"] = s.up;
        j["down"] = s.down;
    }
    return j;
}

PayoffSpec payoff_from_json(const json& j, const std::string& path, bool nested)
{
    JsonReader r(j, path);
    PayoffSpec s;
    s.kind = r.string("payoff");
    const bool single = is_single_time_kind(s.kind);
    if (!single && !is_multi_time_kind(s.kind)) {
        throw SchemaError(r.child_path("payoff"), "unknown payoff kind '" + s.kind + "'");
    }
    if (nested && !single) {
        throw SchemaError(r.child_path("payoff"), "inner payoff must be a single-time kind");
    }
    if (!nested) {
        const json& t = r.required("times");
        if (!t.is_array() || t.empty()) {
            throw SchemaError(r.child_path("times"), "expected a nonempty array of times");
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t[i].is_number()) {
                throw SchemaError(r.child_path("times") + "[" + std::to_string(i) + "]",
                                  "expected a number");
            }
            s.times.push_back(t[i].get<double>());
        }
    }
    if (!single) {
        s.inner = std::make_shared<const PayoffSpec>(
            payoff_from_json(r.required("inner"), r.child_path("inner"), true));
    } else if (s.kind == "constant") {
        s.value = r.number("value");
    } else if (s.kind != "square" && s.kind != "neg_square") {
        s.coord = r.count_or("coord", 0);
        if (s.kind == "call" || s.kind == "put") {
            s.strike = r.number_or("strike", 0.0);
        } else if (s.kind == "indicator_smoothed" || s.kind == "butterfly") {
            s.strike = r.number_or("strike", 0.0);
            s.width = r.number_or("width", 1.0);
        } else if (s.kind == "kink") {
            s.up = r.number_or("up", 1.0);
            s.down = r.number_or("down", 0.5);
        }
    }
    r.finish();
    return s;
}

json to_json(const Integrand& h)
{
    json j;
    switch (h.kind()) {
    case Integrand::Kind::Constant:
        j["kind"] = "constant";
        j["h"] = std::vector<double>(h.parameters().begin(), h.parameters().end());
        return j;
    case Integrand::Kind::Tanh:
        j["kind"] = "tanh";
        j["scale"] = std::vector<double>(h.parameters().begin(), h.parameters().end());
        return j;
    case Integrand::Kind::Markov:
        break;
    }
    throw InputError("Integrand '" + h.name() + "' is a custom rule and cannot be serialised");
}

namespace {

Vector vector_from_json(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) {
        throw SchemaError(path, "expected a nonempty array of numbers");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a number");
        }
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

} // namespace

Integrand integrand_from_json(const json& j, const std::string& path)
{
    JsonReader r(j, path);
    const auto kind = r.string("kind");
    std::optional<Integrand> h;
    if (kind == "constant") {
        h = Integrand::constant(vector_from_json(r.required("h"), r.child_path("h")));
    } else if (kind == "tanh") {
        h = Integrand::tanh(vector_from_json(r.required("scale"), r.child_path("scale")));
    } else {
        throw SchemaError(r.child_path("kind"), "expected constant or tanh; got '" + kind + "'");
    }
    r.finish();
    return *h;
}

json to_json(const ControlPolicy& policy)
{
    if (policy.kind() != ControlPolicy::Kind::Deterministic) {
        throw InputError("ControlPolicy '" + policy.name()
                         + "': only deterministic schedules can be serialised");
    }
    json sched = json::array();
    for (const auto& m : policy.schedule()) {
        sched.push_back(matrix_to_json(m));
    }
    return json{{"kind", "deterministic"},
                {"name", policy.name()},
                {"grid", to_json(policy.grid())},
                {"schedule", std::move(sched)}};
}

ControlPolicy policy_from_json(const json& j, const ThetaSet& theta, const std::string& path)
{
    JsonReader r(j, path);
    const auto kind = r.string("kind");
    if (kind != "deterministic") {
        throw SchemaError(r.child_path("kind"), "only deterministic policies can be loaded");
    }
    const auto name = r.string("name");
    const auto grid = time_grid_from_json(r.required("grid"), r.child_path("grid"));
    const json& s = r.required("schedule");
    if (!s.is_array()) {
        throw SchemaError(r.child_path("schedule"), "expected an array of matrices");
    }
    std::vector<Matrix> sched;
    for (std::size_t i = 0; i < s.size(); ++i) {
        sched.push_back(matrix_from_json(s[i], r.child_path("schedule") + "[" + std::to_string(i) + "]"));
    }
    r.finish();
    try {
        return ControlPolicy::deterministic(grid, theta, std::move(sched), name);
    } catch (const InputError& e) {
        throw SchemaError(path, e.what());
    }
}

} // namespace gexp
