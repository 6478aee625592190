#pragma once

#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "gexp/errors.hpp"
#include "gexp/model/control_policy.hpp"
#include "gexp/model/integrand.hpp"
#include "gexp/model/payoffs.hpp"
#include "gexp/model/theta_set.hpp"
#include "gexp/model/time_grid.hpp"

namespace gexp {

using json = nlohmann::json;

/// Schema violation in a JSON document; `path()` is a JSONPath-like locator
/// such as "$.theta.sigma_low".
class SchemaError : public InputError {
public:
    SchemaError(std::string path, const std::string& what)
        : InputError(path + ": " + what), path_(std::move(path))
    {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Strict reader over a JSON object: every key must be consumed before
/// `finish()`, otherwise the first unknown key is reported.
class JsonReader {
public:
    JsonReader(const json& j, std::string path);

    const std::string& path() const noexcept { return path_; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& required(const std::string& key);
    const json* optional(const std::string& key);

    double number(const std::string& key);
    double number_or(const std::string& key, double fallback);
    std::size_t count_or(const std::string& key, std::size_t fallback);
    std::string string(const std::string& key);
    bool boolean_or(const std::string& key, bool fallback);

    std::string child_path(const std::string& key) const { return path_ + "." + key; }
    void finish() const;

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Matrix matrix_from_json(const json& j, const std::string& path);
json matrix_to_json(const Matrix& m);

json to_json(const ThetaSet& theta);
ThetaSet theta_from_json(const json& j, const std::string& path = "$");

json to_json(const TimeGrid& grid);
TimeGrid time_grid_from_json(const json& j, const std::string& path = "$");

json to_json(const PayoffSpec& spec);
PayoffSpec payoff_from_json(const json& j, const std::string& path = "$", bool nested = false);

/// Constant and tanh integrands only; custom Markov rules are not serialisable.
json to_json(const Integrand& h);
Integrand integrand_from_json(const json& j, const std::string& path = "$");

/// Deterministic schedules only.
json to_json(const ControlPolicy& policy);
ControlPolicy policy_from_json(const json& j, const ThetaSet& theta,
                               const std::string& path = "$");

} // namespace gexp
