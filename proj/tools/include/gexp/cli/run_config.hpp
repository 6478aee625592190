#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gexp/expectation/recursion.hpp"
#include "gexp/model/integrand.hpp"
#include "gexp/model/json_io.hpp"
#include "gexp/model/payoffs.hpp"
#include "gexp/model/theta_set.hpp"
#include "gexp/model/time_grid.hpp"

namespace gexp::cli {

enum class Experiment { GHeat, Expect, MC, Capacity, Girsanov, Novikov };

std::string to_string(Experiment e);
/// Throws SchemaError at `path` for an unknown name.
Experiment experiment_from_string(const std::string& name, const std::string& path);

struct FamilyConfig {
    std::size_t bang_bang_blocks = 2;
    std::size_t random_schedules = 0;
    std::size_t random_blocks = 8;
    std::uint64_t random_seed = 1;
    bool pde_guided = true;

    friend bool operator==(const FamilyConfig&, const FamilyConfig&) = default;
};

/// The event {lower <= B^coord_time <= upper}; a missing side is unbounded.
struct EventConfig {
    std::string name;
    double time = 0.0;
    std::size_t coord = 0;
    std::optional<double> lower;
    std::optional<double> upper;

    friend bool operator==(const EventConfig&, const EventConfig&) = default;
};

struct Tolerances {
    double pde = 2e-3;
    double se_multiplier = 3.0;
    /// MC-upper may exceed the PDE value by this much beyond the SE band.
    double backend_slack = 1e-3;
    /// Largest admissible (PDE - MC) / |PDE| when the family is PDE-guided.
    double relative_gap = 0.02;
    double novikov_drift = 0.01;
    std::size_t novikov_paths = 20000;

    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct RunConfig {
    Experiment experiment = Experiment::Expect;
    std::optional<ThetaSet> theta;
    TimeGrid grid{1.0, 50};
    std::size_t paths = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    FamilyConfig family;
    std::vector<PayoffSpec> battery;
    std::optional<Integrand> integrand;
    double epsilon = 1.0;
    expectation::PlanOptions pde;
    Tolerances tolerances;
    std::vector<EventConfig> events;
    /// Query points for `gheat`, each of length dim.
    std::vector<std::vector<double>> points;
    /// Compare MC-upper against the PDE backend in `mc`.
    bool compare_pde = false;
};

/// Strict parse: unknown keys and type mismatches raise SchemaError with the
/// offending field path.
RunConfig parse_config(const json& j);
json serialize(const RunConfig& config);

/// FNV-1a (64 bit) of the serialised config without `threads`, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Checks that do not need a simulation: required fields for the experiment,
/// nonempty battery, grid alignment, nondegeneracy, CFL and size caps.
/// Throws ConfigurationError or SchemaError.
void validate(const RunConfig& config);

} // namespace gexp::cli
