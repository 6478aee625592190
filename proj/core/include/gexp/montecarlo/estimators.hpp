#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gexp/model/functional.hpp"
#include "gexp/montecarlo/family.hpp"
#include "gexp/montecarlo/paths.hpp"

namespace gexp::montecarlo {

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Sample mean and sample-std / sqrt(M). The mean is accumulated around the
/// first value with pairwise summation, so a constant sample is reproduced
/// exactly and the result depends only on the order of `values`.
EstimateWithError summarize(std::span<const double> values, std::uint64_t seed);

/// A real functional of a whole grid path (steps 0..N).
using PathFunction = std::function<double(const PathView& path)>;
using PathPredicate = std::function<bool(const PathView& path)>;

/// Evaluates f at the grid indices nearest to its times. Throws InputError
/// when a time lies more than dt/2 outside the grid.
PathFunction on_path(const CylinderFunctional& f, const TimeGrid& grid);

/// Per-path values [function][policy][path] under common random numbers.
using FamilyValues = std::vector<std::vector<std::vector<double>>>;
FamilyValues evaluate_family(const ControlFamily& family, std::span<const PathFunction> functions,
                             const BundleParams& params);

EstimateWithError expectation_under(const ControlPolicy& policy, const CylinderFunctional& f,
                                    const PathBundle& bundle);
EstimateWithError expectation_under(const ControlPolicy& policy, const CylinderFunctional& f,
                                    const BundleParams& params);

struct UpperEstimate {
    /// The maximising policy's estimate; its std_error is reported as is.
    EstimateWithError estimate;
    std::size_t argmax = 0;
    std::string argmax_name;
    std::vector<EstimateWithError> per_policy;
};

/// Max over policies of the per-policy means; ties go to the lowest index.
UpperEstimate upper_of(const ControlFamily& family,
                       const std::vector<std::vector<double>>& per_policy_values,
                       std::uint64_t seed);

UpperEstimate upper_expectation(const ControlFamily& family, const CylinderFunctional& f,
                                const BundleParams& params);
std::vector<UpperEstimate> upper_expectation(const ControlFamily& family,
                                             std::span<const CylinderFunctional> battery,
                                             const BundleParams& params);

UpperEstimate capacity(const ControlFamily& family, const PathPredicate& event,
                       const BundleParams& params);

/// CSV with a `path` column followed by one column per entry of `columns`.
void write_path_values_csv(std::ostream& os, const std::vector<std::string>& names,
                           const std::vector<std::span<const double>>& columns);

} // namespace gexp::montecarlo
