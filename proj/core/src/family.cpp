#include "gexp/montecarlo/family.hpp"

#include <random>
#include <sstream>

#include "gexp/errors.hpp"
#include "gexp/expectation/curvature.hpp"

namespace gexp::montecarlo {

namespace {

std::vector<std::size_t> block_starts(std::size_t n_steps, std::size_t blocks)
{
    std::vector<std::size_t> starts;
    for (std::size_t b = 0; b <= blocks; ++b) {
        starts.push_back(b * n_steps / blocks);
    }
    return starts;
}

std::size_t checked_blocks(const TimeGrid& grid, std::size_t blocks)
{
    if (blocks == 0 || blocks > grid.n_steps()) {
        throw ConfigurationError("control family: blocks must lie in [1, n_steps]");
    }
    return blocks;
}

} // namespace

ControlFamily::ControlFamily(std::vector<ControlPolicy> policies, Mode mode)
    : policies_(std::move(policies)), mode_(mode)
{
    if (policies_.empty()) {
        throw InputError("ControlFamily: family must be nonempty");
    }
    for (const auto& p : policies_) {
        if (!(p.grid() == policies_.front().grid()) || !(p.theta() == policies_.front().theta())) {
            throw InputError("ControlFamily: policies must share one time grid and Theta");
        }
    }
}

ControlFamily ControlFamily::merged_with(const ControlFamily& other) const
{
    auto all = policies_;
    all.insert(all.end(), other.policies_.begin(), other.policies_.end());
    return ControlFamily(std::move(all), Mode::Mixed);
}

ControlFamily bang_bang_family(const TimeGrid& grid, const ThetaSet& theta, std::size_t blocks)
{
    checked_blocks(grid, blocks);
    const auto& points = theta.extreme_points();
    const std::size_t P = points.size();
    double total = 1.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        total *= static_cast<double>(P);
    }
    if (total > 4096.0) {
        throw ConfigurationError("bang_bang_family: more than 4096 policies; use fewer blocks");
    }
    const auto starts = block_starts(grid.n_steps(), blocks);
    std::vector<ControlPolicy> out;
    const auto count = static_cast<std::size_t>(total);
    for (std::size_t code = 0; code < count; ++code) {
        std::vector<Matrix> schedule(grid.n_steps());
        std::ostringstream name;
        name << "bang-bang[";
        std::size_t c = code;
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t pick = c % P;
            c /= P;
            for (std::size_t k = starts[b]; k < starts[b + 1]; ++k) {
                schedule[k] = points[pick];
            }
            name << (b ? "," : "") << pick;
        }
        name << "]";
        out.push_back(ControlPolicy::deterministic(grid, theta, std::move(schedule), name.str()));
    }
    return ControlFamily(std::move(out), ControlFamily::Mode::BangBang);
}

ControlFamily random_schedule_family(const TimeGrid& grid, const ThetaSet& theta,
                                     std::size_t count, std::uint64_t seed, std::size_t blocks)
{
    checked_blocks(grid, blocks);
    if (count == 0) {
        throw ConfigurationError("random_schedule_family: count must be positive");
    }
    std::mt19937_64 rng(seed);
    const auto& points = theta.extreme_points();
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::uniform_real_distribution<double> sigma(theta.sigma_low(), theta.sigma_high());
    const auto starts = block_starts(grid.n_steps(), blocks);
    std::vector<ControlPolicy> out;
    for (std::size_t n = 0; n < count; ++n) {
        std::vector<Matrix> schedule(grid.n_steps());
        for (std::size_t b = 0; b < blocks; ++b) {
            Matrix g = theta.kind() == ThetaSet::Kind::Interval1D
                           ? Matrix::Constant(1, 1, sigma(rng))
                           : points[pick(rng)];
            for (std::size_t k = starts[b]; k < starts[b + 1]; ++k) {
                schedule[k] = g;
            }
        }
        out.push_back(ControlPolicy::deterministic(grid, theta, std::move(schedule),
                                                   "random#" + std::to_string(n)));
    }
    return ControlFamily(std::move(out), ControlFamily::Mode::RandomSchedules);
}

ControlFamily pde_guided_family(const TimeGrid& grid, const ThetaSet& theta,
                                const CylinderFunctional& f,
                                const expectation::BackwardRecursionPlan& plan)
{
    auto field = expectation::make_curvature_field(theta, f, plan, grid);
    std::vector<ControlPolicy> out;
    out.push_back(ControlPolicy::pde_guided(grid, theta, std::move(field)));
    return ControlFamily(std::move(out), ControlFamily::Mode::PDEGuided);
}

} // namespace gexp::montecarlo
