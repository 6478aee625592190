#include "gexp/expectation/curvature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "gexp/errors.hpp"
#include "gexp/gheat/solver.hpp"
#include "gexp/util/parallel.hpp"
#include "recursion_detail.hpp"

namespace gexp::expectation {

PdeCurvatureField::PdeCurvatureField(const ThetaSet& theta, const CylinderFunctional& f,
                                     const BackwardRecursionPlan& plan, const TimeGrid& grid,
                                     double max_doubles)
    : dim_(f.dim()), arity_(f.arity())
{
    detail::check_plan(theta, f, plan);
    for (double t : f.times()) {
        const std::size_t idx = grid.snap(t);
        if (std::abs(grid.time(idx) - t) > 1e-9 * std::max(1.0, grid.horizon())) {
            throw InputError("PdeCurvatureField: functional time is not on the simulation grid");
        }
        time_index_.push_back(idx);
    }

    const std::size_t N = grid.n_steps();
    stage_of_step_.resize(N);
    for (std::size_t m = 0; m < N; ++m) {
        stage_of_step_[m] = static_cast<std::size_t>(
            std::count_if(time_index_.begin(), time_index_.end(),
                          [&](std::size_t idx) { return idx <= m; }));
    }

    const std::size_t comps = gheat::hessian_components(dim_);
    const std::size_t nodes = plan.grid().total_nodes();
    std::vector<std::vector<std::size_t>> stage_steps(arity_);
    for (std::size_t m = 0; m < N; ++m) {
        if (stage_of_step_[m] < arity_) {
            stage_steps[stage_of_step_[m]].push_back(m);
        }
    }
    std::size_t longest = 1;
    for (const auto& s : stage_steps) {
        longest = std::max(longest, s.size());
    }
    auto needed = [&](std::size_t s) {
        double total = 0.0;
        for (std::size_t i = 0; i < arity_; ++i) {
            const std::size_t kept = (stage_steps[i].size() + s - 1) / s;
            total += static_cast<double>(kept * plan.anchor_count(i) * nodes * comps);
        }
        return total;
    };
    stride_ = 1;
    while (stride_ < longest && needed(stride_) > max_doubles) {
        ++stride_;
    }
    if (needed(stride_) > max_doubles) {
        std::ostringstream msg;
        msg << "PdeCurvatureField: Hessian snapshots need " << needed(stride_)
            << " values even at one snapshot per stage, above the cap " << max_doubles
            << "; coarsen the PDE grid";
        throw ConfigurationError(msg.str());
    }

    ExpectationResult scratch;
    const auto chain = detail::reduce(plan, f, 1, scratch);
    source_.assign(N, 0);

    for (std::size_t i = 0; i < arity_; ++i) {
        // Keep every stride-th step from the start of the stage; the steps in
        // between reuse the last kept snapshot.
        std::vector<std::size_t> steps;
        for (std::size_t j = 0; j < stage_steps[i].size(); ++j) {
            if (j % stride_ == 0) {
                steps.push_back(stage_steps[i][j]);
            }
            source_[stage_steps[i][j]] = snapshots_.size() + steps.size() - 1;
        }
        if (steps.empty()) {
            continue;
        }
        const std::size_t first = snapshots_.size();
        std::vector<double> remaining;
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
            remaining.push_back(std::max(0.0, f.times()[i] - grid.time(*it)));
        }

        auto axes = detail::anchor_axes(plan, i);
        for (std::size_t a = 0; a < dim_; ++a) {
            axes.push_back(plan.node_axis());
        }
        snapshots_.resize(first + steps.size(), LatticeFunction(axes, comps));
        stored_ += steps.size() * plan.anchor_count(i) * nodes * comps;

        const std::size_t count = plan.anchor_count(i);
        const detail::StageFunction& next = chain[i];
        parallel_for(count, plan.options().threads, [&](std::size_t lo, std::size_t hi) {
            std::array<double, 8> a{};
            for (std::size_t n = lo; n < hi; ++n) {
                detail::anchor_point(plan, i, n, a);
                auto data = detail::stage_data(plan, next,
                                               std::span<const double>(a.data(), i * dim_));
                const auto snaps =
                    gheat::solve_gheat_snapshots(theta, std::move(data), remaining, plan.dt());
                // snaps run backwards in time: snaps[s] belongs to steps[last - s]
                for (std::size_t s = 0; s < steps.size(); ++s) {
                    const auto hess = gheat::hessian_field(snaps[s]);
                    auto& dst = snapshots_[first + steps.size() - 1 - s].values();
                    for (std::size_t node = 0; node < nodes; ++node) {
                        const std::size_t flat = n + count * node;
                        for (std::size_t c = 0; c < comps; ++c) {
                            dst[flat * comps + c] = hess[node * comps + c];
                        }
                    }
                }
            }
        });
    }
}

void PdeCurvatureField::hessian(std::size_t step, const PathView& observed, Matrix& out) const
{
    out.setZero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    if (step >= stage_of_step_.size() || stage_of_step_[step] >= arity_) {
        return;
    }
    const std::size_t i = stage_of_step_[step];
    std::array<double, 8> x{};
    for (std::size_t j = 0; j < i; ++j) {
        const auto v = observed.at(time_index_[j]);
        std::copy(v.begin(), v.end(), x.begin() + static_cast<std::ptrdiff_t>(j * dim_));
    }
    const auto cur = observed.current();
    std::copy(cur.begin(), cur.end(), x.begin() + static_cast<std::ptrdiff_t>(i * dim_));
    std::array<double, 3> h{};
    snapshots_[source_[step]].evaluate(std::span<const double>(x.data(), (i + 1) * dim_), h);
    if (dim_ == 1) {
        out(0, 0) = h[0];
    } else {
        out(0, 0) = h[0];
        out(0, 1) = h[1];
        out(1, 0) = h[1];
        out(1, 1) = h[2];
    }
}

std::shared_ptr<const PdeCurvatureField> make_curvature_field(const ThetaSet& theta,
                                                              const CylinderFunctional& f,
                                                              const BackwardRecursionPlan& plan,
                                                              const TimeGrid& grid)
{
    return std::make_shared<const PdeCurvatureField>(theta, f, plan, grid);
}

} // namespace gexp::expectation
