#include "gexp/model/control_policy.hpp"

#include "gexp/errors.hpp"

namespace gexp {

ControlPolicy ControlPolicy::deterministic(const TimeGrid& grid, const ThetaSet& theta,
                                           std::vector<Matrix> schedule, std::string name)
{
    if (schedule.size() != grid.n_steps()) {
        throw InputError("ControlPolicy: schedule length " + std::to_string(schedule.size())
                         + " does not match grid steps " + std::to_string(grid.n_steps()));
    }
    for (const auto& m : schedule) {
        if (!theta.contains(m)) {
            throw InputError("ControlPolicy: schedule entry lies outside the uncertainty set");
        }
    }
    ControlPolicy p(grid, theta);
    p.kind_ = Kind::Deterministic;
    p.name_ = name.empty() ? "deterministic" : std::move(name);
    p.schedule_ = std::make_shared<const std::vector<Matrix>>(std::move(schedule));
    return p;
}

ControlPolicy ControlPolicy::constant(const TimeGrid& grid, const ThetaSet& theta,
                                      const Matrix& gamma, std::string name)
{
    return deterministic(grid, theta, std::vector<Matrix>(grid.n_steps(), gamma),
                         name.empty() ? "constant" : std::move(name));
}

ControlPolicy ControlPolicy::feedback(const TimeGrid& grid, const ThetaSet& theta, Rule rule,
                                      std::string name)
{
    if (!rule) {
        throw InputError("ControlPolicy: empty feedback rule");
    }
    ControlPolicy p(grid, theta);
    p.kind_ = Kind::Feedback;
    p.name_ = std::move(name);
    p.rule_ = std::move(rule);
    return p;
}

ControlPolicy ControlPolicy::pde_guided(const TimeGrid& grid, const ThetaSet& theta,
                                        std::shared_ptr<const CurvatureField> field,
                                        std::string name)
{
    if (!field || field->dim() != theta.dim()) {
        throw InputError("ControlPolicy: curvature field missing or of the wrong dimension");
    }
    ControlPolicy p(grid, theta);
    p.kind_ = Kind::PDEGuided;
    p.name_ = std::move(name);
    p.field_ = std::move(field);
    return p;
}

const Matrix& ControlPolicy::control(std::size_t step, const PathView& observed,
                                     Matrix& scratch) const
{
    switch (kind_) {
    case Kind::Deterministic:
        return (*schedule_)[step];
    case Kind::Feedback:
        scratch = rule_(step, observed.current());
        if (!theta_.contains(scratch)) {
            throw InputError("ControlPolicy '" + name_ + "': feedback rule left the uncertainty set"
                             " at step " + std::to_string(step));
        }
        return scratch;
    case Kind::PDEGuided:
        field_->hessian(step, observed, scratch);
        return theta_.extreme_points()[argmax_index_unchecked(theta_, scratch)];
    }
    return scratch;
}

} // namespace gexp
