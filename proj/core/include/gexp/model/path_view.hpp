#pragma once

#include <cassert>
#include <cstddef>
#include <span>

namespace gexp {

/// Read-only view of a path observed on grid steps 0..last_step,
/// stored time-major with `dim` coordinates per step.
class PathView {
public:
    PathView(std::span<const double> data, std::size_t dim, std::size_t last_step)
        : data_(data), dim_(dim), last_(last_step)
    {
        assert(data_.size() >= (last_ + 1) * dim_);
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t last_step() const noexcept { return last_; }

    std::span<const double> at(std::size_t step) const
    {
        assert(step <= last_);
        return data_.subspan(step * dim_, dim_);
    }
    std::span<const double> current() const { return at(last_); }

private:
    std::span<const double> data_;
    std::size_t dim_;
    std::size_t last_;
};

} // namespace gexp
