#pragma once

#include <cstddef>
#include <vector>

#include "fsde/errors.hpp"

namespace fsde {

/// Uniform time grid t_j = j*dt, j = 0..n_steps.
class TimeGrid {
public:
  TimeGrid(double dt, std::size_t n_steps) : dt_(dt), n_steps_(n_steps) {
    if (!(dt > 0.0)) throw DomainError("TimeGrid: dt must be positive");
    if (n_steps == 0) throw DomainError("TimeGrid: n_steps must be positive");
  }

  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t size() const noexcept { return n_steps_ + 1; }
  double t(std::size_t j) const noexcept { return static_cast<double>(j) * dt_; }
  double horizon() const noexcept { return t(n_steps_); }

  std::vector<double> times() const {
    std::vector<double> out(size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = t(j);
    return out;
  }

  /// Every `factor`-th node of this grid.
  TimeGrid coarsened(std::size_t factor) const {
    if (factor == 0 || n_steps_ % factor != 0)
      throw ContractError("TimeGrid::coarsened: factor must divide n_steps");
    return TimeGrid(dt_ * static_cast<double>(factor), n_steps_ / factor);
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
    return a.dt_ == b.dt_ && a.n_steps_ == b.n_steps_;
  }

private:
  double dt_;
  std::size_t n_steps_;
};

}  // namespace fsde
