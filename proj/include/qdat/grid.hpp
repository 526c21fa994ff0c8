#pragma once

#include "qdat/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace qdat {

/// 1+1 dimensional sampling lattice: a periodic spatial box of extent L with
/// N momentum modes k_n = 2 pi n / L, n in (-N/2, N/2], plus an explicit list
/// of time samples. The massless mode n = 0 carries omega = 0 and is excluded
/// from every kernel mode sum; current spectra keep it.
class SpacetimeGrid {
 public:
  SpacetimeGrid(double spatial_extent, int num_modes, std::vector<double> time_samples)
      : length_(spatial_extent), num_modes_(num_modes), times_(std::move(time_samples)) {
    if (!(length_ > 0.0)) throw ValidationError("grid: spatial extent must be positive");
    if (num_modes_ < 4 || num_modes_ % 2 != 0)
      throw ValidationError("grid: mode count must be even and at least 4");
    if (times_.size() < 2) throw ValidationError("grid: need at least two time samples");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1]))
        throw ValidationError("grid: time samples must be strictly increasing");
  }

  /// Uniform time samples including both endpoints. Midpoints of symmetric
  /// windows land exactly on zero, which keeps the step-function seam sharp.
  static SpacetimeGrid uniform(double spatial_extent, int num_modes, int time_count,
                               double t_min, double t_max) {
    if (time_count < 2) throw ValidationError("grid: need at least two time samples");
    if (!(t_max > t_min)) throw ValidationError("grid: empty time window");
    std::vector<double> times(static_cast<std::size_t>(time_count));
    for (int i = 0; i < time_count; ++i)
      times[static_cast<std::size_t>(i)] =
          t_min + (t_max - t_min) * (static_cast<double>(i) / (time_count - 1));
    return SpacetimeGrid(spatial_extent, num_modes, std::move(times));
  }

  double spatial_extent() const { return length_; }
  int num_modes() const { return num_modes_; }

  int time_count() const { return static_cast<int>(times_.size()); }
  int space_count() const { return num_modes_; }
  const std::vector<double>& times() const { return times_; }
  double time(int i) const { return times_[static_cast<std::size_t>(i)]; }

  double dx() const { return length_ / num_modes_; }
  double x(int j) const { return -0.5 * length_ + dx() * j; }

  bool time_uniform(double tol = 1e-9) const {
    const double step = (times_.back() - times_.front()) / (time_count() - 1);
    for (int i = 1; i < time_count(); ++i)
      if (std::abs(time(i) - time(i - 1) - step) > tol * std::abs(step)) return false;
    return true;
  }

  double dt() const {
    if (!time_uniform()) throw ValidationError("grid: operation requires uniform time samples");
    return (times_.back() - times_.front()) / (time_count() - 1);
  }

  /// Length of the closed time window; the folded lattice treats it as one
  /// period, so the final sample aliases the first.
  double time_window() const { return times_.back() - times_.front(); }

  /// Mode numbers in ascending order: -N/2+1 .. N/2.
  int mode_number(int slot) const { return slot - num_modes_ / 2 + 1; }

  double k(int mode) const { return 2.0 * std::numbers::pi * mode / length_; }
  double omega(int mode) const { return std::abs(k(mode)); }

  std::vector<int> nonzero_modes() const {
    std::vector<int> modes;
    modes.reserve(static_cast<std::size_t>(num_modes_ - 1));
    for (int s = 0; s < num_modes_; ++s)
      if (mode_number(s) != 0) modes.push_back(mode_number(s));
    return modes;
  }

  friend bool operator==(const SpacetimeGrid& a, const SpacetimeGrid& b) {
    return a.length_ == b.length_ && a.num_modes_ == b.num_modes_ && a.times_ == b.times_;
  }

 private:
  double length_;
  int num_modes_;
  std::vector<double> times_;
};

/// Reference configuration used by the built-in checks: unit-circumference
/// box (L = 2 pi) with 64 modes and 129 time samples across one period.
inline SpacetimeGrid default_grid() {
  return SpacetimeGrid::uniform(2.0 * std::numbers::pi, 64, 129, -std::numbers::pi,
                                std::numbers::pi);
}

}  // namespace qdat
