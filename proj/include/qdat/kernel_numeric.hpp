#pragma once

#include "qdat/grid.hpp"
#include "qdat/kernel_algebra.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

namespace qdat {

using Complex = std::complex<double>;

/// Samples K(t, x) of a translation-invariant kernel, second argument at the
/// origin. Storage is row-major over (time, space).
class KernelField {
 public:
  explicit KernelField(SpacetimeGrid grid)
      : grid_(std::move(grid)),
        values_(static_cast<std::size_t>(grid_.time_count()) * grid_.space_count()) {}

  const SpacetimeGrid& grid() const { return grid_; }

  Complex& at(int ti, int xj) {
    return values_[static_cast<std::size_t>(ti) * grid_.space_count() + xj];
  }
  const Complex& at(int ti, int xj) const {
    return values_[static_cast<std::size_t>(ti) * grid_.space_count() + xj];
  }

  std::span<const Complex> values() const { return values_; }
  std::span<Complex> values() { return values_; }

 private:
  SpacetimeGrid grid_;
  std::vector<Complex> values_;
};

inline KernelField linear_combination(Complex wa, const KernelField& a, Complex wb,
                                      const KernelField& b) {
  if (!(a.grid() == b.grid()))
    throw ValidationError("kernel fields live on different grids");
  KernelField out(a.grid());
  for (std::size_t i = 0; i < out.values().size(); ++i)
    out.values()[i] = wa * a.values()[i] + wb * b.values()[i];
  return out;
}

inline double max_abs(const KernelField& f) {
  double m = 0.0;
  for (const Complex& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Max-norm distance between two fields on the same grid.
inline double residual(const KernelField& a, const KernelField& b) {
  if (!(a.grid() == b.grid()))
    throw ValidationError("kernel fields live on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

namespace detail {

/// Unit step with the symmetric midpoint convention theta(0) = 1/2.
inline double theta(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? 0.0 : 0.5); }

}  // namespace detail

/// Frequency-sign component of the homogeneous kernel as a box mode sum:
///   positive: sum_{n != 0} exp(-i(omega_n t - k_n x)) / (2 omega_n L)
///   negative: same with the exponent sign flipped.
/// Both signs are evaluated by their own mode sum.
inline KernelField eval_cut_propagator(FrequencySign sign, const SpacetimeGrid& grid) {
  KernelField field(grid);
  const int tc = grid.time_count();
  const int nc = grid.space_count();
  const double s = (sign == FrequencySign::Positive) ? -1.0 : 1.0;
  std::vector<Complex> time_phase(static_cast<std::size_t>(tc));
  std::vector<Complex> space_phase(static_cast<std::size_t>(nc));
  for (int mode : grid.nonzero_modes()) {
    const double omega = grid.omega(mode);
    const double k = grid.k(mode);
    const double coeff = 1.0 / (2.0 * omega * grid.spatial_extent());
    for (int i = 0; i < tc; ++i)
      time_phase[static_cast<std::size_t>(i)] = std::polar(1.0, s * omega * grid.time(i));
    for (int j = 0; j < nc; ++j)
      space_phase[static_cast<std::size_t>(j)] = std::polar(1.0, -s * k * grid.x(j));
    for (int i = 0; i < tc; ++i) {
      const Complex tp = coeff * time_phase[static_cast<std::size_t>(i)];
      for (int j = 0; j < nc; ++j) field.at(i, j) += tp * space_phase[static_cast<std::size_t>(j)];
    }
  }
  return field;
}

namespace detail {

/// The four elementary fields in basis order R+, R-, A+, A-. The frequency
/// components carry the cut functions with their phase conventions
/// (positive: -i * cut, negative: +i * cut); the causal halves are imposed by
/// the unit step in time.
inline std::array<KernelField, 4> basis_fields(const SpacetimeGrid& grid) {
  const KernelField cut_plus = eval_cut_propagator(FrequencySign::Positive, grid);
  const KernelField cut_minus = eval_cut_propagator(FrequencySign::Negative, grid);
  std::array<KernelField, 4> out = {KernelField(grid), KernelField(grid), KernelField(grid),
                                    KernelField(grid)};
  const Complex mi(0.0, -1.0);
  const Complex pi_(0.0, 1.0);
  for (int i = 0; i < grid.time_count(); ++i) {
    const double fwd = theta(grid.time(i));
    const double bwd = -theta(-grid.time(i));
    for (int j = 0; j < grid.space_count(); ++j) {
      const Complex dp = mi * cut_plus.at(i, j);
      const Complex dm = pi_ * cut_minus.at(i, j);
      out[0].at(i, j) = fwd * dp;
      out[1].at(i, j) = fwd * dm;
      out[2].at(i, j) = bwd * dp;
      out[3].at(i, j) = bwd * dm;
    }
  }
  return out;
}

}  // namespace detail

/// Evaluates an exact basis expansion on a grid.
inline KernelField eval_kernel(const KernelExpr& expr, const SpacetimeGrid& grid) {
  const auto basis = detail::basis_fields(grid);
  KernelField out(grid);
  for (std::size_t b = 0; b < 4; ++b) {
    const Complex w = to_complex(expr.coefficient(b));
    if (w == Complex{}) continue;
    for (std::size_t i = 0; i < out.values().size(); ++i)
      out.values()[i] += w * basis[b].values()[i];
  }
  return out;
}

inline KernelField eval_kernel(KernelName name, const SpacetimeGrid& grid) {
  return eval_kernel(canonical(name), grid);
}

/// Frequency lattice for the momentum-space route: frequencies m * spacing
/// for |m * spacing| <= cutoff, symmetric about zero.
struct FrequencyLattice {
  double spacing;
  double cutoff;
};

/// Lattice conjugate to the grid's folded time samples: spacing 2 pi / window
/// with the cutoff at the time-sampling limit.
inline FrequencyLattice conjugate_lattice(const SpacetimeGrid& grid) {
  return {2.0 * std::numbers::pi / grid.time_window(), std::numbers::pi / grid.dt()};
}

/// Momentum-space construction of the time-ordered kernel: for each spatial
/// mode the frequency integral of exp(-i nu t) / (nu^2 - k^2 + i eps) is
/// approximated by a Riemann sum on the given lattice. The pole pair sits a
/// distance ~eps/(2|k|) off the real axis, so the lattice must resolve that
/// scale: spacing well below eps and cutoff well above every |k_n|.
inline KernelField eval_feynman_momentum(const SpacetimeGrid& grid, double epsilon,
                                         const FrequencyLattice& lattice) {
  if (!(epsilon > 0.0)) throw ValidationError("momentum route: epsilon must be positive");
  if (!(lattice.spacing > 0.0) || !(lattice.cutoff >= lattice.spacing))
    throw ValidationError("momentum route: invalid frequency lattice");
  const int m_max = static_cast<int>(lattice.cutoff / lattice.spacing + 1e-9);
  const int tc = grid.time_count();
  const int nc = grid.space_count();
  const auto modes = grid.nonzero_modes();

  // mode_time[n][i]: frequency sum for spatial mode n at time sample i.
  std::vector<std::vector<Complex>> mode_time(modes.size(),
                                              std::vector<Complex>(static_cast<std::size_t>(tc)));
  const double weight = lattice.spacing / (2.0 * std::numbers::pi);
  for (std::size_t ni = 0; ni < modes.size(); ++ni) {
    const double k2 = grid.k(modes[ni]) * grid.k(modes[ni]);
    for (int i = 0; i < tc; ++i) {
      const double t = grid.time(i);
      const Complex step = std::polar(1.0, -lattice.spacing * t);
      Complex phase = std::polar(1.0, lattice.spacing * t * m_max);
      Complex sum{};
      for (int m = -m_max; m <= m_max; ++m) {
        const double nu = m * lattice.spacing;
        sum += phase / Complex(nu * nu - k2, epsilon);
        phase *= step;
        if (((m + m_max) & 0xfff) == 0xfff) phase /= std::abs(phase);
      }
      mode_time[ni][static_cast<std::size_t>(i)] = weight * sum;
    }
  }

  KernelField field(grid);
  std::vector<Complex> space_phase(static_cast<std::size_t>(nc));
  for (std::size_t ni = 0; ni < modes.size(); ++ni) {
    const double k = grid.k(modes[ni]);
    for (int j = 0; j < nc; ++j)
      space_phase[static_cast<std::size_t>(j)] =
          std::polar(1.0 / grid.spatial_extent(), k * grid.x(j));
    for (int i = 0; i < tc; ++i) {
      const Complex mt = mode_time[ni][static_cast<std::size_t>(i)];
      for (int j = 0; j < nc; ++j)
        field.at(i, j) += mt * space_phase[static_cast<std::size_t>(j)];
    }
  }
  return field;
}

inline KernelField eval_feynman_momentum(const SpacetimeGrid& grid, double epsilon) {
  return eval_feynman_momentum(grid, epsilon, conjugate_lattice(grid));
}

struct FeynmanStage {
  double epsilon;
  FrequencyLattice lattice;
  double residual;  // max-norm distance to the component route, relative
};

struct FeynmanStudy {
  std::vector<FeynmanStage> stages;
  std::vector<double> decade_orders;  // log10(r_s / r_{s+1}) per refinement step

  bool monotone_decreasing() const {
    for (std::size_t s = 1; s < stages.size(); ++s)
      if (!(stages[s].residual < stages[s - 1].residual)) return false;
    return true;
  }
};

/// Joint refinement study: as the pole softening eps decreases, the frequency
/// lattice is refined with it (spacing eps/10, cutoff growing as eps^-0.6) so
/// the Riemann sum keeps resolving the Lorentzian. The residual against the
/// component-route field must then decrease stage by stage. A small probe
/// grid keeps the frequency sums affordable.
inline FeynmanStudy feynman_momentum_convergence(std::span<const double> epsilons) {
  const SpacetimeGrid probe =
      SpacetimeGrid::uniform(2.0 * std::numbers::pi, 4, 9, -std::numbers::pi, std::numbers::pi);
  const KernelField reference = eval_kernel(KernelName::Feynman, probe);
  const double scale = max_abs(reference);
  FeynmanStudy study;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw ValidationError("momentum route: epsilon must be positive");
    FrequencyLattice lattice{eps / 10.0, 64.0 * std::pow(0.1 / eps, 0.6)};
    const KernelField field = eval_feynman_momentum(probe, eps, lattice);
    study.stages.push_back({eps, lattice, residual(field, reference) / scale});
  }
  for (std::size_t s = 1; s < study.stages.size(); ++s)
    study.decade_orders.push_back(
        std::log10(study.stages[s - 1].residual / study.stages[s].residual));
  return study;
}

/// Rows "t,x,re,im", one line per sample, full double precision.
inline void write_csv(const KernelField& f, std::ostream& os) {
  os << "t,x,re,im\n";
  char line[160];
  for (int i = 0; i < f.grid().time_count(); ++i)
    for (int j = 0; j < f.grid().space_count(); ++j) {
      const Complex v = f.at(i, j);
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", f.grid().time(i),
                    f.grid().x(j), v.real(), v.imag());
      os << line;
    }
}

}  // namespace qdat
