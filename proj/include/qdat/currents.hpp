#pragma once

#include "qdat/grid.hpp"
#include "qdat/kernel_numeric.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qdat {

/// Real source density sampled on a grid, row-major over (time, space).
struct Current {
  SpacetimeGrid grid;
  std::vector<double> density;
  std::string label;

  double& at(int ti, int xj) {
    return density[static_cast<std::size_t>(ti) * grid.space_count() + xj];
  }
  double at(int ti, int xj) const {
    return density[static_cast<std::size_t>(ti) * grid.space_count() + xj];
  }
};

namespace detail {

inline Current blank_current(const SpacetimeGrid& grid, std::string label) {
  return Current{grid,
                 std::vector<double>(static_cast<std::size_t>(grid.time_count()) *
                                     grid.space_count()),
                 std::move(label)};
}

inline void require_inside(const SpacetimeGrid& grid, double t0, double x0) {
  if (t0 < grid.times().front() || t0 > grid.times().back())
    throw ValidationError("current: center time lies outside the grid window");
  if (x0 < -0.5 * grid.spatial_extent() || x0 >= 0.5 * grid.spatial_extent())
    throw ValidationError("current: center position lies outside the box");
}

/// Shortest periodic displacement from x0 to x in a box of extent L.
inline double periodic_delta(double x, double x0, double L) {
  double d = std::remainder(x - x0, L);
  return d;
}

}  // namespace detail

/// Unit-integral impulse at the grid sample nearest to (t0, x0).
inline Current make_point_event(const SpacetimeGrid& grid, double strength, double t0, double x0,
                                std::string label = "j") {
  detail::require_inside(grid, t0, x0);
  Current c = detail::blank_current(grid, std::move(label));
  const double dt = grid.dt();
  int ti = static_cast<int>(std::lround((t0 - grid.times().front()) / dt));
  int xj = static_cast<int>(std::lround((x0 + 0.5 * grid.spatial_extent()) / grid.dx()));
  ti = std::min(std::max(ti, 0), grid.time_count() - 1);
  xj = ((xj % grid.space_count()) + grid.space_count()) % grid.space_count();
  c.at(ti, xj) = strength / (dt * grid.dx());
  return c;
}

/// Separable gaussian envelope in time and (periodic) space.
inline Current make_gaussian_pulse(const SpacetimeGrid& grid, double strength, double t0,
                                   double x0, double sigma_t, double sigma_x,
                                   std::string label = "j") {
  detail::require_inside(grid, t0, x0);
  if (!(sigma_t > 0.0) || !(sigma_x > 0.0))
    throw ValidationError("current: gaussian widths must be positive");
  Current c = detail::blank_current(grid, std::move(label));
  const double L = grid.spatial_extent();
  for (int i = 0; i < grid.time_count(); ++i) {
    const double et = std::exp(-0.5 * std::pow((grid.time(i) - t0) / sigma_t, 2));
    for (int j = 0; j < grid.space_count(); ++j) {
      const double dxp = detail::periodic_delta(grid.x(j), x0, L);
      c.at(i, j) = strength * et * std::exp(-0.5 * std::pow(dxp / sigma_x, 2));
    }
  }
  return c;
}

/// cos(omega0 t) carrier under a static gaussian envelope. omega0 = 0 gives a
/// strictly static source. The carrier must be representable on the time
/// lattice and periodic over the window, so omega0 is required to sit on the
/// conjugate frequency lattice below the sampling limit.
inline Current make_oscillating_source(const SpacetimeGrid& grid, double strength, double x0,
                                       double sigma_x, double omega0, std::string label = "j") {
  detail::require_inside(grid, grid.times().front(), x0);
  if (!(sigma_x > 0.0)) throw ValidationError("current: gaussian widths must be positive");
  if (omega0 < 0.0) throw ValidationError("current: carrier frequency must be nonnegative");
  const double dnu = 2.0 * std::numbers::pi / grid.time_window();
  const double cycles = omega0 / dnu;
  if (std::abs(cycles - std::lround(cycles)) > 1e-6)
    throw ValidationError("current: carrier frequency must sit on the conjugate lattice");
  if (omega0 > std::numbers::pi / grid.dt() * (1.0 + 1e-9))
    throw ValidationError("current: carrier frequency exceeds the time sampling limit");
  Current c = detail::blank_current(grid, std::move(label));
  const double L = grid.spatial_extent();
  for (int i = 0; i < grid.time_count(); ++i) {
    const double carrier = std::cos(omega0 * grid.time(i));
    for (int j = 0; j < grid.space_count(); ++j) {
      const double dxp = detail::periodic_delta(grid.x(j), x0, L);
      c.at(i, j) = strength * carrier * std::exp(-0.5 * std::pow(dxp / sigma_x, 2));
    }
  }
  return c;
}

namespace detail {

/// Folded view of the closed time window: the last sample aliases the first,
/// so row 0 carries the trapezoid average of both endpoint rows and the
/// lattice becomes strictly periodic with period count M = time_count - 1.
/// Requires uniform samples whose origin sits on the step lattice.
struct FoldedShape {
  int M;
  int N;
  int r_min;  // times front in units of dt; folded row s holds t = (r_min + s) dt
};

inline FoldedShape folded_shape(const SpacetimeGrid& grid) {
  const double dt = grid.dt();
  const double r0 = grid.times().front() / dt;
  if (std::abs(r0 - std::lround(r0)) > 1e-6)
    throw ValidationError("grid: time origin must sit on the sample lattice");
  return {grid.time_count() - 1, grid.space_count(), static_cast<int>(std::lround(r0))};
}

inline std::vector<double> fold_current(const Current& c, const FoldedShape& shape) {
  std::vector<double> folded(static_cast<std::size_t>(shape.M) * shape.N);
  for (int p = 0; p < shape.M; ++p)
    for (int j = 0; j < shape.N; ++j)
      folded[static_cast<std::size_t>(p) * shape.N + j] =
          p == 0 ? 0.5 * (c.at(0, j) + c.at(shape.M, j)) : c.at(p, j);
  return folded;
}

/// Kernel table indexed by the folded time difference d in [0, M): entry
/// (d, c) holds K at time (d * dt mod window) and spatial offset c * dx.
inline std::vector<Complex> fold_kernel(const KernelField& f, const FoldedShape& shape) {
  std::vector<Complex> table(static_cast<std::size_t>(shape.M) * shape.N);
  for (int d = 0; d < shape.M; ++d) {
    // Offset-to-sample maps: row s holds time (r_min + s) dt, column x_j
    // holds position -L/2 + j dx, and both directions wrap exactly.
    const int s = ((d - shape.r_min) % shape.M + shape.M) % shape.M;
    for (int c = 0; c < shape.N; ++c) {
      const int j = (c + shape.N / 2) % shape.N;
      table[static_cast<std::size_t>(d) * shape.N + c] =
          s == 0 ? 0.5 * (f.at(0, j) + f.at(shape.M, j)) : f.at(s, j);
    }
  }
  return table;
}

/// Index DFT with kernel exp(-2 pi i (m p / M + n j / N)).
inline std::vector<Complex> index_dft_2d(const std::vector<Complex>& x, int M, int N) {
  std::vector<Complex> stage(static_cast<std::size_t>(M) * N);
  std::vector<Complex> tw_m(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    for (int p = 0; p < M; ++p)
      tw_m[static_cast<std::size_t>(p)] =
          std::polar(1.0, -2.0 * std::numbers::pi * m * p / M);
    for (int j = 0; j < N; ++j) {
      Complex acc{};
      for (int p = 0; p < M; ++p)
        acc += tw_m[static_cast<std::size_t>(p)] * x[static_cast<std::size_t>(p) * N + j];
      stage[static_cast<std::size_t>(m) * N + j] = acc;
    }
  }
  std::vector<Complex> out(static_cast<std::size_t>(M) * N);
  std::vector<Complex> tw_n(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    for (int j = 0; j < N; ++j)
      tw_n[static_cast<std::size_t>(j)] =
          std::polar(1.0, -2.0 * std::numbers::pi * n * j / N);
    for (int m = 0; m < M; ++m) {
      Complex acc{};
      for (int j = 0; j < N; ++j)
        acc += tw_n[static_cast<std::size_t>(j)] * stage[static_cast<std::size_t>(m) * N + j];
      out[static_cast<std::size_t>(m) * N + n] = acc;
    }
  }
  return out;
}

inline std::vector<Complex> index_dft_2d(const std::vector<double>& x, int M, int N) {
  std::vector<Complex> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = x[i];
  return index_dft_2d(cx, M, N);
}

}  // namespace detail

enum class BilinearRoute { Direct, Convolution };

/// Double lattice integral sum_{p,j,q,l} a(p,j) K(p-q, j-l) b(q,l) dt^2 dx^2
/// over the folded periodic window. Time differences wrap around the window;
/// for homogeneous kernels whose frequencies sit on the conjugate lattice the
/// wrap is exact. The direct route is the quadratic-cost reference; the
/// convolution route evaluates the same sum through the convolution theorem.
inline Complex bilinear(const Current& a, const KernelField& kernel, const Current& b,
                        BilinearRoute route = BilinearRoute::Direct) {
  if (!(a.grid == b.grid) || !(a.grid == kernel.grid()))
    throw ValidationError("bilinear: currents and kernel must share one grid");
  const detail::FoldedShape shape = detail::folded_shape(a.grid);
  const int M = shape.M;
  const int N = shape.N;
  const std::vector<double> fa = detail::fold_current(a, shape);
  const std::vector<double> fb = detail::fold_current(b, shape);
  const std::vector<Complex> fk = detail::fold_kernel(kernel, shape);
  const double measure = a.grid.dt() * a.grid.dx();

  if (route == BilinearRoute::Convolution) {
    const auto ka = detail::index_dft_2d(fa, M, N);
    const auto kb = detail::index_dft_2d(fb, M, N);
    const auto kk = detail::index_dft_2d(fk, M, N);
    Complex sum{};
    for (std::size_t i = 0; i < kk.size(); ++i) sum += kk[i] * std::conj(ka[i]) * kb[i];
    return sum * (measure * measure / (M * N));
  }

  // Cross-correlation of the sources, then one weighted sum against the
  // kernel table. The doubled copy removes modular indexing from the hot loop.
  std::vector<double> a2(static_cast<std::size_t>(2 * M) * (2 * N));
  for (int p = 0; p < 2 * M; ++p)
    for (int j = 0; j < 2 * N; ++j)
      a2[static_cast<std::size_t>(p) * (2 * N) + j] =
          fa[static_cast<std::size_t>(p % M) * N + j % N];
  Complex sum{};
  for (int d = 0; d < M; ++d) {
    for (int c = 0; c < N; ++c) {
      double corr = 0.0;
      for (int q = 0; q < M; ++q) {
        const double* ra = &a2[static_cast<std::size_t>(q + d) * (2 * N) + c];
        const double* rb = &fb[static_cast<std::size_t>(q) * N];
        for (int l = 0; l < N; ++l) corr += ra[l] * rb[l];
      }
      sum += fk[static_cast<std::size_t>(d) * N + c] * corr;
    }
  }
  return sum * (measure * measure);
}

/// Amplitudes on the lattice conjugate to the folded window: M = time_count-1
/// frequency slots by N momentum slots (zero mode kept). Slot s maps to the
/// signed index s <= count/2 ? s : s - count.
class CurrentSpectrum {
 public:
  CurrentSpectrum(SpacetimeGrid grid, std::vector<Complex> values)
      : grid_(std::move(grid)), values_(std::move(values)) {}

  const SpacetimeGrid& grid() const { return grid_; }
  int freq_count() const { return grid_.time_count() - 1; }
  int mode_count() const { return grid_.space_count(); }

  int freq_index(int m_slot) const {
    return m_slot <= freq_count() / 2 ? m_slot : m_slot - freq_count();
  }
  int mode_index(int n_slot) const {
    return n_slot <= mode_count() / 2 ? n_slot : n_slot - mode_count();
  }

  double omega(int m_slot) const {
    return 2.0 * std::numbers::pi / grid_.time_window() * freq_index(m_slot);
  }
  double k(int n_slot) const {
    return 2.0 * std::numbers::pi / grid_.spatial_extent() * mode_index(n_slot);
  }

  Complex& at(int m_slot, int n_slot) {
    return values_[static_cast<std::size_t>(m_slot) * mode_count() + n_slot];
  }
  const Complex& at(int m_slot, int n_slot) const {
    return values_[static_cast<std::size_t>(m_slot) * mode_count() + n_slot];
  }

 private:
  SpacetimeGrid grid_;
  std::vector<Complex> values_;
};

/// j~(omega, k) = dt dx sum_{p,j} j(t_p, x_j) exp(+i (omega t_p - k x_j))
/// over the folded window.
inline CurrentSpectrum spectrum(const Current& c) {
  const detail::FoldedShape shape = detail::folded_shape(c.grid);
  const int M = shape.M;
  const int N = shape.N;
  const std::vector<double> folded = detail::fold_current(c, shape);
  std::vector<Complex> values(static_cast<std::size_t>(M) * N);
  const double measure = c.grid.dt() * c.grid.dx();
  const double t0 = c.grid.times().front();
  const double half_box = 0.5 * c.grid.spatial_extent();

  // Time stage: for each frequency slot, sum with exp(+i omega t_p).
  std::vector<Complex> stage(static_cast<std::size_t>(M) * N);
  for (int m = 0; m < M; ++m) {
    const double omega = 2.0 * std::numbers::pi / c.grid.time_window() *
                         (m <= M / 2 ? m : m - M);
    for (int j = 0; j < N; ++j) stage[static_cast<std::size_t>(m) * N + j] = Complex{};
    for (int p = 0; p < M; ++p) {
      const Complex ph = std::polar(1.0, omega * (t0 + p * c.grid.dt()));
      for (int j = 0; j < N; ++j)
        stage[static_cast<std::size_t>(m) * N + j] +=
            ph * folded[static_cast<std::size_t>(p) * N + j];
    }
  }
  // Space stage: sum with exp(-i k x_j).
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      const double k = 2.0 * std::numbers::pi / c.grid.spatial_extent() *
                       (n <= N / 2 ? n : n - N);
      Complex acc{};
      for (int j = 0; j < N; ++j)
        acc += std::polar(1.0, -k * (-half_box + c.grid.dx() * j)) *
               stage[static_cast<std::size_t>(m) * N + j];
      values[static_cast<std::size_t>(m) * N + n] = measure * acc;
    }
  }
  return CurrentSpectrum(c.grid, std::move(values));
}

/// Power caught on the mass shell omega = +|k| over the nonzero modes. For a
/// well-resolved source this equals the mean emitted quantum number.
inline double on_shell_power(const CurrentSpectrum& sp) {
  double total = 0.0;
  const double tol = 1e-9;
  for (int n = 0; n < sp.mode_count(); ++n) {
    if (sp.mode_index(n) == 0) continue;
    const double w = std::abs(sp.k(n));
    for (int m = 0; m < sp.freq_count(); ++m) {
      if (std::abs(sp.omega(m) - w) > tol * std::max(1.0, w)) continue;
      total += std::norm(sp.at(m, n)) / (2.0 * w * sp.grid().spatial_extent());
    }
  }
  return total;
}

/// Rows "t,x,value", one line per sample.
inline void write_csv(const Current& c, std::ostream& os) {
  os << "t,x,value\n";
  char line[128];
  for (int i = 0; i < c.grid.time_count(); ++i)
    for (int j = 0; j < c.grid.space_count(); ++j) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", c.grid.time(i), c.grid.x(j),
                    c.at(i, j));
      os << line;
    }
}

}  // namespace qdat
