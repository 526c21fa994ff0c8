#pragma once

#include "qdat/grid.hpp"
#include "qdat/kernel_numeric.hpp"
#include "qdat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qdat {

/// Contiguous range of mode numbers, inclusive on both ends. The zero mode
/// carries no quanta, so a window spanning zero simply does not claim it.
struct ModeWindow {
  int first_mode;
  int last_mode;

  bool contains(int mode) const { return mode >= first_mode && mode <= last_mode; }
};

struct Absorber {
  std::string id;
  ModeWindow window;
  double weight = 1.0;
};

struct AbsorberSet {
  std::vector<Absorber> absorbers;
};

enum class Coverage { Complete, Incomplete, Overlapping };

struct CompletenessReport {
  Coverage status;
  std::vector<int> missing_modes;
  std::vector<int> overlapping_modes;

  bool complete() const { return status == Coverage::Complete; }
};

/// An absorber set is usable only if it tiles every nonzero mode exactly
/// once: a mode nobody claims leaves the box open, a mode claimed twice makes
/// the response double-counted.
inline CompletenessReport completeness_check(const AbsorberSet& set, const SpacetimeGrid& grid) {
  const std::vector<int> modes = grid.nonzero_modes();
  const int lo = modes.front();
  const int hi = modes.back();
  for (const Absorber& a : set.absorbers) {
    if (a.window.first_mode > a.window.last_mode)
      throw ValidationError("absorber " + a.id + ": empty mode window");
    if (a.window.first_mode < lo || a.window.last_mode > hi)
      throw ValidationError("absorber " + a.id + ": window outside the grid mode range");
    if (!(a.weight > 0.0)) throw ValidationError("absorber " + a.id + ": weight must be positive");
  }
  CompletenessReport report{Coverage::Complete, {}, {}};
  for (int mode : modes) {
    int claims = 0;
    for (const Absorber& a : set.absorbers)
      if (a.window.contains(mode)) ++claims;
    if (claims == 0) report.missing_modes.push_back(mode);
    if (claims > 1) report.overlapping_modes.push_back(mode);
  }
  if (!report.overlapping_modes.empty())
    report.status = Coverage::Overlapping;
  else if (!report.missing_modes.empty())
    report.status = Coverage::Incomplete;
  return report;
}

/// Offer amplitudes resolved per absorber. `normalized` records whether the
/// squared moduli sum to one within 1e-12; the winner draw insists on it.
struct OfferWave {
  std::vector<Complex> amplitudes;
  bool normalized = false;

  double norm_squared() const {
    double s = 0.0;
    for (const Complex& a : amplitudes) s += std::norm(a);
    return s;
  }
};

inline OfferWave make_offer(std::vector<Complex> amplitudes) {
  OfferWave offer{std::move(amplitudes), false};
  offer.normalized = std::abs(offer.norm_squared() - 1.0) <= 1e-12;
  return offer;
}

inline OfferWave normalize(const OfferWave& offer) {
  const double n = std::sqrt(offer.norm_squared());
  if (!(n > 0.0)) throw ValidationError("offer: cannot normalize a null offer wave");
  OfferWave out = offer;
  for (Complex& a : out.amplitudes) a /= n;
  out.normalized = true;
  return out;
}

/// Projects per-mode offer amplitudes onto a complete absorber set. Each
/// absorber catches the squared mass inside its window; the phase is taken
/// from the window's dominant mode. The projection preserves the total norm
/// exactly, so a normalized input stays normalized.
inline OfferWave project_offer(std::span<const Complex> psi, const AbsorberSet& set,
                               const SpacetimeGrid& grid) {
  const std::vector<int> modes = grid.nonzero_modes();
  if (psi.size() != modes.size())
    throw ValidationError("offer: need one amplitude per nonzero mode");
  const CompletenessReport coverage = completeness_check(set, grid);
  if (!coverage.complete())
    throw ValidationError("offer: absorber set does not close the box, no transaction can form");
  std::vector<Complex> amplitudes(set.absorbers.size());
  for (std::size_t i = 0; i < set.absorbers.size(); ++i) {
    double mass = 0.0;
    double best = -1.0;
    Complex dominant{1.0, 0.0};
    for (std::size_t m = 0; m < modes.size(); ++m) {
      if (!set.absorbers[i].window.contains(modes[m])) continue;
      const double w = std::norm(psi[m]);
      mass += w;
      if (w > best) {
        best = w;
        dominant = psi[m];
      }
    }
    const double len = std::abs(dominant);
    amplitudes[i] = len > 0.0 ? std::sqrt(mass) * (dominant / len) : Complex{};
  }
  return make_offer(std::move(amplitudes));
}

/// Bernoulli gate for the non-unitary step: fires with probability
/// min(1, e^2 g). The squared coupling is the base rate; g is a dimensionless
/// response weight.
inline bool nu_gate(double coupling_e, double weight_g, SplitMix64& rng) {
  if (coupling_e < 0.0 || coupling_e > 1.0)
    throw ValidationError("gate: coupling must lie in [0, 1]");
  if (weight_g < 0.0) throw ValidationError("gate: weight must be nonnegative");
  const double p = std::min(1.0, coupling_e * coupling_e * weight_g);
  return rng.next_double() < p;
}

struct WinnerDraw {
  std::size_t index;
  double probability;
};

/// Selects the actualized absorber with probability |amplitude|^2. The offer
/// must be normalized; the draw walks the cumulative distribution.
inline WinnerDraw select_winner(const OfferWave& offer, SplitMix64& rng) {
  if (offer.amplitudes.empty()) throw ValidationError("winner: empty offer");
  if (!offer.normalized || std::abs(offer.norm_squared() - 1.0) > 1e-12)
    throw ValidationError("winner: offer wave must be normalized");
  const double u = rng.next_double();
  double cum = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t i = 0; i < offer.amplitudes.size(); ++i) {
    const double p = std::norm(offer.amplitudes[i]);
    if (p > 0.0) {
      last_positive = i;
      seen_positive = true;
    }
    cum += p;
    if (u < cum) return {i, p};
  }
  if (!seen_positive) throw ValidationError("winner: offer carries no probability");
  return {last_positive, std::norm(offer.amplitudes[last_positive])};
}

/// Relative phasing of the mode expansion used in the factorization check.
enum class Phasing { Feynman, Dyson };

inline Phasing parse_phasing(const std::string& name) {
  if (name == "feynman") return Phasing::Feynman;
  if (name == "dyson") return Phasing::Dyson;
  throw ValidationError("unknown phasing: " + name);
}

struct GridPointPair {
  int time_a;
  int space_a;
  int time_b;
  int space_b;
};

namespace detail {

inline Complex mode_function(const SpacetimeGrid& grid, int mode, double t, double x) {
  const double omega = grid.omega(mode);
  const double k = grid.k(mode);
  return std::polar(1.0 / std::sqrt(2.0 * omega * grid.spatial_extent()), -(omega * t - k * x));
}

}  // namespace detail

/// Verifies that the cross-correlation kernel between two events factorizes
/// into a sum of single-mode products collected from the absorber windows:
///   feynman phasing:  i * mode sum vs  -(positive-frequency kernel)
///   dyson phasing:   -i * conjugated mode sum vs -(negative-frequency kernel)
/// Exact completeness of the windows is what makes the identity close, so an
/// incomplete or overlapping set is refused. Returns the max residual over
/// the pairs relative to the kernel scale.
inline double factorization_check(const SpacetimeGrid& grid, const AbsorberSet& set,
                                  std::span<const GridPointPair> pairs, Phasing phasing) {
  const CompletenessReport coverage = completeness_check(set, grid);
  if (!coverage.complete())
    throw ValidationError("factorization: absorber set does not close the box");
  double max_err = 0.0;
  double max_val = 0.0;
  for (const GridPointPair& pair : pairs) {
    const double ta = grid.time(pair.time_a);
    const double xa = grid.x(pair.space_a);
    const double tb = grid.time(pair.time_b);
    const double xb = grid.x(pair.space_b);

    // Kernel side, evaluated at the true event separation.
    Complex cut{};
    for (int mode : grid.nonzero_modes()) {
      const double omega = grid.omega(mode);
      const double k = grid.k(mode);
      const double phase = omega * (ta - tb) - k * (xa - xb);
      cut += std::polar(1.0 / (2.0 * omega * grid.spatial_extent()),
                        phasing == Phasing::Feynman ? -phase : phase);
    }
    // -D(+-) with d_plus = -i cut_plus, d_minus = +i cut_minus.
    const Complex lhs =
        phasing == Phasing::Feynman ? Complex(0.0, 1.0) * cut : Complex(0.0, -1.0) * cut;

    // Mode-product side, collected absorber by absorber.
    Complex sum{};
    for (const Absorber& a : set.absorbers)
      for (int mode = a.window.first_mode; mode <= a.window.last_mode; ++mode) {
        if (mode == 0) continue;
        const Complex fa = detail::mode_function(grid, mode, ta, xa);
        const Complex fb = detail::mode_function(grid, mode, tb, xb);
        sum += phasing == Phasing::Feynman ? fa * std::conj(fb) : std::conj(fa) * fb;
      }
    const Complex rhs =
        phasing == Phasing::Feynman ? Complex(0.0, 1.0) * sum : Complex(0.0, -1.0) * sum;

    max_err = std::max(max_err, std::abs(lhs - rhs));
    max_val = std::max(max_val, std::abs(lhs));
  }
  return max_val > 0.0 ? max_err / max_val : max_err;
}

/// Same check over seeded random event pairs.
inline double factorization_check(const SpacetimeGrid& grid, const AbsorberSet& set,
                                  int pair_count, std::uint64_t seed, Phasing phasing) {
  if (pair_count < 1) throw ValidationError("factorization: need at least one pair");
  std::vector<GridPointPair> pairs(static_cast<std::size_t>(pair_count));
  SplitMix64 rng(derive_stream_seed(seed, 0x9a1fULL));
  for (auto& p : pairs) {
    p.time_a = static_cast<int>(rng.next() % grid.time_count());
    p.space_a = static_cast<int>(rng.next() % grid.space_count());
    p.time_b = static_cast<int>(rng.next() % grid.time_count());
    p.space_b = static_cast<int>(rng.next() % grid.space_count());
  }
  return factorization_check(grid, set, pairs, phasing);
}

/// One stochastic round: the non-unitary gate decides whether a transaction
/// forms at all; if it does, exactly one absorber wins the Born draw.
struct TransactionRecord {
  std::uint64_t trial;
  bool nu_occurred;
  std::optional<std::size_t> winner;
  double winner_probability = 0.0;
};

inline TransactionRecord run_single_trial(const OfferWave& offer, double coupling_e,
                                          double weight_g, std::uint64_t master_seed,
                                          std::uint64_t trial) {
  SplitMix64 rng(derive_stream_seed(master_seed, trial));
  TransactionRecord record{trial, false, std::nullopt, 0.0};
  record.nu_occurred = nu_gate(coupling_e, weight_g, rng);
  if (record.nu_occurred) {
    const WinnerDraw draw = select_winner(offer, rng);
    record.winner = draw.index;
    record.winner_probability = draw.probability;
  }
  return record;
}

struct EnsembleConfig {
  SpacetimeGrid grid;
  AbsorberSet absorbers;
  OfferWave offer;
  double coupling_e;
  double weight_g = 1.0;
  std::uint64_t trials;
  std::uint64_t seed;
  Phasing phasing = Phasing::Feynman;
  int factorization_pairs = 100;
};

struct EnsembleReport {
  std::uint64_t trials;
  std::uint64_t nu_count;
  double nu_rate;
  double nu_rate_stderr;
  std::vector<std::uint64_t> winner_counts;  // parallel to the absorber list
  double factorization_residual;
  double coupling_e;
  double weight_g;
  std::uint64_t seed;
  Phasing phasing;
};

/// Runs the full ensemble. Every trial draws from its own derived stream, so
/// the report is a pure function of the configuration.
inline EnsembleReport run_trials(const EnsembleConfig& config) {
  if (config.trials < 1) throw ValidationError("ensemble: need at least one trial");
  if (config.offer.amplitudes.size() != config.absorbers.absorbers.size())
    throw ValidationError("ensemble: offer must carry one amplitude per absorber");
  if (!config.offer.normalized || std::abs(config.offer.norm_squared() - 1.0) > 1e-12)
    throw ValidationError("ensemble: offer wave must be normalized");
  const CompletenessReport coverage = completeness_check(config.absorbers, config.grid);
  if (!coverage.complete())
    throw ValidationError("ensemble: absorber set does not close the box");
  if (config.coupling_e < 0.0 || config.coupling_e > 1.0)
    throw ValidationError("ensemble: coupling must lie in [0, 1]");
  if (config.weight_g < 0.0) throw ValidationError("ensemble: weight must be nonnegative");

  EnsembleReport report{};
  report.trials = config.trials;
  report.coupling_e = config.coupling_e;
  report.weight_g = config.weight_g;
  report.seed = config.seed;
  report.phasing = config.phasing;
  report.winner_counts.assign(config.absorbers.absorbers.size(), 0);
  report.factorization_residual = factorization_check(
      config.grid, config.absorbers, config.factorization_pairs, config.seed, config.phasing);
  for (std::uint64_t trial = 0; trial < config.trials; ++trial) {
    const TransactionRecord record = run_single_trial(config.offer, config.coupling_e,
                                                      config.weight_g, config.seed, trial);
    if (record.nu_occurred) {
      ++report.nu_count;
      ++report.winner_counts[*record.winner];
    }
  }
  report.nu_rate = static_cast<double>(report.nu_count) / static_cast<double>(report.trials);
  report.nu_rate_stderr =
      std::sqrt(std::max(report.nu_rate * (1.0 - report.nu_rate), 0.0) /
                static_cast<double>(report.trials));
  return report;
}

}  // namespace qdat
