#pragma once

#include "qdat/currents.hpp"
#include "qdat/kernel_numeric.hpp"
#include "qdat/rng.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace qdat {

/// First-order current-current interaction, split into the force-like part
/// carried by the time-symmetric kernel and the radiative part carried by the
/// even homogeneous kernel. Both parts are real; the full amplitude
/// recombines them as total = coulomb - (i/2) radiative.
struct ActionSplit {
  double coulomb_part;
  double radiative_part;
  Complex total;
};

inline ActionSplit action_split(const Current& a, const Current& b, const KernelField& bar,
                                const KernelField& one) {
  ActionSplit s{};
  s.coulomb_part = 0.5 * bilinear(a, bar, b).real();
  s.radiative_part = 0.5 * bilinear(a, one, b).real();
  s.total = Complex(s.coulomb_part, -0.5 * s.radiative_part);
  return s;
}

inline ActionSplit action_split(const Current& a, const Current& b) {
  const KernelField bar = eval_kernel(KernelName::Bar, a.grid);
  const KernelField one = eval_kernel(KernelName::One, a.grid);
  return action_split(a, b, bar, one);
}

/// Radiative coupling reduced to the positive-frequency kernel:
/// (1/2) sum_{i,j} bilinear(j_i, d_plus, j_j) over the given source list.
/// A degenerate pair (the same object passed twice) is one source.
inline Complex radiative_posfreq(std::span<const Current> currents) {
  if (currents.empty()) return {};
  const KernelField d_plus = eval_kernel(KernelName::DPlus, currents.front().grid);
  Complex sum{};
  for (const Current& ci : currents)
    for (const Current& cj : currents) sum += bilinear(ci, d_plus, cj);
  return 0.5 * sum;
}

inline Complex radiative_posfreq(const Current& a, const Current& b) {
  if (&a == &b) {
    std::vector<Current> single{a};
    return radiative_posfreq(std::span<const Current>(single));
  }
  std::vector<Current> pair{a, b};
  return radiative_posfreq(std::span<const Current>(pair));
}

/// Mean emitted quantum number of a single source:
/// (1/2) * bilinear(j, one, j). The bilinear is nonnegative up to roundoff;
/// tiny negative values clamp to zero and anything beyond roundoff scale is
/// a hard error.
inline double mean_photon_number(const Current& j, const KernelField& one) {
  const double raw = 0.5 * bilinear(j, one, j).real();
  if (raw < -1e-10)
    throw NumericalError("mean photon number came out substantially negative");
  return raw < 0.0 ? 0.0 : raw;
}

inline double mean_photon_number(const Current& j) {
  return mean_photon_number(j, eval_kernel(KernelName::One, j.grid));
}

/// Probability that the source emits nothing: exp(-nbar).
inline double persistence_probability(double nbar) {
  if (nbar < 0.0) throw ValidationError("persistence: mean photon number must be nonnegative");
  return std::exp(-nbar);
}

struct PoissonPmf {
  std::vector<double> probabilities;  // m = 0 .. max_count
  double tail;                        // mass above max_count
};

/// Poisson probabilities in log space, immune to overflow for large counts.
inline PoissonPmf poisson_pmf(double nbar, int max_count) {
  if (nbar < 0.0) throw ValidationError("poisson: mean must be nonnegative");
  if (max_count < 0) throw ValidationError("poisson: max count must be nonnegative");
  PoissonPmf pmf;
  pmf.probabilities.resize(static_cast<std::size_t>(max_count) + 1);
  double total = 0.0;
  for (int m = 0; m <= max_count; ++m) {
    double p;
    if (nbar == 0.0) {
      p = m == 0 ? 1.0 : 0.0;
    } else {
      p = std::exp(-nbar + m * std::log(nbar) - std::lgamma(m + 1.0));
    }
    pmf.probabilities[static_cast<std::size_t>(m)] = p;
    total += p;
  }
  pmf.tail = total < 1.0 ? 1.0 - total : 0.0;
  return pmf;
}

struct CountHistogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t trials;
  std::uint64_t seed;
};

/// Draws photon counts by inversion: walk the cumulative Poisson mass until
/// it passes a uniform deviate. Each trial owns an independent stream, so
/// results are reproducible regardless of batching.
inline CountHistogram sample_photon_counts(double nbar, std::uint64_t trials,
                                           std::uint64_t seed) {
  if (nbar < 0.0) throw ValidationError("poisson: mean must be nonnegative");
  CountHistogram hist{{}, trials, seed};
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(derive_stream_seed(seed, trial));
    const double u = rng.next_double();
    double term = std::exp(-nbar);
    double cum = term;
    int m = 0;
    while (u >= cum && m < 100000) {
      ++m;
      term *= nbar / m;
      cum += term;
    }
    if (hist.counts.size() <= static_cast<std::size_t>(m))
      hist.counts.resize(static_cast<std::size_t>(m) + 1);
    ++hist.counts[static_cast<std::size_t>(m)];
  }
  return hist;
}

struct EmissionStats {
  double nbar;
  double persistence;
  PoissonPmf pmf;
  CountHistogram histogram;
};

/// Full emission summary for one source. max_count < 0 selects the smallest
/// table that captures all but < 1e-12 of the mass.
inline EmissionStats emission_stats(const Current& j, std::uint64_t trials, std::uint64_t seed,
                                    int max_count = -1) {
  EmissionStats stats{};
  stats.nbar = mean_photon_number(j);
  stats.persistence = persistence_probability(stats.nbar);
  int m = max_count;
  if (m < 0) {
    m = 8;
    while (m < 400 && poisson_pmf(stats.nbar, m).tail >= 1e-12) m += 8;
  }
  stats.pmf = poisson_pmf(stats.nbar, m);
  stats.histogram = sample_photon_counts(stats.nbar, trials, seed);
  return stats;
}

}  // namespace qdat
