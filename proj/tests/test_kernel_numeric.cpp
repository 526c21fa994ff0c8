#include "qdat/kernel_numeric.hpp"
#include "qdat/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

using namespace qdat;

namespace {

/// Independent oracle: the positive-frequency mode sum written out in real
/// trigonometric form, one term per nonzero mode.
Complex cut_plus_oracle(const SpacetimeGrid& grid, double t, double x) {
  double re = 0.0;
  double im = 0.0;
  const int half = grid.num_modes() / 2;
  for (int n = -half + 1; n <= half; ++n) {
    if (n == 0) continue;
    const double k = 2.0 * std::numbers::pi * n / grid.spatial_extent();
    const double omega = std::abs(k);
    const double arg = omega * t - k * x;
    const double c = 1.0 / (2.0 * omega * grid.spatial_extent());
    re += c * std::cos(arg);
    im -= c * std::sin(arg);
  }
  return {re, im};
}

int reflected_time_slot(const SpacetimeGrid& grid, int i) { return grid.time_count() - 1 - i; }
int reflected_space_slot(const SpacetimeGrid& grid, int j) {
  return j == 0 ? 0 : grid.space_count() - j;
}

double reflection_residual(const KernelField& f, const KernelField& g) {
  // max |f(t, x) - g(-t, -x)| over the samples of a symmetric grid.
  double worst = 0.0;
  for (int i = 0; i < f.grid().time_count(); ++i)
    for (int j = 0; j < f.grid().space_count(); ++j)
      worst = std::max(worst, std::abs(f.at(i, j) - g.at(reflected_time_slot(f.grid(), i),
                                                         reflected_space_slot(f.grid(), j))));
  return worst;
}

}  // namespace

TEST_CASE("grid construction and validation") {
  const SpacetimeGrid grid = default_grid();
  CHECK(grid.num_modes() == 64);
  CHECK(grid.time_count() == 129);
  CHECK(grid.nonzero_modes().size() == 63);
  CHECK(grid.time(64) == 0.0);  // symmetric window midpoint is exact
  CHECK(grid.time_uniform());
  CHECK(grid.dt() == Catch::Approx(2.0 * std::numbers::pi / 128.0));
  CHECK(grid.x(0) == Catch::Approx(-std::numbers::pi));
  CHECK(grid.omega(-5) == Catch::Approx(5.0));

  CHECK_THROWS_AS(SpacetimeGrid(0.0, 8, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SpacetimeGrid(1.0, 7, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SpacetimeGrid(1.0, 2, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SpacetimeGrid(1.0, 8, {0.0}), ValidationError);
  CHECK_THROWS_AS(SpacetimeGrid(1.0, 8, {0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(SpacetimeGrid::uniform(1.0, 8, 5, 1.0, -1.0), ValidationError);
}

TEST_CASE("positive-frequency mode sum matches the trigonometric oracle") {
  const SpacetimeGrid grid =
      SpacetimeGrid::uniform(2.0 * std::numbers::pi, 8, 17, -std::numbers::pi, std::numbers::pi);
  const KernelField cut = eval_cut_propagator(FrequencySign::Positive, grid);
  for (int i : {0, 3, 8, 12, 16})
    for (int j : {0, 1, 4, 7}) {
      const Complex want = cut_plus_oracle(grid, grid.time(i), grid.x(j));
      CHECK(std::abs(cut.at(i, j) - want) < 1e-13);
    }
}

TEST_CASE("the two frequency signs are complex conjugates on real samples") {
  const SpacetimeGrid grid =
      SpacetimeGrid::uniform(2.0 * std::numbers::pi, 16, 33, -std::numbers::pi, std::numbers::pi);
  const KernelField plus = eval_cut_propagator(FrequencySign::Positive, grid);
  const KernelField minus = eval_cut_propagator(FrequencySign::Negative, grid);
  double worst = 0.0;
  for (int i = 0; i < grid.time_count(); ++i)
    for (int j = 0; j < grid.space_count(); ++j)
      worst = std::max(worst, std::abs(minus.at(i, j) - std::conj(plus.at(i, j))));
  CHECK(worst < 1e-13);
}

TEST_CASE("causal supports are sharp") {
  const SpacetimeGrid grid = default_grid();
  const KernelField ret = eval_kernel(KernelName::Ret, grid);
  const KernelField adv = eval_kernel(KernelName::Adv, grid);
  for (int i = 0; i < grid.time_count(); ++i)
    for (int j = 0; j < grid.space_count(); ++j) {
      if (grid.time(i) < 0.0) CHECK(ret.at(i, j) == Complex{});
      if (grid.time(i) > 0.0) CHECK(adv.at(i, j) == Complex{});
    }
}

TEST_CASE("homogeneous kernels are real with definite time parity") {
  const SpacetimeGrid grid = default_grid();
  const KernelField odd = eval_kernel(KernelName::Odd, grid);
  const KernelField one = eval_kernel(KernelName::One, grid);
  const double scale = std::max(max_abs(odd), max_abs(one));
  double imag_worst = 0.0;
  double parity_worst = 0.0;
  for (int i = 0; i < grid.time_count(); ++i)
    for (int j = 0; j < grid.space_count(); ++j) {
      imag_worst = std::max(imag_worst,
                            std::max(std::abs(odd.at(i, j).imag()), std::abs(one.at(i, j).imag())));
      const int ri = reflected_time_slot(grid, i);
      const int rj = reflected_space_slot(grid, j);
      parity_worst = std::max(parity_worst, std::abs(odd.at(i, j) + odd.at(ri, rj)));
      parity_worst = std::max(parity_worst, std::abs(one.at(i, j) - one.at(ri, rj)));
    }
  CHECK(imag_worst < 1e-12 * scale);
  CHECK(parity_worst < 1e-10 * scale);
}

TEST_CASE("basis decompositions hold on the default grid") {
  const SpacetimeGrid grid = default_grid();
  const KernelField bar = eval_kernel(KernelName::Bar, grid);
  const KernelField odd = eval_kernel(KernelName::Odd, grid);
  const KernelField one = eval_kernel(KernelName::One, grid);
  const KernelField feynman = eval_kernel(KernelName::Feynman, grid);
  const KernelField ret = eval_kernel(KernelName::Ret, grid);
  const double scale = max_abs(feynman);

  CHECK(residual(ret, linear_combination(1.0, bar, 0.5, odd)) < 1e-12 * scale);
  CHECK(residual(feynman, linear_combination(1.0, bar, Complex(0.0, -0.5), one)) <
        1e-12 * scale);
  const KernelField dyson = eval_kernel(KernelName::Dyson, grid);
  CHECK(residual(dyson, linear_combination(1.0, bar, Complex(0.0, 0.5), one)) < 1e-12 * scale);
  const KernelField dplus = eval_kernel(KernelName::DPlus, grid);
  const KernelField dminus = eval_kernel(KernelName::DMinus, grid);
  CHECK(residual(odd, linear_combination(1.0, dplus, 1.0, dminus)) < 1e-12 * scale);
  const KernelField delta_plus = eval_kernel(KernelName::DeltaPlus, grid);
  CHECK(residual(dplus, linear_combination(Complex(0.0, -1.0), delta_plus, 0.0, delta_plus)) <
        1e-12 * scale);
}

TEST_CASE("algebraic reflection agrees with sample reflection") {
  const SpacetimeGrid grid =
      SpacetimeGrid::uniform(2.0 * std::numbers::pi, 16, 33, -std::numbers::pi, std::numbers::pi);
  SplitMix64 rng(23);
  for (int round = 0; round < 4; ++round) {
    KernelExpr e;
    for (const auto& basis : kBasisKernels) {
      const auto num = [&rng] { return static_cast<std::int64_t>(rng.next() % 9) - 4; };
      e.add_term(basis, ExactComplex{Rational(num(), 2), Rational(num(), 2)});
    }
    const KernelField direct = eval_kernel(e, grid);
    const KernelField image = eval_kernel(reflect(e), grid);
    const double scale = std::max(1.0, max_abs(direct));
    CHECK(reflection_residual(image, direct) < 1e-12 * scale);
  }
}

TEST_CASE("frequency parts reflect into each other with a sign") {
  const SpacetimeGrid grid = default_grid();
  const KernelField dplus = eval_kernel(KernelName::DPlus, grid);
  const KernelField dminus_neg = eval_kernel(scale(canonical(KernelName::DMinus), exact(-1)), grid);
  const double s = max_abs(dplus);
  CHECK(reflection_residual(dminus_neg, dplus) < 1e-10 * s);
}

TEST_CASE("momentum route rejects bad softening and lattices") {
  const SpacetimeGrid grid =
      SpacetimeGrid::uniform(2.0 * std::numbers::pi, 4, 5, -std::numbers::pi, std::numbers::pi);
  CHECK_THROWS_AS(eval_feynman_momentum(grid, 0.0), ValidationError);
  CHECK_THROWS_AS(eval_feynman_momentum(grid, -1e-3), ValidationError);
  CHECK_THROWS_AS(eval_feynman_momentum(grid, 1e-2, FrequencyLattice{0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(eval_feynman_momentum(grid, 1e-2, FrequencyLattice{1.0, 0.5}), ValidationError);
}

TEST_CASE("momentum route approaches the component route when resolved") {
  const SpacetimeGrid probe =
      SpacetimeGrid::uniform(2.0 * std::numbers::pi, 4, 9, -std::numbers::pi, std::numbers::pi);
  const KernelField reference = eval_kernel(KernelName::Feynman, probe);
  const double scale = max_abs(reference);
  const KernelField approx =
      eval_feynman_momentum(probe, 1e-2, FrequencyLattice{1e-3, 256.0});
  CHECK(residual(approx, reference) / scale < 0.05);
  // The time-ordered kernel damps, so its imaginary part at the origin is
  // strictly negative (minus half the even homogeneous kernel).
  CHECK(approx.at(4, probe.space_count() / 2).imag() < 0.0);
}

TEST_CASE("joint refinement shrinks the momentum-route residual") {
  const double eps[] = {1e-1, 1e-2};
  const FeynmanStudy study = feynman_momentum_convergence(eps);
  REQUIRE(study.stages.size() == 2);
  CHECK(study.stages[0].residual > study.stages[1].residual);
  CHECK(study.monotone_decreasing());
  REQUIRE(study.decade_orders.size() == 1);
  CHECK(study.decade_orders[0] > 0.0);
}

TEST_CASE("field csv export is parseable and complete") {
  const SpacetimeGrid grid =
      SpacetimeGrid::uniform(2.0 * std::numbers::pi, 4, 5, -std::numbers::pi, std::numbers::pi);
  const KernelField one = eval_kernel(KernelName::One, grid);
  std::ostringstream os;
  write_csv(one, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,x,re,im");
  int rows = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++rows;
    if (rows == 1) {
      double t = 0.0, x = 0.0, re = 0.0, im = 0.0;
      REQUIRE(std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg", &t, &x, &re, &im) == 4);
      CHECK(t == Catch::Approx(grid.time(0)));
      CHECK(x == Catch::Approx(grid.x(0)));
      CHECK(re == Catch::Approx(one.at(0, 0).real()));
    }
  }
  CHECK(rows == grid.time_count() * grid.space_count());
}
