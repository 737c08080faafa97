#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qgle/smoluchowski.hpp"

using namespace qgle;

namespace {

const KernelParams kUnit(1.0, 1.0);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(OverdampedDiffusion, Limits) {
  EXPECT_LT(rel(overdamped_diffusion(kUnit, ThermalState(100.0), 1.0), 100.0), 0.01);
  EXPECT_EQ(overdamped_diffusion(kUnit, ThermalState(0.0), 1.4), 0.7);
  EXPECT_EQ(overdamped_diffusion(KernelParams(2.0, 1.0), ThermalState(0.0, 0.5), 3.0), 0.5 * 3.0 / 4.0);
  EXPECT_NEAR(overdamped_diffusion(kUnit, ThermalState(1.0), 1.0), 0.5 / std::tanh(0.5), 1e-12);
  EXPECT_NEAR(overdamped_diffusion(kUnit, ThermalState(1.0), 1.0), 1.0820, 1e-4);
  EXPECT_THROW(overdamped_diffusion(kUnit, ThermalState(1.0), 0.0), ValidationError);
}

TEST(OverdampedDiffusion, ClassicalChain) {
  // hbar -> 0 at fixed kBT recovers kBT / gamma0
  double prev = INFINITY;
  for (double hbar : {1.0, 0.1, 0.01}) {
    const double d = overdamped_diffusion(kUnit, ThermalState(1.0, hbar), 1.0);
    EXPECT_LT(std::abs(d - 1.0), prev);
    prev = std::abs(d - 1.0);
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(QuantumDispersion, Values) {
  const double m[1] = {0.5};
  EXPECT_EQ(quantum_dispersion_Q(PotentialSpec::harmonic(2.0), 0.7, m), 0.0);
  EXPECT_NEAR(quantum_dispersion_Q(PotentialSpec{0, 0, 0, 0, 0.25}, 1.0, m), -1.5, 1e-14);
  // coherent-state width vanishes with hbar
  const auto pot = PotentialSpec::quartic_well();
  for (double hbar : {1.0, 1e-3}) {
    const auto c = CorrectionState::coherent(1.0, 0.0, 1.0, hbar);
    EXPECT_NEAR(quantum_dispersion_Q(pot, c), -0.5 * pot.d3(1.0) * 0.5 * hbar, 1e-15);
  }
}

TEST(QuantumDispersion, HigherMomentsEnter) {
  // V = X^5: V''' = 60 X^2, V'''' = 120 X
  const PotentialSpec p{0, 0, 0, 0, 0, 1.0};
  const double m[2] = {0.3, 0.1};
  EXPECT_NEAR(quantum_dispersion_Q(p, 2.0, m), -(60.0 * 4.0 * 0.3 / 2.0 + 120.0 * 2.0 * 0.1 / 6.0), 1e-12);
}

TEST(EffectivePotential, HarmonicShiftAndGradient) {
  const auto harm = PotentialSpec::harmonic(1.5);
  const double m[1] = {0.4};
  for (double x : {-1.0, 0.0, 2.0}) EXPECT_NEAR(effective_potential(harm, x, m), harm(x) + 0.5 * 2.25 * 0.4, 1e-14);
  const auto pot = PotentialSpec{0.0, 0.3, -1.0, 0.2, 0.5};
  for (double x : linspace(-2.0, 2.0, 10)) {
    EXPECT_NEAR(effective_force_gradient(pot, x, 0.4), pot.d1(x) - quantum_dispersion_Q(pot, x, m), 1e-12);
    const double h = 1e-5;
    EXPECT_NEAR((effective_potential(pot, x + h, m) - effective_potential(pot, x - h, m)) / (2 * h),
                effective_force_gradient(pot, x, 0.4), 1e-7);
  }
  const double zero[1] = {0.0};
  EXPECT_EQ(effective_potential(pot, 0.7, zero), pot(0.7));
}

TEST(Corrections, HarmonicCoherentStateStationary) {
  const double w = 1.3;
  const auto grid = linspace(0.0, 50.0, 101);
  const auto s = evolve_corrections(PotentialSpec::harmonic(w), CorrectionState::coherent(0.5, 0.0, w), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(s.states[i].dxx, 0.5 / w, 1e-10);
    EXPECT_NEAR(s.states[i].dpp, 0.5 * w, 1e-10);
    EXPECT_NEAR(s.states[i].x, 0.5 * std::cos(w * grid[i]), 1e-9);  // classical trajectory
  }
  EXPECT_LT(s.max_uncertainty_drift, 1e-10);
}

TEST(Corrections, DeterminantConservedForCubicPerturbation) {
  const PotentialSpec pot{0.0, 0.0, 0.5, 0.1};
  const auto grid = linspace(0.0, 50.0, 501);
  // keep the orbit inside the well, away from the cubic's escape point
  const auto s = evolve_corrections(pot, CorrectionState::coherent(0.5, 0.0, 1.0), grid);
  EXPECT_LT(s.max_uncertainty_drift, 1e-8);
  double spread = 0.0;
  for (const auto& st : s.states) spread = std::max(spread, std::abs(st.dxx - s.states.front().dxx));
  EXPECT_GT(spread, 1e-3);  // the widths do evolve
}

TEST(Corrections, InvalidInitialStateRejected) {
  const auto grid = linspace(0.0, 1.0, 3);
  EXPECT_THROW(evolve_corrections(PotentialSpec::harmonic(1.0), CorrectionState{0, 0, 0.1, 0, 0.1}, grid),
               ValidationError);
  EXPECT_THROW(evolve_corrections(PotentialSpec::harmonic(1.0), CorrectionState::coherent(0, 0, 1), std::vector<double>{1.0, 0.5}),
               ValidationError);
}

TEST(Corrections, InterpolatedWidth) {
  CorrectionSeries s;
  s.t = {0.0, 1.0};
  s.states = {CorrectionState{0, 0, 1.0, 0, 1}, CorrectionState{0, 0, 3.0, 0, 1}};
  EXPECT_EQ(s.dxx_at(0.5), 2.0);
  EXPECT_EQ(s.dxx_at(-1.0), 1.0);
  EXPECT_EQ(s.dxx_at(5.0), 3.0);
}

TEST(Smoluchowski, HarmonicStationaryVariance) {
  const double w = 1.0;
  for (double kbt : {10.0, 0.0}) {
    const ThermalState th(kbt);
    const auto g = default_grid(kUnit, th, w);
    const double target = kbt > 0 ? kbt / (w * w) : 0.5 / w;
    const auto init = DensityField::gaussian(g.x0, g.x(g.size() - 1), g.size(), 1.0, 0.2 * target);
    const auto r = solve_smoluchowski(PotentialSpec::harmonic(w), kUnit, th, w, init, 20.0);
    EXPECT_LT(rel(r.snapshots.back().variance(), target), 0.02) << kbt;
    EXPECT_LT(r.max_mass_error, 1e-9);
    EXPECT_GE(r.min_density, 0.0);
    EXPECT_NEAR(r.snapshots.back().variance(), kUnit.gamma0() * r.D / (w * w), 1e-6 * target);
  }
}

TEST(Smoluchowski, FreeDiffusionVarianceGrowth) {
  const ThermalState th(1.0);
  auto init = DensityField::gaussian(-40.0, 40.0, 801, 0.0, 0.5);
  const auto r = solve_smoluchowski(PotentialSpec::free(), kUnit, th, 1.0, init, 5.0);
  const double growth = r.snapshots.back().variance() - init.variance();
  EXPECT_LT(rel(growth, 2.0 * r.D * r.snapshots.back().t), 0.01);
}

TEST(Smoluchowski, QuarticStationaryStateIsBoltzmann) {
  const ThermalState th(0.5);
  const auto pot = PotentialSpec::quartic_well();
  const double wt = linearized_frequency(pot);
  CorrectionOptions co;
  co.frozen_at = 0.0;
  const auto cs = evolve_corrections(pot, CorrectionState::coherent(0.0, 0.0, wt), linspace(0.0, 20.0, 21), co);
  const auto g = default_grid(kUnit, th, wt);
  const auto init = DensityField::gaussian(g.x0, g.x(g.size() - 1), g.size(), 0.3, 0.3);
  SmoluchowskiOptions so;
  so.corrections = &cs;
  const auto r = solve_smoluchowski(pot, kUnit, th, wt, init, 20.0, so);
  const double m[1] = {cs.states.back().dxx};
  const auto B = boltzmann_density(r.snapshots.back(), [&](double x) { return effective_potential(pot, x, m); },
                                   kUnit.gamma0(), r.D);
  for (std::size_t i = 0; i < B.size(); ++i)
    if (B.p[i] > 1e-6) ASSERT_NEAR(r.snapshots.back().p[i] / B.p[i], 1.0, 1e-3) << B.x(i);
}

TEST(Smoluchowski, RejectsBadInput) {
  auto f = DensityField::gaussian(-5, 5, 101, 0, 1);
  f.p[3] *= 2.0;
  EXPECT_THROW(solve_smoluchowski(PotentialSpec::harmonic(1), kUnit, ThermalState(1), 1.0, f, 1.0), ValidationError);
  const auto g = DensityField::gaussian(-5, 5, 101, 0, 1);
  EXPECT_THROW(solve_smoluchowski(PotentialSpec::harmonic(1), kUnit, ThermalState(1), 0.0, g, 1.0), ValidationError);
}

TEST(OverdampedLangevin, HarmonicVarianceAndFreeMsd) {
  const ThermalState th(10.0);
  OverdampedOptions o;
  o.n_traj = 20000;
  const std::vector<double> grid{0.0, 10.0};
  const auto e = overdamped_langevin_check(PotentialSpec::harmonic(1.0), kUnit, th, 1.0, grid, o);
  // stationary variance of the Euler-Maruyama chain for X' = -X/gamma0 + noise: D gamma0 / (1 - dt/(2 gamma0))
  const double target = kUnit.gamma0() * e.D / (1.0 - 0.5 * o.dt / kUnit.gamma0());
  EXPECT_LT(std::abs(e.variance(1).z(target)), 3.0);
  const auto f = overdamped_langevin_check(PotentialSpec::free(), kUnit, th, 1.0, std::vector<double>{0.0, 2.0}, o);
  EXPECT_LT(std::abs(f.msd(1, 0.0).z(2.0 * f.D * 2.0)), 3.0);
}

TEST(OverdampedLangevin, QuarticHistogramMatchesPde) {
  const ThermalState th(0.5);
  const auto pot = PotentialSpec::quartic_well();
  const double wt = linearized_frequency(pot);
  CorrectionOptions co;
  co.frozen_at = 0.0;
  const auto cs = evolve_corrections(pot, CorrectionState::coherent(0.0, 0.0, wt), linspace(0.0, 20.0, 21), co);
  const auto g = default_grid(kUnit, th, wt);
  SmoluchowskiOptions so;
  so.corrections = &cs;
  const auto r = solve_smoluchowski(pot, kUnit, th, wt, DensityField::gaussian(g.x0, g.x(g.size() - 1), g.size(), 0.0, 0.3),
                                    20.0, so);
  OverdampedOptions o;
  o.n_traj = 20000;
  o.dxx = cs.states.back().dxx;
  const auto e = overdamped_langevin_check(pot, kUnit, th, wt, std::vector<double>{0.0, 10.0}, o);
  EXPECT_LT(ks_distance(e.X[1], r.snapshots.back()), 0.02);
}

TEST(KsDistance, SmallForExactSamples) {
  const auto f = DensityField::gaussian(-8, 8, 2001, 0.0, 1.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<double> s(20000);
  for (double& v : s) v = n(rng);
  EXPECT_LT(ks_distance(s, f), 0.015);
  for (double& v : s) v += 0.5;
  EXPECT_GT(ks_distance(s, f), 0.15);
}
