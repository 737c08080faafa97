#include <gtest/gtest.h>

#include <cmath>

#include "qgle/fpe_diffusion.hpp"
#include "qgle/numerics.hpp"

using namespace qgle;

namespace {

const KernelParams kUnit(1.0, 1.0);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(FpeCoefficients, VanishAtOrigin) {
  const auto c = fpe_coefficients(kUnit, ThermalState(1.0), 0.0);
  EXPECT_EQ(c.psi, 0.0);
  EXPECT_EQ(c.phi, 0.0);
  EXPECT_FALSE(c.singular);
}

TEST(FpeCoefficients, HighTemperatureWidth) {
  VarianceOptions vo;
  vo.omega_max = 2000.0;  // the 1/w^4 tail beyond this is negligible here
  const auto c = fpe_coefficients(kUnit, ThermalState(100.0), 20.0, vo);
  EXPECT_LT(rel(c.phi / c.xi, 100.0), 0.02);
}

TEST(FpeCoefficients, XiIsMinusHdotOverH) {
  const Relaxation r(kUnit);
  for (double t : {0.5, 2.5, 6.0}) {
    const auto c = fpe_coefficients(kUnit, ThermalState(0.0), t);
    EXPECT_NEAR(c.xi, -r.h_dot(t) / r.h(t), 1e-9 * (1.0 + std::abs(c.xi)));
  }
}

TEST(FpeCoefficients, SingularNearZerosOfh) {
  const KernelParams k(1.0, 1.0);
  // first zero of h: lambda t + alpha = atan2(lambda, d) + n pi
  const double d = k.decay(), lam = k.lambda();
  double th0 = std::atan2(lam, d);
  while (th0 < k.alpha()) th0 += std::numbers::pi;
  const double tz = (th0 - k.alpha()) / lam;
  const Relaxation r(k);
  EXPECT_LT(std::abs(r.h(tz)), 1e-12);
  const VarianceSample s{tz};
  EXPECT_TRUE(fpe_from_sample(r, s).singular);
  EXPECT_FALSE(fpe_from_sample(r, VarianceSample{tz + 1e-3}).singular);
}

TEST(Delta0, ClassicalValue) {
  const auto d = delta0(kUnit, ThermalState(10.0));
  EXPECT_LT(rel(d.value, 10.0), 0.02);
  EXPECT_GE(d.iterates.size(), 2u);
  EXPECT_EQ(d.t_inf.front(), 20.0);
  EXPECT_EQ(d.t_inf[1], 40.0);
}

TEST(Delta0, VacuumEqualsVelocityPlateau) {
  const ThermalState vac(0.0);
  const auto d = delta0(kUnit, vac);
  EXPECT_GT(d.value, 0.0);
  const double svv = variances_frequency_oracle(kUnit, vac, 2.0 * d.t_inf.back()).svv;
  EXPECT_LT(rel(d.value, svv), 2e-3);
}

TEST(Delta0, IndependentOfStartOnceConverged) {
  const ThermalState th(1.0);
  Delta0Options a, b;
  b.t_start = 40.0;
  EXPECT_LT(rel(delta0_value(kUnit, th, a), delta0_value(kUnit, th, b)), 2e-3);
}

TEST(Delta0, ReportsNonConvergence) {
  Delta0Options o;
  o.t_start = 0.5;
  o.max_doublings = 0;
  o.tol = 1e-12;
  EXPECT_THROW(delta0(kUnit, ThermalState(1.0), o), NumericalError);
}

TEST(JointDensity, ModeNormalizationAndMarginal) {
  const ThermalState th(1.0);
  const Relaxation r(kUnit);
  const auto s = variances_frequency_oracle(kUnit, th, 2.0);
  const double d0 = 1.1;
  const auto st = phase_state_averaged(r, s, 0.3, d0);
  EXPECT_NEAR(joint_density(st, st.meanX, st.meanV), 1.0 / (2.0 * std::numbers::pi * std::sqrt(st.det())), 1e-14);

  const double sx = std::sqrt(st.sxx), sv = std::sqrt(st.svv);
  const auto xs = linspace(st.meanX - 9 * sx, st.meanX + 9 * sx, 241);
  const auto vs = linspace(-9 * sv, 9 * sv, 241);
  std::vector<double> row(vs.size()), col(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) row[j] = joint_density(st, xs[i], vs[j]);
    col[i] = trapezoid(vs, row);
    EXPECT_NEAR(col[i], marginal_density(0.3, marginal_variance(r, s, d0), xs[i]), 1e-9);
  }
  EXPECT_NEAR(trapezoid(xs, col), 1.0, 1e-6);
}

TEST(JointDensity, FixedInitialVelocityMeans) {
  const Relaxation r(kUnit);
  const auto s = variances_frequency_oracle(kUnit, ThermalState(1.0), 1.5);
  const auto st = phase_state(r, s, 0.2, 2.0);
  EXPECT_NEAR(st.meanX, 0.2 + 2.0 * r.H(1.5), 1e-15);
  EXPECT_NEAR(st.meanV, 2.0 * r.h(1.5), 1e-15);
}

TEST(JointDensity, DegenerateCovarianceRejected) {
  const Relaxation r(kUnit);
  const auto s = variances_frequency_oracle(kUnit, ThermalState(1.0), 0.0);
  EXPECT_THROW(joint_density(phase_state(r, s, 0.0, 0.0), 0.0, 0.0), ValidationError);
}

TEST(DiffusionCoefficient, ZeroAtOrigin) {
  EXPECT_EQ(quantum_diffusion_coefficient(kUnit, ThermalState(1.0), 0.0, 1.0), 0.0);
}

TEST(DiffusionCoefficient, EinsteinLimit) {
  const ThermalState th(10.0);
  const double d0 = delta0_value(kUnit, th);
  EXPECT_LT(rel(quantum_diffusion_coefficient(kUnit, th, 50.0, d0), 10.0), 0.03);
}

TEST(DiffusionCoefficient, VacuumNonnegative) {
  const KernelParams k(0.275, 1.0);
  const ThermalState vac(0.0);
  const double d0 = delta0_value(k, vac);
  for (double t : linspace(0.25, 60.0, 40)) EXPECT_GE(quantum_diffusion_coefficient(k, vac, t, d0), 0.0) << t;
}

TEST(DiffusionCoefficient, VarianceRateIsTwiceDq) {
  const ThermalState th(1.0);
  const Relaxation r(kUnit);
  const double d0 = 0.9, t = 2.0, eps = 1e-3;
  auto var = [&](double tt) { return marginal_variance(r, variances_frequency_oracle(kUnit, th, tt), d0); };
  const double fd = (var(t + eps) - var(t - eps)) / (2 * eps);
  EXPECT_LT(rel(fd, 2.0 * quantum_diffusion_coefficient(kUnit, th, t, d0)), 1e-6);
}

TEST(MarginalDensity, NormalizedAndFloored) {
  const auto xs = linspace(-20.0, 20.0, 4001);
  std::vector<double> p(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) p[i] = marginal_density(0.5, 2.0, xs[i]);
  EXPECT_NEAR(trapezoid(xs, p), 1.0, 1e-8);
  EXPECT_THROW(marginal_density(0.0, 0.0, 0.0), NumericalError);
  EXPECT_THROW(marginal_density(kUnit, ThermalState(1.0), 0.0, 0.0, 0.0, 1.0), NumericalError);
}

TEST(MarginalDensity, SolvesDiffusionEquation) {
  const ThermalState th(1.0);
  const Relaxation r(kUnit);
  const double d0 = delta0_value(kUnit, th);
  for (double t : {1.0, 3.0}) {
    const double eps = 1e-3;
    const double vm = marginal_variance(r, variances_frequency_oracle(kUnit, th, t - eps), d0);
    const double vp = marginal_variance(r, variances_frequency_oracle(kUnit, th, t + eps), d0);
    const double v0 = marginal_variance(r, variances_frequency_oracle(kUnit, th, t), d0);
    const double D = quantum_diffusion_coefficient(kUnit, th, t, d0);
    const double hx = 1e-3 * std::sqrt(v0);
    double worst = 0.0, scale = 0.0;
    for (double X : linspace(-4 * std::sqrt(v0), 4 * std::sqrt(v0), 41)) {
      const double dt = (marginal_density(0.0, vp, X) - marginal_density(0.0, vm, X)) / (2 * eps);
      const double dxx = (marginal_density(0.0, v0, X + hx) - 2 * marginal_density(0.0, v0, X) +
                          marginal_density(0.0, v0, X - hx)) / (hx * hx);
      worst = std::max(worst, std::abs(dt - D * dxx));
      scale = std::max(scale, std::abs(dt));
    }
    EXPECT_LE(worst, 1e-4 * scale) << "t=" << t;
  }
}

TEST(StationaryFlux, VanishesAtConvergedWidth) {
  const auto d = delta0(kUnit, ThermalState(10.0));
  for (double V : linspace(-15.0, 15.0, 31))
    EXPECT_NEAR(stationary_flux(d.coefficients, d.value, V), 0.0, 1e-12);
  EXPECT_GT(std::abs(stationary_flux(d.coefficients, 2.0 * d.value, 3.0)), 1e-3);
}

TEST(DiffusionTable, RowsConsistent) {
  const auto rows = diffusion_table(kUnit, ThermalState(1.0), std::vector<double>{0.0, 1.0, 2.0}, 1.0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].D_q, 0.0);
  EXPECT_NEAR(rows[2].D_q, rows[2].sxv + rows[2].H * rows[2].h, 1e-14);
  EXPECT_NEAR(rows[2].marginal_var, rows[2].sxx + rows[2].H * rows[2].H, 1e-14);
}
