#include <gtest/gtest.h>

#include <cmath>

#include "qgle/kernel_spectrum.hpp"
#include "qgle/numerics.hpp"
#include "qgle/relaxation.hpp"
#include "qgle/variances.hpp"

using namespace qgle;

namespace {

const KernelParams kUnit(1.0, 1.0);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(VarianceOracle, ZeroAtOrigin) {
  const auto s = variances_frequency_oracle(kUnit, ThermalState(10.0), 0.0);
  EXPECT_EQ(s.sxx, 0.0);
  EXPECT_EQ(s.svv, 0.0);
  EXPECT_EQ(s.sxv, 0.0);
}

TEST(VarianceOracle, ClassicalLongTimeLimits) {
  const auto s = variances_frequency_oracle(kUnit, ThermalState(10.0), 50.0);
  EXPECT_LT(rel(s.sxx, 1000.0), 0.03);
  EXPECT_LT(rel(s.svv, 10.0), 0.02);
  EXPECT_LT(rel(s.sxv, 10.0), 0.03);
}

TEST(VarianceOracle, VacuumVelocityPlateauPositive) {
  const ThermalState vac(0.0);
  const double a = variances_frequency_oracle(kUnit, vac, 30.0).svv;
  const double b = variances_frequency_oracle(kUnit, vac, 60.0).svv;
  EXPECT_GT(b, 0.0);
  EXPECT_LT(rel(a, b), 1e-3);
}

TEST(VarianceOracle, CrossVarianceIsHalfDerivative) {
  for (double kbt : {0.0, 1.0, 10.0}) {
    const auto s = variances_frequency_oracle(kUnit, ThermalState(kbt), 3.0);
    EXPECT_LT(rel(s.sxv, 0.5 * s.dsxx_dt), 1e-5) << "kBT=" << kbt;
  }
}

TEST(VarianceOracle, AnalyticDerivativesMatchFiniteDifferences) {
  const ThermalState th(1.0);
  const double t = 3.0, eps = 2e-3;
  const auto s = variances_frequency_oracle(kUnit, th, t);
  // Richardson-extrapolated central differences; dsxv_dt is small next to its curvature here.
  auto fd = [&](auto field) {
    auto central = [&](double h) {
      return (field(variances_frequency_oracle(kUnit, th, t + h)) -
              field(variances_frequency_oracle(kUnit, th, t - h))) / (2 * h);
    };
    return (4.0 * central(eps / 2) - central(eps)) / 3.0;
  };
  EXPECT_LT(rel(fd([](const VarianceSample& v) { return v.sxx; }), s.dsxx_dt), 1e-6);
  EXPECT_LT(rel(fd([](const VarianceSample& v) { return v.svv; }), s.dsvv_dt), 1e-6);
  EXPECT_LT(rel(fd([](const VarianceSample& v) { return v.sxv; }), s.dsxv_dt), 1e-6);
}

TEST(VarianceOracle, HighTemperatureMatchesClassicalForms) {
  const ThermalState th(100.0);
  const auto s = variances_frequency_oracle(kUnit, th, 2.0);
  const auto c = classical_variances(kUnit, th, 2.0);
  EXPECT_LT(rel(s.sxx, c.sxx), 0.01);
  EXPECT_LT(rel(s.svv, c.svv), 0.01);
  EXPECT_LT(rel(s.sxv, c.sxv), 0.01);
}

TEST(ClassicalVariances, VelocityFormula) {
  const ThermalState th(10.0);
  const double h = h_analytic(kUnit, 1.0);
  EXPECT_NEAR(classical_variances(kUnit, th, 1.0).svv, 10.0 * (1.0 - h * h), 1e-12);
  const auto z = classical_variances(kUnit, th, 0.0);
  EXPECT_NEAR(z.sxx, 0.0, 10.0 * 1e-15);
  EXPECT_NEAR(z.svv, 0.0, 10.0 * 1e-15);
}

// Independent check: double time integral of H(t-s1) H(t-s2) C(s1-s2) with the
// band-limited correlation tabulated once on the lag grid.
TEST(VarianceOracle, FubiniAgainstTimeDomainDoubleIntegral) {
  struct Case {
    double g0, tc, kbt, t;
  };
  for (const Case c : {Case{1.0, 1.0, 1.0, 2.0}, Case{0.6, 1.5, 5.0, 1.5}, Case{2.0, 0.5, 0.5, 1.0}}) {
    const KernelParams k(c.g0, c.tc);
    const ThermalState th(c.kbt);
    const double W = 100.0 / c.tc;
    const std::size_t n = 400;
    const double d = c.t / static_cast<double>(n);
    std::vector<double> C(n + 1);
    for (std::size_t j = 0; j <= n; ++j) C[j] = noise_correlation_band_limited(k, th, d * static_cast<double>(j), W);
    const Relaxation rel_f(k);
    std::vector<double> H(n + 1), h(n + 1), w(n + 1, d);
    for (std::size_t i = 0; i <= n; ++i) {
      H[i] = rel_f.H(c.t - d * static_cast<double>(i));
      h[i] = rel_f.h(c.t - d * static_cast<double>(i));
    }
    w.front() = w.back() = 0.5 * d;
    double sxx = 0.0, svv = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j <= n; ++j) {
        const double cc = w[i] * w[j] * C[i > j ? i - j : j - i];
        sxx += H[i] * H[j] * cc;
        svv += h[i] * h[j] * cc;
      }
    VarianceOptions vo;
    vo.omega_max = W;
    const auto s = variances_frequency_oracle(k, th, c.t, vo);
    EXPECT_LT(rel(sxx, s.sxx), 1e-3) << c.g0 << " " << c.tc << " " << c.kbt;
    EXPECT_LT(rel(svv, s.svv), 1e-3) << c.g0 << " " << c.tc << " " << c.kbt;
  }
}

TEST(VarianceOracle, MonotoneInTemperature) {
  double prev = 0.0;
  for (double kbt : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const double v = variances_frequency_oracle(kUnit, ThermalState(kbt), 5.0).sxx;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(VarianceOracle, CovariancePositiveSemidefinite) {
  for (double kbt : {0.0, 2.0})
    for (double t : linspace(0.25, 15.0, 12)) {
      const auto s = variances_frequency_oracle(kUnit, ThermalState(kbt), t);
      EXPECT_GE(s.sxx, 0.0);
      EXPECT_GE(s.svv, 0.0);
      EXPECT_GE(s.sxx * s.svv - s.sxv * s.sxv, -1e-12 * s.sxx * s.svv);
    }
}

// H(t) = t + O(t^3) makes the position variance start as t^4, not t^2.
TEST(VarianceOracle, ShortTimeOnsetIsQuartic) {
  const ThermalState th(10.0);
  const auto c1 = classical_variances(kUnit, th, 0.01), c2 = classical_variances(kUnit, th, 0.02);
  EXPECT_NEAR(std::log(c2.sxx / c1.sxx) / std::log(2.0), 4.0, 0.01);
  double prev = INFINITY;
  for (double t : {0.08, 0.04, 0.02, 0.01}) {
    const double r = variances_frequency_oracle(kUnit, th, t).sxx / (t * t);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(VarianceOracle, SlopeCrossoverToDiffusive) {
  const ThermalState th(10.0);
  const double a = variances_frequency_oracle(kUnit, th, 20.0).sxx;
  const double b = variances_frequency_oracle(kUnit, th, 40.0).sxx;
  EXPECT_NEAR(std::log(b / a) / std::log(2.0), 1.0, 0.05);
}

TEST(VarianceOracle, RejectsNegativeTime) {
  EXPECT_THROW(variances_frequency_oracle(kUnit, ThermalState(1.0), -1.0), ValidationError);
}

TEST(VarianceSeries, CollectsSamples) {
  const auto grid = linspace(0.0, 2.0, 5);
  const auto s = variance_series(kUnit, ThermalState(1.0), grid);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s.sxx.size(), 5u);
  EXPECT_EQ(s.omega_max, default_variance_cutoff(kUnit, ThermalState(1.0)));
  EXPECT_NEAR(s.sxv[3], sigma_xv(kUnit, ThermalState(1.0), 1.5), 1e-14);
}

TEST(Appendix, EveryTermVanishesAtOrigin) {
  const AppendixForms f(kUnit, 0.0);
  const auto P = f.point(1.3);
  for (double v : f.fx_terms(P, AppendixVariant::corrected())) EXPECT_NEAR(v, 0.0, 1e-14);
  for (double v : f.fv_terms(P, AppendixVariant::corrected())) EXPECT_NEAR(v, 0.0, 1e-14);
  EXPECT_EQ(sigma_xx_appendix(kUnit, ThermalState(1.0), 0.0), 0.0);
  EXPECT_EQ(sigma_vv_appendix(kUnit, ThermalState(1.0), 0.0), 0.0);
}

TEST(Appendix, CorrectedVariantMatchesOracle) {
  const ThermalState th(10.0);
  const auto o = variances_frequency_oracle(kUnit, th, 5.0);
  EXPECT_LT(rel(sigma_xx_appendix(kUnit, th, 5.0), o.sxx), 1e-4);
  EXPECT_LT(rel(sigma_vv_appendix(kUnit, th, 5.0), o.svv), 1e-4);
}

TEST(Appendix, IntegrandsMatchOraclePointwise) {
  // |G_H|^2 and |G_h|^2 in closed form against the bracket forms
  const Relaxation r(kUnit);
  const double t = 3.0;
  const AppendixForms f(kUnit, t);
  for (double w : {0.2, 1.0, 4.5}) {
    const double gx = std::norm(r.H_modes().fourier_partial(w, t));
    const double gv = std::norm(r.h_modes().fourier_partial(w, t));
    const double lam2 = kUnit.lambda() * kUnit.lambda();
    EXPECT_NEAR(2.0 * f.fx(w) / kUnit.gamma0(), gx, 1e-10 * (1 + gx)) << w;
    EXPECT_NEAR(2.0 * f.fv(w) / lam2, gv, 1e-10 * (1 + gv)) << w;
  }
}

TEST(Appendix, TermsSumToTotal) {
  const auto r = sigma_xx_appendix_terms(kUnit, ThermalState(1.0), 2.0);
  ASSERT_EQ(r.term_integrals.size(), 11u);
  double s = 0.0;
  for (double v : r.term_integrals) s += v;
  EXPECT_NEAR(s, r.value, 1e-10 * std::abs(r.value));
  EXPECT_EQ(sigma_vv_appendix_terms(kUnit, ThermalState(1.0), 2.0).term_integrals.size(), 7u);
}

TEST(Appendix, PrintedVariantDisagrees) {
  const auto c = appendix_comparison(kUnit, ThermalState(1.0), 2.0);
  EXPECT_LT(rel(c.sxx(AppendixVariant::corrected()), c.sxx_oracle), 1e-6);
  EXPECT_LT(rel(c.svv(AppendixVariant::corrected()), c.svv_oracle), 1e-6);
  EXPECT_GT(rel(c.sxx(AppendixVariant::printed()), c.sxx_oracle), 1e-3);
  EXPECT_GT(rel(c.svv(AppendixVariant::printed()), c.svv_oracle), 1e-3);
}

TEST(Appendix, PointRejectsNonPositiveFrequency) {
  EXPECT_THROW(AppendixForms(kUnit, 1.0).point(0.0), ValidationError);
}
