#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qgle/numerics.hpp"

using namespace qgle;

TEST(Quadrature, PolynomialIsExact) {
  const auto r = integrate([](double x) { return 3.0 * x * x + 1.0; }, 0.0, 2.0);
  EXPECT_NEAR(r.value[0], 10.0, 1e-13);
  EXPECT_TRUE(r.converged);
}

TEST(Quadrature, OscillatoryAgainstClosedForm) {
  // int_0^50 cos(3x) e^{-x/10} dx
  const double a = 0.1, b = 3.0, L = 50.0;
  const double exact = (a + std::exp(-a * L) * (b * std::sin(b * L) - a * std::cos(b * L))) / (a * a + b * b);
  const auto breaks = frequency_panels(L, 3.0, 1.0);
  auto f = [&](double x) { return std::array<double, 1>{std::cos(b * x) * std::exp(-a * x)}; };
  const auto r = integrate_panels<1>(f, breaks);
  EXPECT_NEAR(r.value[0], exact, 1e-12);
  EXPECT_LT(r.max_rel_error(), 1e-8);
}

TEST(Quadrature, VectorComponentsIndependent) {
  auto f = [](double x) { return std::array<double, 2>{std::sin(x), x}; };
  const std::vector<double> breaks{0.0, std::numbers::pi / 2, std::numbers::pi};
  const auto r = integrate_panels<2>(f, breaks);
  EXPECT_NEAR(r.value[0], 2.0, 1e-13);
  EXPECT_NEAR(r.value[1], 0.5 * std::numbers::pi * std::numbers::pi, 1e-12);
}

TEST(FrequencyPanels, CoverRangeAndRespectWidthCap) {
  const auto b = frequency_panels(100.0, 10.0, 1.0);
  EXPECT_EQ(b.front(), 0.0);
  EXPECT_EQ(b.back(), 100.0);
  for (std::size_t i = 1; i < b.size(); ++i) {
    EXPECT_GT(b[i], b[i - 1]);
    EXPECT_LE(b[i] - b[i - 1], std::numbers::pi / 40.0 + 1e-15);
  }
  EXPECT_THROW(frequency_panels(0.0, 1.0, 1.0), ValidationError);
}

TEST(CompensatedSum, RecoversSmallTerms) {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}

TEST(Helpers, LinspaceTrapezoidAndSlope) {
  const auto x = linspace(0.0, 1.0, 101);
  ASSERT_EQ(x.size(), 101u);
  EXPECT_EQ(x.front(), 0.0);
  EXPECT_EQ(x.back(), 1.0);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 4.0 * x[i] - 2.0;
  EXPECT_NEAR(trapezoid(x, y), 0.0, 1e-14);
  EXPECT_NEAR(linear_fit_slope(x, y), 4.0, 1e-12);
}
