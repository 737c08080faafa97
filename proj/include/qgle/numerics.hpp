#pragma once

// Quadrature and summation primitives shared by the physics modules.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qgle/error.hpp"

namespace qgle {

/// Neumaier-compensated accumulator; keeps long reductions independent of
/// summation order up to O(eps) instead of O(n eps).
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct QuadratureOptions {
  double rel_tol = 1e-10;   // per panel, against the panel's L1 mass
  double abs_tol = 1e-300;  // per panel floor
  int max_depth = 24;
  std::size_t max_evaluations = 20'000'000;  // past this, panels are accepted unconverged
};

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  std::array<double, N> abs_error{};
  std::size_t evaluations = 0;
  std::size_t panels = 0;
  bool converged = true;

  double max_rel_error() const {
    double r = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double scale = std::max(std::abs(value[i]), std::numeric_limits<double>::min());
      r = std::max(r, abs_error[i] / scale);
    }
    return r;
  }
};

namespace detail {

struct KronrodRule {
  static constexpr std::size_t points = 15;
  std::array<double, 8> x{};   // nonnegative Kronrod abscissae, x[0] = 0
  std::array<double, 8> wk{};  // Kronrod weights
  std::array<double, 8> wg{};  // Gauss weights on the even-indexed nodes (0 elsewhere)

  static const KronrodRule& get() {
    static const KronrodRule rule = [] {
      KronrodRule r;
      using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
      using g = boost::math::quadrature::gauss<double, 7>;
      const auto& xs = gk::abscissa();
      const auto& ws = gk::weights();
      const auto& gw = g::weights();
      for (std::size_t i = 0; i < 8; ++i) {
        r.x[i] = xs[i];
        r.wk[i] = ws[i];
      }
      // Gauss-7 nodes are the odd Kronrod nodes counted from the centre:
      // boost orders Kronrod abscissae 0, x1, x2... with Gauss nodes at even index.
      for (std::size_t i = 0; i < 8; i += 2) r.wg[i] = gw[i / 2];
      return r;
    }();
    return rule;
  }
};

template <std::size_t N, class F>
void kronrod_panel(F& f, double a, double b, std::array<double, N>& k, std::array<double, N>& err,
                   std::array<double, N>& l1, std::size_t& evals) {
  const auto& r = KronrodRule::get();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, N> gsum{};
  k.fill(0.0);
  l1.fill(0.0);
  auto accumulate = [&](const std::array<double, N>& fx, std::size_t i) {
    for (std::size_t n = 0; n < N; ++n) {
      k[n] += r.wk[i] * fx[n];
      gsum[n] += r.wg[i] * fx[n];
      l1[n] += r.wk[i] * std::abs(fx[n]);
    }
  };
  accumulate(f(c), 0);
  ++evals;
  for (std::size_t i = 1; i < 8; ++i) {
    const double dx = h * r.x[i];
    accumulate(f(c - dx), i);
    accumulate(f(c + dx), i);
    evals += 2;
  }
  for (std::size_t n = 0; n < N; ++n) {
    k[n] *= h;
    gsum[n] *= h;
    l1[n] *= std::abs(h);
    err[n] = std::abs(k[n] - gsum[n]);
  }
}

template <std::size_t N, class F>
void adapt_panel(F& f, double a, double b, int depth, const QuadratureOptions& opt,
                 std::array<CompensatedSum, N>& total, std::array<double, N>& total_err,
                 QuadratureResult<N>& res) {
  std::array<double, N> k{}, err{}, l1{};
  kronrod_panel<N>(f, a, b, k, err, l1, res.evaluations);
  bool ok = true;
  for (std::size_t n = 0; n < N; ++n)
    if (err[n] > std::max(opt.abs_tol, opt.rel_tol * l1[n])) ok = false;
  if (ok || depth >= opt.max_depth || res.evaluations >= opt.max_evaluations) {
    if (!ok) res.converged = false;
    for (std::size_t n = 0; n < N; ++n) {
      total[n] += k[n];
      total_err[n] += err[n];
    }
    ++res.panels;
    return;
  }
  const double m = 0.5 * (a + b);
  adapt_panel<N>(f, a, m, depth + 1, opt, total, total_err, res);
  adapt_panel<N>(f, m, b, depth + 1, opt, total, total_err, res);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature of a vector-valued integrand over
/// consecutive panels [breaks[i], breaks[i+1]]. Each panel is bisected until
/// every component meets rel_tol against its own L1 mass on that panel.
template <std::size_t N, class F>
QuadratureResult<N> integrate_panels(F&& f, std::span<const double> breaks,
                                     const QuadratureOptions& opt = {}) {
  QuadratureResult<N> res;
  std::array<CompensatedSum, N> total{};
  std::array<double, N> total_err{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    detail::adapt_panel<N>(f, breaks[i], breaks[i + 1], 0, opt, total, total_err, res);
  for (std::size_t n = 0; n < N; ++n) {
    res.value[n] = total[n].value();
    res.abs_error[n] = total_err[n];
  }
  return res;
}

/// Scalar convenience wrapper over integrate_panels.
template <class F>
QuadratureResult<1> integrate(F&& f, double a, double b, std::size_t n_panels = 1,
                              const QuadratureOptions& opt = {}) {
  std::vector<double> breaks(n_panels + 1);
  for (std::size_t i = 0; i <= n_panels; ++i)
    breaks[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n_panels);
  auto g = [&](double x) { return std::array<double, 1>{f(x)}; };
  return integrate_panels<1>(g, breaks, opt);
}

/// Panel breakpoints on [0, omega_max] for integrands of the form
/// smooth(omega) * trig(omega * oscillation). Width is capped at
/// pi / (4 * oscillation) and at a quarter of the local feature scale
/// (feature_scale + omega), which resolves Lorentzian envelopes near the origin.
inline std::vector<double> frequency_panels(double omega_max, double oscillation,
                                            double feature_scale) {
  if (!(omega_max > 0.0)) throw ValidationError("omega_max", "must be positive");
  const double osc_width = oscillation > 0.0 ? std::numbers::pi / (4.0 * oscillation)
                                             : std::numeric_limits<double>::infinity();
  std::vector<double> breaks{0.0};
  double w = 0.0;
  while (w < omega_max) {
    const double width = std::min(osc_width, 0.25 * (feature_scale + w));
    w = std::min(omega_max, w + width);
    breaks.push_back(w);
  }
  return breaks;
}

/// Trapezoid rule on an arbitrary ascending grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  CompensatedSum s;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return s.value();
}

/// Least-squares slope of y against x.
inline double linear_fit_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i)
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace qgle
