#pragma once

// Overdamped limit: system quantum corrections from the second-order moment
// hierarchy, the overdamped quantum diffusion coefficient and a 1-D
// Smoluchowski solver in flux form.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qgle/error.hpp"
#include "qgle/kernel_spectrum.hpp"
#include "qgle/langevin_mc.hpp"
#include "qgle/numerics.hpp"
#include "qgle/potential.hpp"

namespace qgle {

/// Mean position/momentum and second moments of the quantum fluctuations.
struct CorrectionState {
  double x = 0.0;
  double p = 0.0;
  double dxx = 0.0;  // <dx^2>
  double dxp = 0.0;  // <dx dp + dp dx>
  double dpp = 0.0;  // <dp^2>

  /// dxx dpp - dxp^2/4, conserved by the hierarchy and >= hbar^2/4.
  double uncertainty() const noexcept { return dxx * dpp - 0.25 * dxp * dxp; }

  /// Minimum-uncertainty state of a harmonic well of frequency w.
  static CorrectionState coherent(double x, double p, double omega, double hbar = 1.0) {
    return {x, p, hbar / (2.0 * omega), 0.0, hbar * omega / 2.0};
  }
};

struct CorrectionSeries {
  std::vector<double> t;
  std::vector<CorrectionState> states;
  double max_uncertainty_drift = 0.0;  // max relative change of uncertainty()

  /// dxx at time t by linear interpolation; held constant outside the grid.
  double dxx_at(double time) const {
    if (t.empty()) return 0.0;
    if (time <= t.front()) return states.front().dxx;
    if (time >= t.back()) return states.back().dxx;
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double f = (time - t[i - 1]) / (t[i] - t[i - 1]);
    return (1.0 - f) * states[i - 1].dxx + f * states[i].dxx;
  }
};

struct CorrectionOptions {
  double step = 1e-3;
  double max_drift = 1e-6;  // abort threshold on relative uncertainty drift
  /// Evaluate V'' and V''' at this fixed point instead of at x(t) (local dynamics around a well bottom).
  std::optional<double> frozen_at;
};

/// RK4 integration of
///   x' = p,  p' = -V'(x) - V'''(x) dxx / 2,
///   dxx' = dxp,  dxp' = 2 dpp - 2 V''(x) dxx,  dpp' = -V''(x) dxp.
inline CorrectionSeries evolve_corrections(const PotentialSpec& pot, const CorrectionState& init,
                                           std::span<const double> t_grid, const CorrectionOptions& opt = {},
                                           double hbar = 1.0) {
  if (t_grid.empty()) return {};
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ValidationError("t_grid", "must be strictly ascending");
  if (init.dxx < 0.0 || init.dpp < 0.0) throw ValidationError("init", "second moments must be nonnegative");
  if (init.uncertainty() < 0.25 * hbar * hbar * (1.0 - 1e-12))
    throw ValidationError("init", "violates dxx*dpp - dxp^2/4 >= hbar^2/4");
  if (!(opt.step > 0.0)) throw ValidationError("step", "must be positive");

  using S = std::array<double, 5>;
  auto rhs = [&](const S& s) -> S {
    const double at = opt.frozen_at ? *opt.frozen_at : s[0];
    const double v2 = pot.d2(at), v3 = pot.d3(at);
    const double force = opt.frozen_at ? 0.0 : -pot.d1(s[0]) - 0.5 * v3 * s[2];
    return {s[1], force, s[3], 2.0 * s[4] - 2.0 * v2 * s[2], -v2 * s[3]};
  };
  auto axpy = [](const S& s, double a, const S& d) {
    S r;
    for (int i = 0; i < 5; ++i) r[i] = s[i] + a * d[i];
    return r;
  };

  CorrectionSeries out;
  S s{init.x, init.p, init.dxx, init.dxp, init.dpp};
  const double u0 = init.uncertainty();
  auto record = [&](double t) {
    const CorrectionState c{s[0], s[1], s[2], s[3], s[4]};
    out.t.push_back(t);
    out.states.push_back(c);
    const double drift = std::abs(c.uncertainty() - u0) / u0;
    out.max_uncertainty_drift = std::max(out.max_uncertainty_drift, drift);
    if (drift > opt.max_drift)
      throw NumericalError("evolve_corrections: uncertainty invariant drifted by " + std::to_string(drift) +
                           " at t=" + std::to_string(t) + " (x=" + std::to_string(c.x) +
                           ", dxx=" + std::to_string(c.dxx) + "); reduce the step");
  };
  record(t_grid[0]);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    const double span = t_grid[i] - t_grid[i - 1];
    const auto n = static_cast<std::size_t>(std::ceil(span / opt.step - 1e-9));
    const double h = span / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const S k1 = rhs(s);
      const S k2 = rhs(axpy(s, 0.5 * h, k1));
      const S k3 = rhs(axpy(s, 0.5 * h, k2));
      const S k4 = rhs(axpy(s, h, k3));
      for (int c = 0; c < 5; ++c) s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    record(t_grid[i]);
  }
  return out;
}

/// Q = -sum_{n>=2} V_{n+1}(X) <dx^n> / n!, with moments[0] = <dx^2>, moments[1] = <dx^3>, ...
inline double quantum_dispersion_Q(const PotentialSpec& pot, double X, std::span<const double> moments) {
  double q = 0.0, fact = 1.0;
  for (std::size_t i = 0; i < moments.size(); ++i) {
    const unsigned n = static_cast<unsigned>(i + 2);
    fact *= n;
    q -= pot.derivative(n + 1, X) * moments[i] / fact;
  }
  return q;
}

/// Leading order: Q = -V'''(x) dxx / 2.
inline double quantum_dispersion_Q(const PotentialSpec& pot, const CorrectionState& s) {
  const double m[1] = {s.dxx};
  return quantum_dispersion_Q(pot, s.x, m);
}

/// V_quant = V(X) + sum_{n>=2} V_n(X) <dx^n> / n!.
inline double effective_potential(const PotentialSpec& pot, double X, std::span<const double> moments) {
  double v = pot(X), fact = 1.0;
  for (std::size_t i = 0; i < moments.size(); ++i) {
    const unsigned n = static_cast<unsigned>(i + 2);
    fact *= n;
    v += pot.derivative(n, X) * moments[i] / fact;
  }
  return v;
}

/// V(X) + V''(X) dxx(t) / 2 with dxx from a correction series.
inline double effective_potential(const PotentialSpec& pot, const CorrectionSeries& series, double X, double t) {
  const double m[1] = {series.dxx_at(t)};
  return effective_potential(pot, X, m);
}

/// d V_quant / dX = V' - Q at second order.
inline double effective_force_gradient(const PotentialSpec& pot, double X, double dxx) {
  return pot.d1(X) + 0.5 * pot.d3(X) * dxx;
}

/// D_qo = hbar w (2 n(w) + 1) / (2 gamma0) = hbar w coth(hbar w / 2kBT) / (2 gamma0).
inline double overdamped_diffusion(const KernelParams& k, const ThermalState& th, double omega_tilde) {
  th.validate();
  if (!(omega_tilde > 0.0)) throw ValidationError("omega_tilde", "must be positive");
  return th.hw_coth(omega_tilde) / (2.0 * k.gamma0());
}

/// sqrt(V'') at the global minimum of V on [lo, hi].
inline double linearized_frequency(const PotentialSpec& pot, double lo = -10.0, double hi = 10.0) {
  return pot.linearized_frequency(lo, hi);
}

struct DensityField {
  double x0 = 0.0;  // first grid point
  double dx = 0.0;
  double t = 0.0;
  std::vector<double> p;

  std::size_t size() const noexcept { return p.size(); }
  double x(std::size_t i) const noexcept { return x0 + dx * static_cast<double>(i); }
  double mass() const {
    CompensatedSum s;
    for (double v : p) s += v * dx;
    return s.value();
  }
  double mean() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s += x(i) * p[i] * dx;
    return s.value() / mass();
  }
  double variance() const {
    const double m = mean();
    CompensatedSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (x(i) - m) * (x(i) - m) * p[i] * dx;
    return s.value() / mass();
  }
  double min_value() const { return *std::min_element(p.begin(), p.end()); }

  /// Cumulative distribution at the grid points (trapezoid).
  std::vector<double> cdf() const {
    std::vector<double> c(p.size(), 0.0);
    const double m = mass();
    for (std::size_t i = 1; i < p.size(); ++i) c[i] = c[i - 1] + 0.5 * dx * (p[i - 1] + p[i]) / m;
    return c;
  }

  static DensityField uniform_grid(double lo, double hi, std::size_t n) {
    if (n < 3 || !(hi > lo)) throw ValidationError("grid", "need n >= 3 and hi > lo");
    DensityField f;
    f.x0 = lo;
    f.dx = (hi - lo) / static_cast<double>(n - 1);
    f.p.assign(n, 0.0);
    return f;
  }

  /// Normalized Gaussian on [lo, hi].
  static DensityField gaussian(double lo, double hi, std::size_t n, double mean, double var) {
    auto f = uniform_grid(lo, hi, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = f.x(i) - mean;
      f.p[i] = std::exp(-0.5 * d * d / var);
    }
    f.normalize();
    return f;
  }

  void normalize() {
    const double m = mass();
    if (!(m > 0.0)) throw ValidationError("density", "zero mass");
    for (double& v : p) v /= m;
  }
};

/// exp(-U/(gamma0 D)) / Z on the grid of `like`.
inline DensityField boltzmann_density(const DensityField& like, const std::function<double(double)>& U,
                                      double gamma0, double D) {
  DensityField f = like;
  const double beta = 1.0 / (gamma0 * D);
  double umin = U(f.x(0));
  for (std::size_t i = 1; i < f.size(); ++i) umin = std::min(umin, U(f.x(i)));
  for (std::size_t i = 0; i < f.size(); ++i) f.p[i] = std::exp(-beta * (U(f.x(i)) - umin));
  f.normalize();
  return f;
}

struct SmoluchowskiOptions {
  double dt = 0.0;  // 0 picks 0.95 of the positivity limit
  std::size_t n_snapshots = 10;
  /// Time-dependent <dx^2>(t) for V_quant; null means classical V.
  const CorrectionSeries* corrections = nullptr;
  double mass_tol = 1e-9;
};

struct SmoluchowskiResult {
  std::vector<DensityField> snapshots;  // includes the initial and final fields
  double D = 0.0;
  double dt = 0.0;
  double max_mass_error = 0.0;
  double min_density = 0.0;
};

namespace detail {

/// B(z) = z / (e^z - 1), with B(0) = 1.
inline double bernoulli_fn(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
  if (z > 700.0) return z * std::exp(-z);
  return z / std::expm1(z);
}

/// Tridiagonal generator L of dp/dt = L p in Scharfetter-Gummel flux form with
/// zero-flux ends. Columns sum to zero, so mass is conserved exactly.
struct Generator {
  std::vector<double> lower, diag, upper;  // lower[i] = L(i, i-1), upper[i] = L(i, i+1)
};

inline Generator build_generator(const DensityField& f, const std::vector<double>& U, double gamma0, double D) {
  const std::size_t n = f.size();
  Generator g;
  g.lower.assign(n, 0.0);
  g.diag.assign(n, 0.0);
  g.upper.assign(n, 0.0);
  const double c = D / (f.dx * f.dx);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double w = (U[i + 1] - U[i]) / (gamma0 * D);
    const double bp = bernoulli_fn(w), bm = bernoulli_fn(-w);
    // flux J_{i+1/2} = (D/dx) [B(w) p_i - B(-w) p_{i+1}]
    g.diag[i] -= c * bp;
    g.upper[i] += c * bm;
    g.lower[i + 1] += c * bp;
    g.diag[i + 1] -= c * bm;
  }
  return g;
}

inline void thomas_solve(const std::vector<double>& a, std::vector<double> b, const std::vector<double>& c,
                         std::vector<double>& d) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

}  // namespace detail

/// Largest Crank-Nicolson step that keeps the explicit half nonnegative.
inline double positivity_step_limit(const DensityField& f, const PotentialSpec& pot, double gamma0, double D,
                                    double dxx = 0.0) {
  std::vector<double> U(f.size());
  const double m[1] = {dxx};
  for (std::size_t i = 0; i < f.size(); ++i) U[i] = effective_potential(pot, f.x(i), m);
  const auto g = detail::build_generator(f, U, gamma0, D);
  double mx = 0.0;
  for (double d : g.diag) mx = std::max(mx, std::abs(d));
  return 2.0 / mx;
}

/// Crank-Nicolson stepping of dp/dt = (1/gamma0) d/dX[V_quant' p] + D d^2p/dX^2.
inline SmoluchowskiResult solve_smoluchowski(const PotentialSpec& pot, const KernelParams& k, const ThermalState& th,
                                             double omega_tilde, const DensityField& init, double t_final,
                                             const SmoluchowskiOptions& opt = {}) {
  const double D = overdamped_diffusion(k, th, omega_tilde);
  const double g0 = k.gamma0();
  if (!(t_final >= 0.0)) throw ValidationError("t_final", "must be >= 0");
  if (std::abs(init.mass() - 1.0) > 1e-9) throw ValidationError("init", "density must be normalized");
  if (init.min_value() < 0.0) throw ValidationError("init", "density must be nonnegative");

  auto dxx_at = [&](double t) { return opt.corrections ? opt.corrections->dxx_at(t) : 0.0; };
  std::vector<double> U(init.size());
  auto fill_U = [&](double t) {
    const double m[1] = {dxx_at(t)};
    for (std::size_t i = 0; i < init.size(); ++i) U[i] = effective_potential(pot, init.x(i), m);
  };

  fill_U(0.0);
  auto gen = detail::build_generator(init, U, g0, D);
  double max_diag = 0.0;
  for (double d : gen.diag) max_diag = std::max(max_diag, std::abs(d));
  const double limit = 2.0 / max_diag;
  double dt = opt.dt > 0.0 ? opt.dt : 0.95 * limit;
  if (dt > limit)
    throw NumericalError("solve_smoluchowski: dt=" + std::to_string(dt) + " violates the positivity limit; use dt <= " +
                         std::to_string(limit));
  const auto n_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_final / dt)));
  dt = t_final > 0.0 ? t_final / static_cast<double>(n_steps) : 0.0;

  SmoluchowskiResult res;
  res.D = D;
  res.dt = dt;
  DensityField f = init;
  f.t = 0.0;
  res.snapshots.push_back(f);
  res.min_density = f.min_value();
  if (t_final == 0.0) return res;

  const bool time_dependent = opt.corrections != nullptr && opt.corrections->t.size() > 1;
  const std::size_t n = f.size();
  std::vector<double> a(n), b(n), c(n), rhs(n);
  auto assemble = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = -0.5 * dt * gen.lower[i];
      b[i] = 1.0 - 0.5 * dt * gen.diag[i];
      c[i] = -0.5 * dt * gen.upper[i];
    }
  };
  assemble();
  const std::size_t every = std::max<std::size_t>(1, n_steps / std::max<std::size_t>(1, opt.n_snapshots));
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double t_mid = (static_cast<double>(s) + 0.5) * dt;
    if (time_dependent) {
      fill_U(t_mid);
      gen = detail::build_generator(init, U, g0, D);
      double md = 0.0;
      for (double d : gen.diag) md = std::max(md, std::abs(d));
      if (dt > 2.0 / md)
        throw NumericalError("solve_smoluchowski: positivity limit tightened to " + std::to_string(2.0 / md) +
                             " at t=" + std::to_string(t_mid));
      assemble();
    }
    for (std::size_t i = 0; i < n; ++i) {
      double v = (1.0 + 0.5 * dt * gen.diag[i]) * f.p[i];
      if (i > 0) v += 0.5 * dt * gen.lower[i] * f.p[i - 1];
      if (i + 1 < n) v += 0.5 * dt * gen.upper[i] * f.p[i + 1];
      rhs[i] = v;
    }
    detail::thomas_solve(a, b, c, rhs);
    f.p.swap(rhs);
    f.t = static_cast<double>(s + 1) * dt;
    res.max_mass_error = std::max(res.max_mass_error, std::abs(f.mass() - 1.0));
    res.min_density = std::min(res.min_density, f.min_value());
    if (res.max_mass_error > opt.mass_tol)
      throw NumericalError("solve_smoluchowski: mass drifted by " + std::to_string(res.max_mass_error));
    if ((s + 1) % every == 0 || s + 1 == n_steps) res.snapshots.push_back(f);
  }
  if (res.snapshots.back().t != f.t) res.snapshots.push_back(f);
  return res;
}

/// Grid of n points spanning +-half_widths stationary widths of the linearized well.
inline DensityField default_grid(const KernelParams& k, const ThermalState& th, double omega_tilde,
                                 std::size_t n = 1024, double half_widths = 8.0, double center = 0.0) {
  const double D = overdamped_diffusion(k, th, omega_tilde);
  const double width = std::sqrt(k.gamma0() * D) / omega_tilde;
  return DensityField::uniform_grid(center - half_widths * width, center + half_widths * width, n);
}

/// Kolmogorov-Smirnov distance between samples and a density on a grid.
inline double ks_distance(std::vector<double> samples, const DensityField& f) {
  std::sort(samples.begin(), samples.end());
  const auto F = f.cdf();
  auto cdf_at = [&](double x) {
    if (x <= f.x(0)) return 0.0;
    if (x >= f.x(f.size() - 1)) return 1.0;
    const double u = (x - f.x0) / f.dx;
    const auto i = static_cast<std::size_t>(u);
    const double s = u - static_cast<double>(i);
    // exact integral of the linear interpolant over the partial cell
    const double pi = f.p[i], pj = f.p[i + 1];
    const double part = f.dx * (pi * s + 0.5 * (pj - pi) * s * s) / f.mass();
    return F[i] + part;
  };
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf_at(samples[i]);
    d = std::max({d, std::abs(c - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - c)});
  }
  return d;
}

struct OverdampedOptions {
  std::size_t n_traj = 100000;
  std::uint64_t seed = 42;
  double dt = 0.005;
  double X0 = 0.0;
  double dxx = 0.0;  // frozen <dx^2> in V_quant
};

struct OverdampedEnsemble {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> X;  // X[i][traj]
  double D = 0.0;

  Estimate variance(std::size_t i) const { return detail::variance_estimate(X[i]); }
  Estimate msd(std::size_t i, double X0) const {
    std::vector<double> d(X[i].size());
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = (X[i][r] - X0) * (X[i][r] - X0);
    return detail::mean_estimate(d);
  }
};

/// Euler-Maruyama for X' = -V_quant'(X)/gamma0 + sqrt(2 D_qo) eta(t), the
/// white-noise surrogate of the overdamped c-number equation.
inline OverdampedEnsemble overdamped_langevin_check(const PotentialSpec& pot, const KernelParams& k,
                                                    const ThermalState& th, double omega_tilde,
                                                    std::span<const double> t_grid, const OverdampedOptions& opt = {}) {
  if (t_grid.empty() || t_grid.front() != 0.0) throw ValidationError("t_grid", "must start at 0");
  if (!(opt.dt > 0.0)) throw ValidationError("dt", "must be positive");
  OverdampedEnsemble ens;
  ens.D = overdamped_diffusion(k, th, omega_tilde);
  ens.t_grid.assign(t_grid.begin(), t_grid.end());
  ens.X.assign(t_grid.size(), std::vector<double>(opt.n_traj));
  const double g0 = k.gamma0();
  const double amp = std::sqrt(2.0 * ens.D);
  const bool has_pot = !pot.is_free();
  for (std::size_t r = 0; r < opt.n_traj; ++r) {
    auto rng = stream_rng(opt.seed, r);
    std::normal_distribution<double> gauss;
    double X = opt.X0;
    ens.X[0][r] = X;
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      const double span = t_grid[i] - t_grid[i - 1];
      const auto n = static_cast<std::size_t>(std::ceil(span / opt.dt - 1e-9));
      const double h = span / static_cast<double>(n);
      const double sh = amp * std::sqrt(h);
      for (std::size_t s = 0; s < n; ++s) {
        const double drift = has_pot ? -effective_force_gradient(pot, X, opt.dxx) / g0 : 0.0;
        X += drift * h + sh * gauss(rng);
      }
      if (!std::isfinite(X)) throw NumericalError("overdamped_langevin_check: trajectory diverged; reduce dt");
      ens.X[i][r] = X;
    }
  }
  return ens;
}

}  // namespace qgle
