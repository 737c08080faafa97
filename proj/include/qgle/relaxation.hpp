#pragma once

// Relaxation functions H(t) and h(t) = dH/dt of the exponential-kernel GLE,
// from the closed form and from an independent time-domain ODE.

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qgle/error.hpp"
#include "qgle/kernel_spectrum.hpp"

namespace qgle {

using cplx = std::complex<double>;

/// int_0^t exp(z s) ds, accurate for small |z t| and for z on the imaginary axis.
inline cplx exp_integral(cplx z, double t) {
  const double a = z.real(), b = z.imag();
  if (std::abs(z) * t < 1e-6) {
    const cplx zt = z * t;
    return t * (1.0 + zt / 2.0 + zt * zt / 6.0);
  }
  const double ea = std::exp(a * t);
  const double sh = std::sin(0.5 * b * t);
  const cplx num(std::expm1(a * t) * std::cos(b * t) - 2.0 * sh * sh, ea * std::sin(b * t));
  return num / z;
}

/// f(s) = constant + sum_k coef_k exp(rate_k s); real-valued by construction
/// (the two modes are complex conjugates).
struct ExpSum {
  struct Mode {
    cplx coef;
    cplx rate;
  };
  double constant = 0.0;
  std::array<Mode, 2> modes{};

  double operator()(double t) const {
    cplx acc = constant;
    for (const auto& m : modes) acc += m.coef * std::exp(m.rate * t);
    return acc.real();
  }

  /// int_0^t f(s) exp(i w s) ds in closed form.
  cplx fourier_partial(double omega, double t) const {
    const cplx iw(0.0, omega);
    cplx acc = constant * exp_integral(iw, t);
    for (const auto& m : modes) acc += m.coef * exp_integral(m.rate + iw, t);
    return acc;
  }

  /// int_0^t f(s) ds.
  double integral(double t) const { return fourier_partial(0.0, t).real(); }
};

/// Closed-form H(t) = (1/gamma0)[1 - A e^{-t/2tau_c} sin(lambda t + alpha)] and its derivatives.
class Relaxation {
public:
  explicit Relaxation(const KernelParams& k) : k_(k) {
    const double g0 = k.gamma0(), lam = k.lambda(), al = k.alpha(), amp = k.amp();
    const cplx p(-k.decay(), lam);
    const cplx eia = std::polar(1.0, al);
    // sin(theta) = (e^{i theta} - e^{-i theta}) / 2i
    H_.constant = 1.0 / g0;
    H_.modes[0] = {-amp / (2.0 * g0) / cplx(0.0, 1.0) * eia, p};
    H_.modes[1] = {std::conj(H_.modes[0].coef), std::conj(p)};
    // h = (A/g0) Re[B e^{i alpha} e^{p t}], B = -lambda - i/(2 tau_c)
    const cplx B(-lam, -k.decay());
    h_.constant = 0.0;
    h_.modes[0] = {amp / (2.0 * g0) * B * eia, p};
    h_.modes[1] = {std::conj(h_.modes[0].coef), std::conj(p)};

    const double h0 = h(0.0), H0 = H(0.0);
    if (std::abs(H0) > 1e-12 || std::abs(h0 - 1.0) > 1e-12)
      throw NumericalError("relaxation constants inconsistent: H(0)=" + std::to_string(H0) +
                           " h(0)=" + std::to_string(h0));
  }

  const KernelParams& kernel() const noexcept { return k_; }

  double H(double t) const {
    const double th = k_.lambda() * t + k_.alpha();
    return (1.0 - k_.amp() * std::exp(-k_.decay() * t) * std::sin(th)) / k_.gamma0();
  }

  double h(double t) const {
    const double th = k_.lambda() * t + k_.alpha();
    return k_.amp() / k_.gamma0() * std::exp(-k_.decay() * t) *
           (k_.decay() * std::sin(th) - k_.lambda() * std::cos(th));
  }

  double h_dot(double t) const {
    const double th = k_.lambda() * t + k_.alpha();
    const double lam = k_.lambda(), d = k_.decay();
    return k_.amp() / k_.gamma0() * std::exp(-d * t) *
           ((lam * lam - d * d) * std::sin(th) + 2.0 * d * lam * std::cos(th));
  }

  /// -h'(t)/h(t) with the common exponential factor cancelled, so it stays
  /// finite at large t where both factors underflow.
  double friction_ratio(double t) const {
    const double th = k_.lambda() * t + k_.alpha();
    const double lam = k_.lambda(), d = k_.decay();
    const double num = (lam * lam - d * d) * std::sin(th) + 2.0 * d * lam * std::cos(th);
    const double den = d * std::sin(th) - lam * std::cos(th);
    return -num / den;
  }

  /// |h(t)| relative to its oscillation envelope; small values flag zeros of h.
  double h_relative(double t) const {
    const double th = k_.lambda() * t + k_.alpha();
    const double lam = k_.lambda(), d = k_.decay();
    return std::abs(d * std::sin(th) - lam * std::cos(th)) / std::hypot(d, lam);
  }

  const ExpSum& H_modes() const noexcept { return H_; }
  const ExpSum& h_modes() const noexcept { return h_; }

private:
  KernelParams k_;
  ExpSum H_;
  ExpSum h_;
};

inline double H_analytic(const KernelParams& k, double t) { return Relaxation(k).H(t); }
inline double h_analytic(const KernelParams& k, double t) { return Relaxation(k).h(t); }

struct RelaxationTable {
  std::vector<double> t;
  std::vector<double> H;
  std::vector<double> h;
};

inline double default_oracle_step(const KernelParams& k) {
  return std::min(k.tau_c(), 1.0 / k.gamma0()) / 200.0;
}

/// Time-domain oracle: the Volterra equation h' = -int_0^t gamma(t-s) h(s) ds is
/// exact as the ODE system h' = -z, z' = (gamma0/tau_c) h - z/tau_c, H' = h,
/// integrated with classical RK4 at a fixed step that lands on every grid point.
inline RelaxationTable relaxation_ode_oracle(const KernelParams& k, std::span<const double> t_grid,
                                             double max_step = 0.0) {
  if (t_grid.empty()) return {};
  if (t_grid.front() != 0.0) throw ValidationError("t_grid", "must start at t = 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ValidationError("t_grid", "must be strictly ascending");
  if (max_step <= 0.0) max_step = default_oracle_step(k);
  if (max_step < 1e-12 * std::max(1.0, t_grid.back()))
    throw NumericalError("relaxation_ode_oracle: step size underflow");

  const double g_over_tau = k.gamma0() / k.tau_c();
  const double inv_tau = 1.0 / k.tau_c();
  using State = std::array<double, 3>;  // H, h, z
  auto rhs = [&](const State& s) -> State {
    return {s[1], -s[2], g_over_tau * s[1] - inv_tau * s[2]};
  };
  auto axpy = [](const State& s, double a, const State& d) -> State {
    return {s[0] + a * d[0], s[1] + a * d[1], s[2] + a * d[2]};
  };

  RelaxationTable out;
  out.t.assign(t_grid.begin(), t_grid.end());
  out.H.reserve(t_grid.size());
  out.h.reserve(t_grid.size());
  State s{0.0, 1.0, 0.0};
  out.H.push_back(s[0]);
  out.h.push_back(s[1]);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    const double span = t_grid[i] - t_grid[i - 1];
    const auto n = static_cast<std::size_t>(std::ceil(span / max_step));
    const double dt = span / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const State k1 = rhs(s);
      const State k2 = rhs(axpy(s, 0.5 * dt, k1));
      const State k3 = rhs(axpy(s, 0.5 * dt, k2));
      const State k4 = rhs(axpy(s, dt, k3));
      for (int c = 0; c < 3; ++c) s[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    out.H.push_back(s[0]);
    out.h.push_back(s[1]);
  }
  return out;
}

enum class RelaxationMode { analytic, ode_oracle };

/// Evaluates H and h on a grid by either route.
class RelaxationEvaluator {
public:
  RelaxationEvaluator(const KernelParams& k, RelaxationMode mode) : k_(k), mode_(mode) {}

  RelaxationMode mode() const noexcept { return mode_; }

  RelaxationTable evaluate(std::span<const double> t_grid) const {
    if (mode_ == RelaxationMode::ode_oracle) return relaxation_ode_oracle(k_, t_grid);
    const Relaxation rel(k_);
    RelaxationTable out;
    out.t.assign(t_grid.begin(), t_grid.end());
    for (double t : t_grid) {
      out.H.push_back(rel.H(t));
      out.h.push_back(rel.h(t));
    }
    return out;
  }

private:
  KernelParams k_;
  RelaxationMode mode_;
};

}  // namespace qgle
