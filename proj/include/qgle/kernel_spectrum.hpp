#pragma once

// Exponential memory kernel, its Lorentzian (Drude) spectral density and the
// quantum noise correlation function built on the coth occupation factor.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "qgle/error.hpp"
#include "qgle/numerics.hpp"

namespace qgle {

/// Thermal bath state. Units default to hbar = kB = 1 (particle mass is 1).
struct ThermalState {
  double kBT = 0.0;
  double hbar = 1.0;
  double kB = 1.0;

  ThermalState() = default;
  explicit ThermalState(double kbt, double hbar_ = 1.0, double kb = 1.0)
      : kBT(kbt), hbar(hbar_), kB(kb) {
    validate();
  }

  void validate() const {
    if (!(kBT >= 0.0) || !std::isfinite(kBT)) throw ValidationError("kBT", "must be finite and >= 0");
    if (!(hbar > 0.0)) throw ValidationError("hbar", "must be positive");
    if (!(kB > 0.0)) throw ValidationError("kB", "must be positive");
  }

  bool vacuum() const noexcept { return kBT == 0.0; }
  double temperature() const noexcept { return kBT / kB; }

  /// Bose occupation 1/(exp(hbar w / kBT) - 1); zero in the vacuum.
  double bose(double omega) const {
    if (vacuum()) return 0.0;
    return 1.0 / std::expm1(hbar * omega / kBT);
  }

  /// hbar*w*coth(hbar*w / 2kBT), the FDR weight. Tends to hbar*w at kBT = 0
  /// and to 2kBT as w -> 0; the latter is removable and handled by series.
  double hw_coth(double omega) const {
    const double hw = hbar * std::abs(omega);
    if (vacuum()) return hw;
    const double x = hw / (2.0 * kBT);
    if (x < 1e-4) return 2.0 * kBT * (1.0 + x * x / 3.0 - x * x * x * x / 45.0);
    if (x > 40.0) return hw;
    return hw / std::tanh(x);
  }
};

/// Constants of the closed-form relaxation function.
struct DerivedKernelConstants {
  double amp_A;   // gamma0 / lambda
  double lambda;  // oscillation frequency of H(t)
  double alpha;   // phase, with A sin(alpha) = 1
};

/// Exponential memory kernel gamma(t) = (gamma0/tau_c) exp(-|t|/tau_c).
/// Only the underdamped-kernel regime 4 gamma0 tau_c > 1 is admitted.
class KernelParams {
public:
  KernelParams(double gamma0, double tau_c) : gamma0_(gamma0), tau_c_(tau_c) {
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw ValidationError("gamma0", "must be positive");
    if (!(tau_c > 0.0) || !std::isfinite(tau_c)) throw ValidationError("tau_c", "must be positive");
    if (!(4.0 * gamma0 * tau_c > 1.0))
      throw ValidationError("tau_c", "underdamped-kernel condition 4*gamma0*tau_c > 1 violated");
    const double lam = std::sqrt(gamma0 / tau_c - 1.0 / (4.0 * tau_c * tau_c));
    derived_ = {gamma0 / lam, lam, std::atan2(2.0 * lam * tau_c, 1.0 - 2.0 * gamma0 * tau_c)};
  }

  double gamma0() const noexcept { return gamma0_; }
  double tau_c() const noexcept { return tau_c_; }
  const DerivedKernelConstants& derived() const noexcept { return derived_; }
  double lambda() const noexcept { return derived_.lambda; }
  double amp() const noexcept { return derived_.amp_A; }
  double alpha() const noexcept { return derived_.alpha; }

  /// Decay rate of the relaxation envelope, 1/(2 tau_c).
  double decay() const noexcept { return 0.5 / tau_c_; }

private:
  double gamma0_;
  double tau_c_;
  DerivedKernelConstants derived_{};
};

inline double memory_kernel(const KernelParams& k, double t) {
  return k.gamma0() / k.tau_c() * std::exp(-std::abs(t) / k.tau_c());
}

/// kappa(w) rho(w) = (2/pi) gamma0 / (1 + w^2 tau_c^2).
inline double spectral_density(const KernelParams& k, double omega) {
  const double wt = omega * k.tau_c();
  return 2.0 / std::numbers::pi * k.gamma0() / (1.0 + wt * wt);
}

/// Half the spectral density times the FDR weight: the integrand of C(tau)
/// without the cosine.
inline double noise_spectrum(const KernelParams& k, const ThermalState& th, double omega) {
  return 0.5 * spectral_density(k, omega) * th.hw_coth(omega);
}

/// Cutoff for the thermal part of C(tau); the vacuum part is evaluated in closed form.
inline double default_correlation_cutoff(const KernelParams& k, const ThermalState& th = {}) {
  return std::max(100.0 / k.tau_c(), 40.0 * th.kBT / th.hbar);
}

struct CorrelationResult {
  double value;
  double abs_error;       // quadrature estimate of the thermal part
  double omega_max;
  double doubled_value;   // thermal part truncated at 2*omega_max instead
  double cutoff_change() const { return std::abs(doubled_value - value); }
};

namespace detail {

/// e^{-x} Ei(x) + e^{x} Ei(-x) for x > 0.
inline double ei_pair(double x) {
  if (x > 40.0) {
    // 2 sum_{odd k} k! / x^{k+1}
    double term = 1.0 / (x * x), s = 0.0;
    for (int k = 1; k < 30 && term > 1e-18 * s; k += 2) {
      s += term;
      term *= static_cast<double>((k + 1) * (k + 2)) / (x * x);
    }
    return 2.0 * s;
  }
  return std::exp(-x) * boost::math::expint(x) + std::exp(x) * boost::math::expint(-x);
}

/// (gamma0 hbar / pi) int_0^inf w cos(w tau) / (1 + w^2 tau_c^2) dw, tau != 0.
inline double vacuum_correlation(const KernelParams& k, const ThermalState& th, double tau) {
  const double tc = k.tau_c();
  return -0.5 * k.gamma0() * th.hbar / (std::numbers::pi * tc * tc) * ei_pair(std::abs(tau) / tc);
}

template <class Weight>
double spectrum_integral(const KernelParams& k, double tau, double omega_max, Weight&& weight, double* err) {
  const auto breaks = frequency_panels(omega_max, std::abs(tau), 1.0 / k.tau_c());
  auto f = [&](double w) { return std::array<double, 1>{0.5 * spectral_density(k, w) * weight(w) * std::cos(w * tau)}; };
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  const auto r = integrate_panels<1>(f, breaks, opt);
  if (err) *err = r.abs_error[0];
  return r.value[0];
}

/// Thermal excess hbar w coth - hbar w = 2 hbar w n(w); decays like exp(-hbar w / kBT).
inline double thermal_part(const KernelParams& k, const ThermalState& th, double tau, double omega_max, double* err) {
  if (th.vacuum()) {
    if (err) *err = 0.0;
    return 0.0;
  }
  auto excess = [&](double w) {
    const double hw = th.hbar * w;
    return hw > 1e-300 ? 2.0 * hw / std::expm1(hw / th.kBT) : 2.0 * th.kBT;
  };
  return spectrum_integral(k, tau, omega_max, excess, err);
}

}  // namespace detail

/// Quantum noise correlation C(tau) = 1/2 int_0^inf kappa rho hbar w coth(hbar w / 2kBT) cos(w tau) dw.
/// The zero-point part is done in closed form (exponential integrals); the thermal
/// excess is integrated up to omega_max and re-evaluated at 2*omega_max as a check.
/// C(0) diverges logarithmically through the zero-point part and is rejected.
inline CorrelationResult noise_correlation_checked(const KernelParams& k, const ThermalState& th,
                                                   double tau, double omega_max = 0.0) {
  th.validate();
  if (omega_max <= 0.0) omega_max = default_correlation_cutoff(k, th);
  if (tau == 0.0) throw NumericalError("noise_correlation: C(0) diverges (zero-point integrand ~ 1/omega)");
  CorrelationResult r{};
  r.omega_max = omega_max;
  const double vac = detail::vacuum_correlation(k, th, tau);
  r.value = vac + detail::thermal_part(k, th, tau, omega_max, &r.abs_error);
  r.doubled_value = vac + detail::thermal_part(k, th, tau, 2.0 * omega_max, nullptr);
  return r;
}

inline double noise_correlation(const KernelParams& k, const ThermalState& th, double tau,
                                double omega_max = 0.0) {
  th.validate();
  if (omega_max <= 0.0) omega_max = default_correlation_cutoff(k, th);
  if (tau == 0.0) throw NumericalError("noise_correlation: C(0) diverges (zero-point integrand ~ 1/omega)");
  return detail::vacuum_correlation(k, th, tau) + detail::thermal_part(k, th, tau, omega_max, nullptr);
}

/// C(tau) of a bath whose spectrum is cut off sharply at omega_max. Finite at
/// tau = 0; this is what a discretized bath on [0, omega_max] reproduces.
inline double noise_correlation_band_limited(const KernelParams& k, const ThermalState& th, double tau,
                                             double omega_max) {
  th.validate();
  if (!(omega_max > 0.0)) throw ValidationError("omega_max", "must be positive");
  return detail::spectrum_integral(k, tau, omega_max, [&](double w) { return th.hw_coth(w); }, nullptr);
}

/// High-temperature (classical) FDR: C(tau) = kBT gamma(tau).
inline double classical_correlation(const KernelParams& k, const ThermalState& th, double tau) {
  return th.kBT * memory_kernel(k, tau);
}

}  // namespace qgle
