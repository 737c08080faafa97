#pragma once

// Fokker-Planck coefficients, Gaussian phase-space density and the
// configuration-space quantum diffusion coefficient D_q(t).

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qgle/error.hpp"
#include "qgle/kernel_spectrum.hpp"
#include "qgle/relaxation.hpp"
#include "qgle/variances.hpp"

namespace qgle {

struct FpeCoefficients {
  double t = 0.0;
  double xi = 0.0;   // -h'/h
  double phi = 0.0;  // xi svv + svv'/2
  double psi = 0.0;  // -svv + xi sxv + sxv'
  bool singular = false;  // h(t) is within the zero window, xi is not meaningful
};

/// |h| below this fraction of its envelope marks a coefficient singularity.
inline constexpr double kSingularWindow = 1e-9;

inline FpeCoefficients fpe_from_sample(const Relaxation& rel, const VarianceSample& s) {
  FpeCoefficients c;
  c.t = s.t;
  c.singular = rel.h_relative(s.t) < kSingularWindow;
  c.xi = rel.friction_ratio(s.t);
  c.phi = c.xi * s.svv + 0.5 * s.dsvv_dt;
  c.psi = -s.svv + c.xi * s.sxv + s.dsxv_dt;
  return c;
}

/// Coefficients at time t. Near zeros of h the values are returned with
/// `singular` set instead of being regularized.
inline FpeCoefficients fpe_coefficients(const KernelParams& k, const ThermalState& th, double t,
                                        const VarianceOptions& opt = {}) {
  const Relaxation rel(k);
  return fpe_from_sample(rel, variances_frequency_oracle(k, th, t, opt));
}

struct Delta0Result {
  double value = 0.0;
  std::vector<double> t_inf;    // evaluation times
  std::vector<double> iterates;  // phi/xi at each of them
  FpeCoefficients coefficients;  // at the last evaluation time
};

struct Delta0Options {
  double t_start = 0.0;  // 0 selects 20 / min(gamma0, 1/tau_c)
  double tol = 1e-3;     // successive relative change
  int max_doublings = 4;
  VarianceOptions variance;
};

/// Delta0 = phi(inf)/xi(inf), from phi/xi at t_start, 2 t_start, 4 t_start, ...
/// until two successive values agree to `tol`.
inline Delta0Result delta0(const KernelParams& k, const ThermalState& th, const Delta0Options& opt = {}) {
  const Relaxation rel(k);
  Delta0Result out;
  double t = opt.t_start > 0.0 ? opt.t_start : 20.0 / std::min(k.gamma0(), 1.0 / k.tau_c());
  for (int i = 0; i <= opt.max_doublings + 1; ++i, t *= 2.0) {
    const auto c = fpe_from_sample(rel, variances_frequency_oracle(k, th, t, opt.variance));
    if (c.singular) throw NumericalError("delta0: h(t) vanishes at t_inf=" + std::to_string(t));
    out.t_inf.push_back(t);
    out.iterates.push_back(c.phi / c.xi);
    out.coefficients = c;
    const std::size_t n = out.iterates.size();
    if (n >= 2) {
      const double a = out.iterates[n - 2], b = out.iterates[n - 1];
      if (std::abs(b - a) <= opt.tol * std::abs(b)) {
        out.value = b;
        return out;
      }
    }
  }
  const std::size_t n = out.iterates.size();
  throw NumericalError("delta0: not converged; last iterates " + std::to_string(out.iterates[n - 2]) +
                       " (t=" + std::to_string(out.t_inf[n - 2]) + ") and " +
                       std::to_string(out.iterates[n - 1]) + " (t=" + std::to_string(out.t_inf[n - 1]) + ")");
}

inline double delta0_value(const KernelParams& k, const ThermalState& th, const Delta0Options& opt = {}) {
  return delta0(k, th, opt).value;
}

struct GaussianPhaseState {
  double meanX = 0.0, meanV = 0.0;
  double sxx = 0.0, svv = 0.0, sxv = 0.0;

  double det() const noexcept { return sxx * svv - sxv * sxv; }
};

/// State for fixed initial mean values X0, V0.
inline GaussianPhaseState phase_state(const Relaxation& rel, const VarianceSample& s, double X0, double V0) {
  return {X0 + V0 * rel.H(s.t), V0 * rel.h(s.t), s.sxx, s.svv, s.sxv};
}

/// State after averaging V0 over the Gaussian of width Delta0.
inline GaussianPhaseState phase_state_averaged(const Relaxation& rel, const VarianceSample& s, double X0,
                                               double d0) {
  const double H = rel.H(s.t), h = rel.h(s.t);
  return {X0, 0.0, s.sxx + d0 * H * H, s.svv + d0 * h * h, s.sxv + d0 * H * h};
}

/// Bivariate Gaussian density.
inline double joint_density(const GaussianPhaseState& st, double X, double V) {
  const double det = st.det();
  if (!(det > 0.0) || !(st.sxx > 0.0) || !(st.svv > 0.0))
    throw ValidationError("covariance", "degenerate (det = " + std::to_string(det) + ")");
  const double dx = X - st.meanX, dv = V - st.meanV;
  const double q = (st.svv * dx * dx - 2.0 * st.sxv * dx * dv + st.sxx * dv * dv) / det;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

/// D_q(t) = sxv + Delta0 H h.
inline double quantum_diffusion_coefficient(const Relaxation& rel, const VarianceSample& s, double d0) {
  return s.sxv + d0 * rel.H(s.t) * rel.h(s.t);
}

inline double quantum_diffusion_coefficient(const KernelParams& k, const ThermalState& th, double t, double d0,
                                            const VarianceOptions& opt = {}) {
  return quantum_diffusion_coefficient(Relaxation(k), variances_frequency_oracle(k, th, t, opt), d0);
}

/// Variance of the configuration-space density: sxx + Delta0 H^2.
inline double marginal_variance(const Relaxation& rel, const VarianceSample& s, double d0) {
  const double H = rel.H(s.t);
  return s.sxx + d0 * H * H;
}

inline constexpr double kVarianceFloor = 1e-14;

/// p(X, t) for an initial mean position X0 and Gaussian initial velocities.
inline double marginal_density(double X0, double variance, double X) {
  if (!(variance >= kVarianceFloor))
    throw NumericalError("marginal_density: variance " + std::to_string(variance) +
                         " below floor (t = 0 is a delta function)");
  const double d = X - X0;
  return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

inline double marginal_density(const KernelParams& k, const ThermalState& th, double X0, double t, double X,
                               double d0, const VarianceOptions& opt = {}) {
  const Relaxation rel(k);
  return marginal_density(X0, marginal_variance(rel, variances_frequency_oracle(k, th, t, opt), d0), X);
}

/// Velocity-space flux xi V Phi + phi dPhi/dV of the stationary Gaussian of
/// width d0; zero when d0 = phi/xi.
inline double stationary_flux(const FpeCoefficients& c, double d0, double V) {
  const double Phi = std::exp(-0.5 * V * V / d0) / std::sqrt(2.0 * std::numbers::pi * d0);
  const double dPhi = -V / d0 * Phi;
  return c.xi * V * Phi + c.phi * dPhi;
}

struct DiffusionRow {
  double t, H, h, sxx, svv, sxv, D_q, marginal_var;
  FpeCoefficients fpe;
};

/// Tabulates D_q and the FPE coefficients on a grid.
inline std::vector<DiffusionRow> diffusion_table(const KernelParams& k, const ThermalState& th,
                                                 std::span<const double> t_grid, double d0,
                                                 const VarianceOptions& opt = {}) {
  const Relaxation rel(k);
  std::vector<DiffusionRow> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto s = variances_frequency_oracle(k, th, t, opt);
    rows.push_back({t, rel.H(t), rel.h(t), s.sxx, s.svv, s.sxv, quantum_diffusion_coefficient(rel, s, d0),
                    marginal_variance(rel, s, d0), fpe_from_sample(rel, s)});
  }
  return rows;
}

}  // namespace qgle
