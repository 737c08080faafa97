#pragma once

// Monte Carlo realization of the c-number noise from a discretized bath of
// oscillators with Gaussian-distributed initial mean values, and an ensemble
// integrator for the GLE with exponential memory.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qgle/error.hpp"
#include "qgle/kernel_spectrum.hpp"
#include "qgle/numerics.hpp"
#include "qgle/potential.hpp"

namespace qgle {

struct DiscreteBath {
  std::vector<double> omegas;
  std::vector<double> kappas;  // spectral weight kappa(w) rho(w) dw of each mode
  double domega = 0.0;
  double omega_max = 0.0;
  double reconstruction_error = 0.0;  // max |sum kappa cos - band-limited gamma| / gamma(0) on [0, 5 tau_c]

  std::size_t n_modes() const noexcept { return omegas.size(); }
  /// Half the recurrence time 2 pi / dw; trajectories must stay below it.
  double max_time() const noexcept { return std::numbers::pi / domega; }

  double kernel(double t) const {
    CompensatedSum s;
    for (std::size_t j = 0; j < omegas.size(); ++j) s += kappas[j] * std::cos(omegas[j] * t);
    return s.value();
  }

  /// Discrete FDR sum (1/2) sum_j kappa_j hbar w_j coth(hbar w_j / 2kBT) cos(w_j tau).
  double noise_correlation(const ThermalState& th, double tau) const {
    CompensatedSum s;
    for (std::size_t j = 0; j < omegas.size(); ++j)
      s += 0.5 * kappas[j] * th.hw_coth(omegas[j]) * std::cos(omegas[j] * tau);
    return s.value();
  }
};

inline constexpr double kBathReconstructionTol = 0.01;

namespace detail {

inline DiscreteBath midpoint_bath(const KernelParams& k, std::size_t n, double omega_max) {
  DiscreteBath b;
  b.omega_max = omega_max;
  b.domega = omega_max / static_cast<double>(n);
  b.omegas.resize(n);
  b.kappas.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    b.omegas[j] = (static_cast<double>(j) + 0.5) * b.domega;
    b.kappas[j] = spectral_density(k, b.omegas[j]) * b.domega;
  }
  return b;
}

/// int_0^omega_max kappa rho cos(w t) dw: the kernel a bath cut at omega_max can represent.
inline double band_limited_kernel(const KernelParams& k, double omega_max, double t) {
  const auto breaks = frequency_panels(omega_max, std::abs(t), 1.0 / k.tau_c());
  auto f = [&](double w) { return std::array<double, 1>{spectral_density(k, w) * std::cos(w * t)}; };
  return integrate_panels<1>(f, breaks).value[0];
}

inline double reconstruction_error(const KernelParams& k, const DiscreteBath& b) {
  const double g0 = memory_kernel(k, 0.0);
  double err = 0.0;
  for (double t : linspace(0.0, 5.0 * k.tau_c(), 51))
    err = std::max(err, std::abs(b.kernel(t) - band_limited_kernel(k, b.omega_max, t)) / g0);
  return err;
}

}  // namespace detail

/// Midpoint discretization w_j = (j - 1/2) dw, kappa_j = kappa rho(w_j) dw.
/// Fails when the kernel is not reconstructed to 1% on [0, 5 tau_c].
inline DiscreteBath discretize_bath(const KernelParams& k, std::size_t n_modes, double omega_max) {
  if (n_modes < 2) throw ValidationError("n_modes", "must be >= 2");
  if (!(omega_max > 0.0)) throw ValidationError("omega_max", "must be positive");
  DiscreteBath b = detail::midpoint_bath(k, n_modes, omega_max);
  b.reconstruction_error = detail::reconstruction_error(k, b);
  if (b.reconstruction_error > kBathReconstructionTol) {
    std::size_t n = n_modes;
    for (int i = 0; i < 12; ++i) {
      n *= 2;
      if (detail::reconstruction_error(k, detail::midpoint_bath(k, n, omega_max)) <= kBathReconstructionTol) break;
    }
    throw NumericalError("discretize_bath: kernel reconstruction error " + std::to_string(b.reconstruction_error) +
                         " exceeds 1% with n_modes=" + std::to_string(n_modes) + "; try n_modes=" +
                         std::to_string(n));
  }
  return b;
}

/// Independent generator for trajectory `index` of a run seeded with `seed`.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Initial mean momenta and shifted coordinates of the bath oscillators.
struct BathRealization {
  std::vector<double> p0;
  std::vector<double> q0_shifted;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Draws p_j ~ N(0, hbar w_j (n_j + 1/2)) and q_j ~ N(0, hbar (n_j + 1/2) / w_j).
inline BathRealization sample_realization(const DiscreteBath& b, const ThermalState& th, std::uint64_t seed,
                                          std::uint64_t index = 0) {
  th.validate();
  auto rng = stream_rng(seed, index);
  std::normal_distribution<double> gauss;
  BathRealization r;
  r.seed = seed;
  r.index = index;
  r.p0.resize(b.n_modes());
  r.q0_shifted.resize(b.n_modes());
  for (std::size_t j = 0; j < b.n_modes(); ++j) {
    const double w = b.omegas[j];
    const double occ = th.hbar * (th.bose(w) + 0.5);
    r.p0[j] = std::sqrt(occ * w) * gauss(rng);
    r.q0_shifted[j] = std::sqrt(occ / w) * gauss(rng);
  }
  return r;
}

/// F(t) = Re sum_j Z_j e^{i w_j t} with Z_j = sqrt(kappa_j) (w_j q_j - i p_j), i.e.
/// sum_j sqrt(kappa_j) [w_j q_j cos(w_j t) + p_j sin(w_j t)]. Each mode carries
/// the spectral weight kappa_j, so <F(t)F(t')> reproduces the discrete FDR sum.
/// Advanced by rotating the phasors, stored as separate real/imaginary arrays.
class NoiseSynthesizer {
public:
  NoiseSynthesizer(const DiscreteBath& b, const BathRealization& r) : b_(&b) {
    const std::size_t n = b.n_modes();
    re_.resize(n);
    im_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::sqrt(b.kappas[j]);
      re_[j] = a * b.omegas[j] * r.q0_shifted[j];
      im_[j] = -a * r.p0[j];
    }
  }

  double value() const {
    double s = 0.0;
    for (double x : re_) s += x;
    return s;
  }

  /// Advances by dt and returns F at the new time.
  double advance(double dt) {
    if (dt != cached_dt_) {
      const std::size_t n = re_.size();
      cr_.resize(n);
      ci_.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        cr_[j] = std::cos(b_->omegas[j] * dt);
        ci_[j] = std::sin(b_->omegas[j] * dt);
      }
      cached_dt_ = dt;
    }
    double s = 0.0;
    double* __restrict re = re_.data();
    double* __restrict im = im_.data();
    const double* __restrict cr = cr_.data();
    const double* __restrict ci = ci_.data();
    const std::size_t n = re_.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double r = re[j] * cr[j] - im[j] * ci[j];
      im[j] = re[j] * ci[j] + im[j] * cr[j];
      re[j] = r;
      s += r;
    }
    return s;
  }

private:
  const DiscreteBath* b_;
  std::vector<double> re_, im_, cr_, ci_;
  double cached_dt_ = -1.0;
};

/// One noise realization on an ascending grid starting at t = 0.
inline std::vector<double> sample_noise(const DiscreteBath& b, const ThermalState& th,
                                        std::span<const double> t_grid, std::uint64_t seed,
                                        std::uint64_t index = 0) {
  if (t_grid.empty()) return {};
  if (t_grid.front() != 0.0) throw ValidationError("t_grid", "must start at 0");
  if (t_grid.back() >= b.max_time())
    throw ValidationError("t_grid", "extends past the bath recurrence horizon pi/dw = " + std::to_string(b.max_time()));
  NoiseSynthesizer syn(b, sample_realization(b, th, seed, index));
  std::vector<double> F{syn.value()};
  for (std::size_t i = 1; i < t_grid.size(); ++i) F.push_back(syn.advance(t_grid[i] - t_grid[i - 1]));
  return F;
}

/// Sample mean with its standard error.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double z(double reference) const { return stderr_ > 0.0 ? (value - reference) / stderr_ : 0.0; }
};

namespace detail {

inline Estimate mean_estimate(std::span<const double> x) {
  CompensatedSum s;
  for (double v : x) s += v;
  const double n = static_cast<double>(x.size());
  const double m = s.value() / n;
  CompensatedSum q;
  for (double v : x) q += (v - m) * (v - m);
  return {m, std::sqrt(q.value() / (n - 1.0) / n)};
}

/// Variance about the sample mean, with the large-sample standard error
/// sqrt((m4 - s^4)/n).
inline Estimate variance_estimate(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  CompensatedSum s;
  for (double v : x) s += v;
  const double m = s.value() / n;
  CompensatedSum s2, s4;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    s2 += d;
    s4 += d * d;
  }
  const double var = s2.value() / (n - 1.0);
  const double m4 = s4.value() / n;
  return {var, std::sqrt(std::max(0.0, m4 - var * var) / n)};
}

}  // namespace detail

struct NoiseAutocorrelation {
  std::vector<double> lags;
  std::vector<Estimate> mean;      // <F(lag)>
  std::vector<Estimate> autocorr;  // <F(0) F(lag)>
  std::vector<double> expected;    // discrete FDR sum
};

/// Ensemble estimate of <F(0)F(tau)> over independent bath realizations.
inline NoiseAutocorrelation noise_autocorrelation(const DiscreteBath& b, const ThermalState& th,
                                                  std::span<const double> lags, std::size_t n_real,
                                                  std::uint64_t seed) {
  if (n_real < 2) throw ValidationError("n_real", "must be >= 2");
  NoiseAutocorrelation out;
  out.lags.assign(lags.begin(), lags.end());
  const std::size_t L = lags.size();
  std::vector<std::vector<double>> prod(L, std::vector<double>(n_real));
  std::vector<std::vector<double>> val(L, std::vector<double>(n_real));
  std::vector<double> grid{0.0};
  grid.insert(grid.end(), lags.begin(), lags.end());
  if (grid.size() > 1 && grid[1] == 0.0) grid.erase(grid.begin());
  const std::size_t offset = grid.size() - L;
  for (std::size_t r = 0; r < n_real; ++r) {
    const auto F = sample_noise(b, th, grid, seed, r);
    for (std::size_t l = 0; l < L; ++l) {
      val[l][r] = F[l + offset];
      prod[l][r] = F[0] * F[l + offset];
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    out.mean.push_back(detail::mean_estimate(val[l]));
    out.autocorr.push_back(detail::mean_estimate(prod[l]));
    out.expected.push_back(b.noise_correlation(th, lags[l]));
  }
  return out;
}

/// How the initial mean velocity of each trajectory is chosen.
struct InitialConditions {
  double X0 = 0.0;
  double V0 = 0.0;
  double V0_variance = 0.0;  // > 0 draws V0 ~ N(V0, V0_variance) per trajectory
};

struct GleOptions {
  std::size_t n_traj = 1000;
  std::uint64_t seed = 42;
  double dt = 0.0;      // 0 selects min(tau_c, 1/gamma0, 2 pi/omega_max)/20
  bool noise = true;    // false integrates the noiseless equation
  /// Quantum dispersion force Q(X, t); empty means Q = 0.
  std::function<double(double, double)> quantum_force;
};

struct TrajectoryEnsemble {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> X;  // X[i][traj] at t_grid[i]
  std::vector<std::vector<double>> V;
  std::vector<double> V0;              // initial velocity of each trajectory
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;

  Estimate mean_X(std::size_t i) const { return detail::mean_estimate(X[i]); }
  Estimate mean_V(std::size_t i) const { return detail::mean_estimate(V[i]); }
  Estimate var_X(std::size_t i) const { return detail::variance_estimate(X[i]); }
  Estimate var_V(std::size_t i) const { return detail::variance_estimate(V[i]); }

  /// <V0 V(t)> / <V0^2>, with the standard error of the numerator propagated.
  Estimate velocity_memory(std::size_t i) const {
    std::vector<double> p(n_traj), q(n_traj);
    for (std::size_t r = 0; r < n_traj; ++r) {
      p[r] = V0[r] * V[i][r];
      q[r] = V0[r] * V0[r];
    }
    const auto num = detail::mean_estimate(p);
    const auto den = detail::mean_estimate(q);
    return {num.value / den.value, num.stderr_ / den.value};
  }
};

inline double default_gle_step(const KernelParams& k, const DiscreteBath& b) {
  return std::min({k.tau_c(), 1.0 / k.gamma0(), 2.0 * std::numbers::pi / b.omega_max}) / 20.0;
}

/// Integrates X'' + int_0^t gamma(t-s) X'(s) ds + V'(X) = F(t) + Q(X, t).
/// The memory force is -y with y' = (gamma0/tau_c) V - y/tau_c, updated by its
/// exact exponential solution over each step (velocity held at its half-step
/// value); position and velocity follow velocity Verlet.
inline TrajectoryEnsemble integrate_gle(const KernelParams& k, const DiscreteBath& b, const ThermalState& th,
                                        const PotentialSpec& pot, const InitialConditions& init,
                                        std::span<const double> t_grid, const GleOptions& opt = {}) {
  th.validate();
  if (t_grid.empty() || t_grid.front() != 0.0) throw ValidationError("t_grid", "must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ValidationError("t_grid", "must be strictly ascending");
  if (opt.noise && t_grid.back() >= b.max_time())
    throw ValidationError("t_grid", "extends past the bath recurrence horizon pi/dw = " + std::to_string(b.max_time()));
  if (opt.n_traj < 1) throw ValidationError("n_traj", "must be >= 1");
  const double dt_max = opt.dt > 0.0 ? opt.dt : default_gle_step(k, b);
  if (!(dt_max > 0.0) || dt_max < 1e-12 * t_grid.back()) throw NumericalError("integrate_gle: step size underflow");

  TrajectoryEnsemble ens;
  ens.t_grid.assign(t_grid.begin(), t_grid.end());
  ens.n_traj = opt.n_traj;
  ens.seed = opt.seed;
  ens.dt = dt_max;
  ens.X.assign(t_grid.size(), std::vector<double>(opt.n_traj));
  ens.V.assign(t_grid.size(), std::vector<double>(opt.n_traj));
  ens.V0.resize(opt.n_traj);

  const double g0 = k.gamma0(), tc = k.tau_c();
  const bool has_q = static_cast<bool>(opt.quantum_force);
  const bool has_pot = !pot.is_free();
  auto force = [&](double x, double t) {
    double f = has_pot ? -pot.d1(x) : 0.0;
    if (has_q) f += opt.quantum_force(x, t);
    return f;
  };

  for (std::size_t r = 0; r < opt.n_traj; ++r) {
    double V = init.V0;
    if (init.V0_variance > 0.0) {
      // A separate stream from the bath draws of the same trajectory.
      auto rng = stream_rng(opt.seed ^ 0x9e3779b97f4a7c15ULL, r);
      V += std::sqrt(init.V0_variance) * std::normal_distribution<double>()(rng);
    }
    ens.V0[r] = V;
    double X = init.X0, y = 0.0, t = 0.0;
    std::optional<NoiseSynthesizer> syn;
    if (opt.noise) syn.emplace(b, sample_realization(b, th, opt.seed, r));
    double F = opt.noise ? syn->value() : 0.0;
    double a = F - y + force(X, t);
    ens.X[0][r] = X;
    ens.V[0][r] = V;
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      const double span = t_grid[i] - t_grid[i - 1];
      const auto n = static_cast<std::size_t>(std::ceil(span / dt_max - 1e-9));
      const double dt = span / static_cast<double>(n);
      const double decay = std::exp(-dt / tc);
      for (std::size_t s = 0; s < n; ++s) {
        const double Vh = V + 0.5 * dt * a;
        X += dt * Vh;
        y = y * decay + g0 * Vh * (1.0 - decay);
        t += dt;
        F = opt.noise ? syn->advance(dt) : 0.0;
        a = F - y + force(X, t);
        V = Vh + 0.5 * dt * a;
      }
      if (!std::isfinite(X) || !std::isfinite(V))
        throw NumericalError("integrate_gle: trajectory diverged at t=" + std::to_string(t) + "; reduce dt");
      ens.X[i][r] = X;
      ens.V[i][r] = V;
    }
  }
  return ens;
}

}  // namespace qgle
