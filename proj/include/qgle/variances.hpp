#pragma once

// Variances of the quantum mean values X(t), V(t) around their conditional
// means, at arbitrary temperature.
//
// Primary path: exchange the time and frequency integrals. For each omega the
// inner integrals G_H = int_0^t H(s) e^{i w s} ds and G_h likewise are closed
// form, so sigma_XX = int S(w)|G_H|^2 dw with S = (1/2) kappa rho hbar w coth.
//
// Fast path: the appendix closed forms F_X (eleven terms) and F_V (seven
// terms), with toggles for the transcription variants that were checked.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qgle/error.hpp"
#include "qgle/kernel_spectrum.hpp"
#include "qgle/numerics.hpp"
#include "qgle/relaxation.hpp"

namespace qgle {

/// Default frequency cutoff for variance quadratures.
inline double default_variance_cutoff(const KernelParams& k, const ThermalState& th) {
  return 200.0 * std::max({1.0 / k.tau_c(), k.gamma0(), th.kBT / th.hbar});
}

struct VarianceSample {
  double t = 0.0;
  double sxx = 0.0, svv = 0.0, sxv = 0.0;
  double dsxx_dt = 0.0, dsvv_dt = 0.0, dsxv_dt = 0.0;
  double rel_error = 0.0;  // largest quadrature error estimate over sxx, svv, sxv
  double omega_max = 0.0;
};

struct VarianceSeries {
  std::vector<double> t_grid;
  std::vector<double> sxx, svv, sxv;
  std::vector<double> dsxx_dt, dsvv_dt, dsxv_dt;
  double omega_max = 0.0;

  std::size_t size() const noexcept { return t_grid.size(); }
  void push(const VarianceSample& s) {
    t_grid.push_back(s.t);
    sxx.push_back(s.sxx);
    svv.push_back(s.svv);
    sxv.push_back(s.sxv);
    dsxx_dt.push_back(s.dsxx_dt);
    dsvv_dt.push_back(s.dsvv_dt);
    dsxv_dt.push_back(s.dsxv_dt);
  }
};

struct VarianceOptions {
  double omega_max = 0.0;  // 0 selects default_variance_cutoff
  double rel_tol = 1e-10;
  double max_rel_error = 1e-6;  // reported as a NumericalError beyond this
};

namespace detail {

inline void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("t", "must be finite and >= 0");
}

inline void check_quadrature(const char* what, double rel_error, double limit, double t) {
  if (rel_error > limit)
    throw NumericalError(std::string(what) + ": quadrature did not converge at t=" + std::to_string(t) +
                         " (estimated relative error " + std::to_string(rel_error) + ")");
}

}  // namespace detail

/// Variances and their time derivatives from the frequency-domain form.
/// Derivatives use dG/dt = f(t) e^{i w t}, so no finite differences are involved.
inline VarianceSample variances_frequency_oracle(const KernelParams& k, const ThermalState& th,
                                                 double t, const VarianceOptions& opt = {}) {
  th.validate();
  detail::check_time(t);
  VarianceSample out;
  out.t = t;
  out.omega_max = opt.omega_max > 0.0 ? opt.omega_max : default_variance_cutoff(k, th);
  if (t == 0.0) return out;

  const Relaxation rel(k);
  const double Ht = rel.H(t), ht = rel.h(t);
  auto f = [&](double w) {
    const double S = noise_spectrum(k, th, w);
    const cplx gH = rel.H_modes().fourier_partial(w, t);
    const cplx gh = rel.h_modes().fourier_partial(w, t);
    const cplx ph = std::polar(1.0, w * t);
    const cplx dH = Ht * ph, dh = ht * ph;
    return std::array<double, 6>{
        S * std::norm(gH),
        S * std::norm(gh),
        S * (gH * std::conj(gh)).real(),
        2.0 * S * (dH * std::conj(gH)).real(),
        2.0 * S * (dh * std::conj(gh)).real(),
        S * (dH * std::conj(gh) + gH * std::conj(dh)).real(),
    };
  };
  const auto breaks = frequency_panels(out.omega_max, t, 1.0 / k.tau_c());
  QuadratureOptions qo;
  qo.rel_tol = opt.rel_tol;
  const auto r = integrate_panels<6>(f, breaks, qo);
  out.sxx = r.value[0];
  out.svv = r.value[1];
  out.sxv = r.value[2];
  out.dsxx_dt = r.value[3];
  out.dsvv_dt = r.value[4];
  out.dsxv_dt = r.value[5];
  // Convergence is judged on the variances themselves; the derivatives pass
  // through zero at late times, where a relative error is meaningless.
  const double scale_xv = std::sqrt(std::abs(out.sxx * out.svv));
  out.rel_error = std::max({r.abs_error[0] / std::max(std::abs(out.sxx), 1e-300),
                            r.abs_error[1] / std::max(std::abs(out.svv), 1e-300),
                            r.abs_error[2] / std::max(scale_xv, 1e-300)});
  detail::check_quadrature("variances_frequency_oracle", out.rel_error, opt.max_rel_error, t);
  return out;
}

inline VarianceSeries variance_series(const KernelParams& k, const ThermalState& th,
                                      std::span<const double> t_grid, const VarianceOptions& opt = {}) {
  VarianceSeries s;
  s.omega_max = opt.omega_max > 0.0 ? opt.omega_max : default_variance_cutoff(k, th);
  for (double t : t_grid) s.push(variances_frequency_oracle(k, th, t, opt));
  return s;
}

/// Cross variance from the Re(G_H conj G_h) form.
inline double sigma_xv(const KernelParams& k, const ThermalState& th, double t,
                       const VarianceOptions& opt = {}) {
  return variances_frequency_oracle(k, th, t, opt).sxv;
}

struct ClassicalVariances {
  double sxx, svv, sxv;
};

/// Classical (C = kBT gamma) variances in terms of the relaxation functions.
inline ClassicalVariances classical_variances(const KernelParams& k, const ThermalState& th, double t) {
  th.validate();
  detail::check_time(t);
  const Relaxation rel(k);
  const double H = rel.H(t), h = rel.h(t);
  const double intH = rel.H_modes().integral(t);
  return {th.kBT * (2.0 * intH - H * H), th.kBT * (1.0 - h * h), th.kBT * H * (1.0 - h)};
}

// ---------------------------------------------------------------------------
// Appendix closed forms

/// Which reading of each doubtful appendix factor to use.
struct AppendixVariant {
  bool a2_plus = true;          // second numerator of A2 is (lambda + w) rather than (lambda - w)
  bool a12_squared = true;      // prefactor of the last F_X term is A^2 rather than A
  bool a18_lambda_plus = true;  // F_V term 4: lambda A4 bracket at (lambda + w) rather than lambda A3 at (lambda - w)
  bool a21_half = true;         // F_V term 7: A3/(2 tau_c), A4/(2 tau_c) rather than A3/tau_c, A4/tau_c

  static constexpr AppendixVariant printed() { return {false, false, false, false}; }
  static constexpr AppendixVariant corrected() { return {true, true, true, true}; }

  std::string name() const {
    std::string s;
    s += a2_plus ? "A2(l+w)" : "A2(l-w)";
    s += a12_squared ? ",A12(A^2)" : ",A12(A)";
    s += a18_lambda_plus ? ",A18(A4,l+w)" : ",A18(A3,l-w)";
    s += a21_half ? ",A21(1/2tc)" : ",A21(1/tc)";
    return s;
  }
  bool operator==(const AppendixVariant&) const = default;
};

/// Frequency-dependent constants A1..A6.
struct AppendixConstants {
  double A1, A2, A3, A4, A5, A6;

  static AppendixConstants at(const KernelParams& k, double omega, bool a2_plus = true) {
    const double tc = k.tau_c(), lam = k.lambda();
    const double m = lam - omega, p = lam + omega;
    const double dm = 1.0 + 4.0 * tc * tc * m * m;
    const double dp = 1.0 + 4.0 * tc * tc * p * p;
    AppendixConstants c{};
    c.A3 = tc / dm;
    c.A4 = tc / dp;
    c.A1 = c.A3 + c.A4;
    c.A5 = 2.0 * tc * tc * m / dm;
    c.A6 = 2.0 * tc * tc * p / dp;
    c.A2 = c.A5 + 2.0 * tc * tc * (a2_plus ? p : m) / dp;
    return c;
  }
};

/// Appendix integrands at fixed t. F_X is normalised so that
/// sigma_XX = (2/pi) int hw_coth/(1 + w^2 tau_c^2) F_X dw, and F_V so that
/// sigma_VV = (2 gamma0 / (pi lambda^2)) int hw_coth/(1 + w^2 tau_c^2) F_V dw.
class AppendixForms {
public:
  AppendixForms(const KernelParams& k, double t) : k_(k), t_(t) {
    detail::check_time(t);
    const double tc = k.tau_c(), lam = k.lambda(), al = k.alpha();
    e1_ = std::exp(-t / (2.0 * tc));
    e2_ = e1_ * e1_;
    lt_ = 2.0 * lam * tc;
    q_ = 1.0 / (4.0 * k.gamma0() * tc);
    sa_ = std::sin(al);
    ca_ = std::cos(al);
    s2a_ = std::sin(2.0 * al);
    c2a_ = std::cos(2.0 * al);
    const double th = lam * t + al;
    sth_ = std::sin(th);
    cth_ = std::cos(th);
    s2th_ = std::sin(2.0 * th);
    c2th_ = std::cos(2.0 * th);
  }

  double t() const noexcept { return t_; }

  /// Shared frequency-dependent pieces at one omega.
  struct Point {
    double omega;
    AppendixConstants plus, minus;  // A2 with (lambda + w) and with (lambda - w)
    double m, p;
    // sin/cos of (phi + nu t) for nu in {m, p}, phi in {0, alpha, 2 alpha}
    std::array<double, 3> sm, cm, sp, cp;
    double swt, cwt;
  };

  Point point(double omega) const {
    if (!(omega > 0.0)) throw ValidationError("omega", "appendix integrands need omega > 0");
    Point P{};
    P.omega = omega;
    P.plus = AppendixConstants::at(k_, omega, true);
    P.minus = P.plus;
    P.minus.A2 = AppendixConstants::at(k_, omega, false).A2;
    P.m = k_.lambda() - omega;
    P.p = k_.lambda() + omega;
    const double smt = std::sin(P.m * t_), cmt = std::cos(P.m * t_);
    const double spt = std::sin(P.p * t_), cpt = std::cos(P.p * t_);
    const std::array<double, 3> sphi{0.0, sa_, s2a_}, cphi{1.0, ca_, c2a_};
    for (int i = 0; i < 3; ++i) {
      P.sm[i] = sphi[i] * cmt + cphi[i] * smt;
      P.cm[i] = cphi[i] * cmt - sphi[i] * smt;
      P.sp[i] = sphi[i] * cpt + cphi[i] * spt;
      P.cp[i] = cphi[i] * cpt - sphi[i] * spt;
    }
    P.swt = std::sin(omega * t_);
    P.cwt = std::cos(omega * t_);
    return P;
  }

  std::array<double, 11> fx_terms(const Point& P, const AppendixVariant& v) const {
    const double g0 = k_.gamma0(), tc = k_.tau_c(), A = k_.amp();
    const auto& c = v.a2_plus ? P.plus : P.minus;
    const double w = P.omega, m = P.m, p = P.p;
    const std::array<double, 3> sphi{0.0, sa_, s2a_}, cphi{1.0, ca_, c2a_};
    auto Bs_m = [&](int i) { return e1_ * (P.sm[i] + 2 * tc * m * P.cm[i]) - (sphi[i] + 2 * tc * m * cphi[i]); };
    auto Bs_p = [&](int i) { return e1_ * (P.sp[i] + 2 * tc * p * P.cp[i]) - (sphi[i] + 2 * tc * p * cphi[i]); };
    auto Bc_m = [&](int i) { return e1_ * (2 * tc * m * P.sm[i] - P.cm[i]) - (2 * tc * m * sphi[i] - cphi[i]); };
    auto Bc_p = [&](int i) { return e1_ * (2 * tc * p * P.sp[i] - P.cp[i]) - (2 * tc * p * sphi[i] - cphi[i]); };
    // sin/cos(alpha +- w t)
    const double s_apw = sa_ * P.cwt + ca_ * P.swt, c_apw = ca_ * P.cwt - sa_ * P.swt;
    const double s_amw = sa_ * P.cwt - ca_ * P.swt, c_amw = ca_ * P.cwt + sa_ * P.swt;
    const double half = std::sin(0.5 * w * t_);

    std::array<double, 11> T{};
    T[0] = 2.0 * half * half / (g0 * w * w);
    T[1] = A / (g0 * w) *
           (c.A3 * (c_apw - ca_) - c.A4 * (c_amw - ca_) - c.A5 * (s_apw - sa_) + c.A6 * (s_amw - sa_));
    T[2] = -A * c.A1 / (2 * g0 * g0) * (e1_ * (sth_ + lt_ * cth_) - (sa_ + lt_ * ca_));
    T[3] = -A * c.A2 / (2 * g0 * g0) * (e1_ * (cth_ - lt_ * sth_) - (ca_ - lt_ * sa_));
    T[4] = A * A * c.A2 / (8 * g0 * g0) * (e2_ * (s2th_ + lt_ * c2th_) - (s2a_ + lt_ * c2a_));
    T[5] = A * A * c.A1 * (tc / (2 * g0)) *
           (e2_ + e2_ * q_ * (lt_ * s2th_ - c2th_) - (1.0 + q_ * (lt_ * s2a_ - c2a_)));
    T[6] = -A / (g0 * w) * (c.A3 * Bc_m(1) - c.A4 * Bc_p(1));
    T[7] = A * A * c.A3 / g0 * (c.A3 * Bc_m(0) - c.A4 * Bc_p(2));
    T[8] = A * A * c.A4 / g0 * (c.A4 * Bc_p(0) - c.A3 * Bc_m(2));
    T[9] = -A * A * c.A5 / g0 * (c.A4 * Bs_p(2) + c.A3 * Bs_m(0));
    const double pref = v.a12_squared ? A * A : A;
    T[10] = -pref * c.A6 / g0 * (c.A3 * Bs_m(2) + c.A4 * Bs_p(0));
    return T;
  }

  std::array<double, 7> fv_terms(const Point& P, const AppendixVariant& v) const {
    const double g0 = k_.gamma0(), tc = k_.tau_c(), lam = k_.lambda();
    const auto& c = v.a2_plus ? P.plus : P.minus;
    const double m = P.m, p = P.p;
    const std::array<double, 3> sphi{0.0, sa_, s2a_}, cphi{1.0, ca_, c2a_};
    auto Bs_m = [&](int i) { return e1_ * (P.sm[i] + 2 * tc * m * P.cm[i]) - (sphi[i] + 2 * tc * m * cphi[i]); };
    auto Bs_p = [&](int i) { return e1_ * (P.sp[i] + 2 * tc * p * P.cp[i]) - (sphi[i] + 2 * tc * p * cphi[i]); };
    auto Bc_m = [&](int i) { return e1_ * (2 * tc * m * P.sm[i] - P.cm[i]) - (2 * tc * m * sphi[i] - cphi[i]); };
    auto Bc_p = [&](int i) { return e1_ * (2 * tc * p * P.sp[i] - P.cp[i]) - (2 * tc * p * sphi[i] - cphi[i]); };
    const double h2 = 1.0 / (2.0 * tc);
    const double osc = lt_ * s2th_ - c2th_, osc0 = lt_ * s2a_ - c2a_;

    std::array<double, 7> T{};
    T[0] = 0.25 * (c.A1 * h2 + lam * c.A2) * (e2_ + e2_ * q_ * osc - (1.0 + q_ * osc0));
    T[1] = lam * tc / 2 * (lam * c.A1 - c.A2 * h2) * (e2_ - e2_ * q_ * osc - (1.0 - q_ * osc0));
    T[2] = -1.0 / (8 * g0) * (lam * c.A1 / tc + lam * lam * c.A2 - c.A2 * h2 * h2) *
           (e2_ * (s2th_ + lt_ * c2th_) - (s2a_ + lt_ * c2a_));
    const double mixed = v.a18_lambda_plus ? lam * c.A4 * Bs_p(2) : lam * c.A3 * Bs_m(2);
    T[3] = (c.A3 * h2 + lam * c.A5) *
           (c.A3 * h2 * Bc_m(0) + mixed - lam * c.A3 * Bs_m(0) - c.A4 * h2 * Bc_p(2));
    T[4] = (c.A4 * h2 + lam * c.A6) *
           (c.A4 * h2 * Bc_p(0) - c.A3 * h2 * Bc_m(2) + lam * c.A3 * Bs_m(2) - lam * c.A4 * Bs_p(0));
    T[5] = (lam * c.A3 - c.A5 * h2) *
           (c.A3 * h2 * Bs_m(0) + c.A4 * h2 * Bs_p(2) + lam * c.A4 * Bc_p(2) + lam * c.A3 * Bc_m(0));
    const double f7 = v.a21_half ? h2 : 1.0 / tc;
    T[6] = (lam * c.A4 - c.A6 * h2) *
           (c.A3 * f7 * Bs_m(2) + c.A4 * f7 * Bs_p(0) + lam * c.A3 * Bc_m(2) + lam * c.A4 * Bc_p(0));
    return T;
  }

  double fx(double omega, const AppendixVariant& v = AppendixVariant::corrected()) const {
    const auto T = fx_terms(point(omega), v);
    CompensatedSum s;
    for (double x : T) s += x;
    return s.value();
  }

  double fv(double omega, const AppendixVariant& v = AppendixVariant::corrected()) const {
    const auto T = fv_terms(point(omega), v);
    CompensatedSum s;
    for (double x : T) s += x;
    return s.value();
  }

  /// Weight w(omega) shared by both appendix integrals: hw_coth / (1 + w^2 tau_c^2).
  double weight(const ThermalState& th, double omega) const {
    const double wt = omega * k_.tau_c();
    return th.hw_coth(omega) / (1.0 + wt * wt);
  }

  double sxx_prefactor() const { return 2.0 / std::numbers::pi; }
  double svv_prefactor() const {
    return 2.0 * k_.gamma0() / (std::numbers::pi * k_.lambda() * k_.lambda());
  }

private:
  KernelParams k_;
  double t_;
  double e1_, e2_, lt_, q_;
  double sa_, ca_, s2a_, c2a_;
  double sth_, cth_, s2th_, c2th_;
};

struct AppendixResult {
  double value = 0.0;
  double rel_error = 0.0;
  std::vector<double> term_integrals;  // contribution of each term after the omega integral
};

namespace detail {

template <std::size_t N, bool IsX>
AppendixResult appendix_integral(const KernelParams& k, const ThermalState& th, double t,
                                 const VarianceOptions& opt, const AppendixVariant& v) {
  th.validate();
  check_time(t);
  AppendixResult out;
  out.term_integrals.assign(N, 0.0);
  if (t == 0.0) return out;
  const double omega_max = opt.omega_max > 0.0 ? opt.omega_max : default_variance_cutoff(k, th);
  const AppendixForms forms(k, t);
  const double pref = IsX ? forms.sxx_prefactor() : forms.svv_prefactor();
  auto f = [&](double w) {
    const auto P = forms.point(w);
    const double wt = pref * forms.weight(th, w);
    std::array<double, N + 1> r{};
    std::array<double, N> T;
    if constexpr (IsX)
      T = forms.fx_terms(P, v);
    else
      T = forms.fv_terms(P, v);
    CompensatedSum s;
    for (std::size_t i = 0; i < N; ++i) {
      r[i + 1] = wt * T[i];
      s += T[i];
    }
    r[0] = wt * s.value();
    return r;
  };
  const auto breaks = frequency_panels(omega_max, t, 1.0 / k.tau_c());
  QuadratureOptions qo;
  qo.rel_tol = opt.rel_tol;
  const auto r = integrate_panels<N + 1>(f, breaks, qo);
  out.value = r.value[0];
  out.rel_error = r.abs_error[0] / std::max(std::abs(r.value[0]), 1e-300);
  for (std::size_t i = 0; i < N; ++i) out.term_integrals[i] = r.value[i + 1];
  check_quadrature(IsX ? "sigma_xx_appendix" : "sigma_vv_appendix", out.rel_error, opt.max_rel_error, t);
  return out;
}

}  // namespace detail

inline AppendixResult sigma_xx_appendix_terms(const KernelParams& k, const ThermalState& th, double t,
                                              const VarianceOptions& opt = {},
                                              const AppendixVariant& v = AppendixVariant::corrected()) {
  return detail::appendix_integral<11, true>(k, th, t, opt, v);
}

inline AppendixResult sigma_vv_appendix_terms(const KernelParams& k, const ThermalState& th, double t,
                                              const VarianceOptions& opt = {},
                                              const AppendixVariant& v = AppendixVariant::corrected()) {
  return detail::appendix_integral<7, false>(k, th, t, opt, v);
}

inline double sigma_xx_appendix(const KernelParams& k, const ThermalState& th, double t,
                                const VarianceOptions& opt = {},
                                const AppendixVariant& v = AppendixVariant::corrected()) {
  return sigma_xx_appendix_terms(k, th, t, opt, v).value;
}

inline double sigma_vv_appendix(const KernelParams& k, const ThermalState& th, double t,
                                const VarianceOptions& opt = {},
                                const AppendixVariant& v = AppendixVariant::corrected()) {
  return sigma_vv_appendix_terms(k, th, t, opt, v).value;
}

/// Every appendix variant and the oracle evaluated in one omega pass.
/// F_X depends on (a2_plus, a12_squared) and F_V on (a2_plus, a18, a21).
struct AppendixComparison {
  double t = 0.0;
  double sxx_oracle = 0.0, svv_oracle = 0.0;
  std::array<double, 4> sxx_variant{};  // index = a2_plus + 2*a12_squared
  std::array<double, 8> svv_variant{};  // index = a2_plus + 2*a18 + 4*a21

  static std::size_t fx_index(const AppendixVariant& v) { return (v.a2_plus ? 1 : 0) + (v.a12_squared ? 2 : 0); }
  static std::size_t fv_index(const AppendixVariant& v) {
    return (v.a2_plus ? 1 : 0) + (v.a18_lambda_plus ? 2 : 0) + (v.a21_half ? 4 : 0);
  }
  double sxx(const AppendixVariant& v) const { return sxx_variant[fx_index(v)]; }
  double svv(const AppendixVariant& v) const { return svv_variant[fv_index(v)]; }
};

inline AppendixComparison appendix_comparison(const KernelParams& k, const ThermalState& th, double t,
                                              const VarianceOptions& opt = {}) {
  th.validate();
  detail::check_time(t);
  AppendixComparison out;
  out.t = t;
  if (t == 0.0) return out;
  const double omega_max = opt.omega_max > 0.0 ? opt.omega_max : default_variance_cutoff(k, th);
  const Relaxation rel(k);
  const AppendixForms forms(k, t);
  const double px = forms.sxx_prefactor(), pv = forms.svv_prefactor();
  auto f = [&](double w) {
    std::array<double, 14> r{};
    const double S = noise_spectrum(k, th, w);
    r[0] = S * std::norm(rel.H_modes().fourier_partial(w, t));
    r[1] = S * std::norm(rel.h_modes().fourier_partial(w, t));
    const auto P = forms.point(w);
    const double wt = forms.weight(th, w);
    for (int i = 0; i < 4; ++i) {
      AppendixVariant v{(i & 1) != 0, (i & 2) != 0, true, true};
      CompensatedSum s;
      for (double x : forms.fx_terms(P, v)) s += x;
      r[2 + i] = px * wt * s.value();
    }
    for (int i = 0; i < 8; ++i) {
      AppendixVariant v{(i & 1) != 0, true, (i & 2) != 0, (i & 4) != 0};
      CompensatedSum s;
      for (double x : forms.fv_terms(P, v)) s += x;
      r[6 + i] = pv * wt * s.value();
    }
    return r;
  };
  const auto breaks = frequency_panels(omega_max, t, 1.0 / k.tau_c());
  QuadratureOptions qo;
  qo.rel_tol = opt.rel_tol;
  const auto r = integrate_panels<14>(f, breaks, qo);
  out.sxx_oracle = r.value[0];
  out.svv_oracle = r.value[1];
  for (int i = 0; i < 4; ++i) out.sxx_variant[i] = r.value[2 + i];
  for (int i = 0; i < 8; ++i) out.svv_variant[i] = r.value[6 + i];
  return out;
}

}  // namespace qgle
