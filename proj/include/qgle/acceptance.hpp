#pragma once

// Acceptance suite: every criterion runs at its stated tolerance and reports
// the measured values. Failures are report rows, never exceptions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qgle/cli_io.hpp"
#include "qgle/fpe_diffusion.hpp"
#include "qgle/kernel_spectrum.hpp"
#include "qgle/langevin_mc.hpp"
#include "qgle/potential.hpp"
#include "qgle/relaxation.hpp"
#include "qgle/smoluchowski.hpp"
#include "qgle/variances.hpp"

namespace qgle {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;  // key=value pairs separated by ';'
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  /// Forces the appendix criterion to judge one variant instead of picking the best.
  std::optional<AppendixVariant> forced_variant;
};

namespace detail {

class Measured {
public:
  Measured& operator()(const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return add(key, buf);
  }
  Measured& add(const std::string& key, const std::string& v) {
    if (!s_.empty()) s_ += ";";
    s_ += key + "=" + v;
    return *this;
  }
  const std::string& str() const { return s_; }

private:
  std::string s_;
};

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace detail

inline CriterionResult criterion_diffusive_growth() {
  CriterionResult r{1, "classical diffusive growth"};
  const KernelParams k(1.0, 1.0);
  const ThermalState th(10.0);
  std::vector<double> t, s;
  for (double ti = 20.0; ti <= 50.0; ti += 5.0) {
    t.push_back(ti);
    s.push_back(variances_frequency_oracle(k, th, ti).sxx);
  }
  const double slope = linear_fit_slope(t, s);
  const double target = 2.0 * th.kBT / k.gamma0();
  r.passed = detail::rel_diff(slope, target) <= 0.03;
  r.measured = detail::Measured()("slope", slope)("target", target)("rel_err", detail::rel_diff(slope, target)).str();
  return r;
}

inline CriterionResult criterion_equipartition() {
  CriterionResult r{2, "equipartition plateau"};
  const double svv = variances_frequency_oracle(KernelParams(1.0, 1.0), ThermalState(10.0), 50.0).svv;
  r.passed = detail::rel_diff(svv, 10.0) <= 0.02;
  r.measured = detail::Measured()("svv_50", svv)("target", 10.0)("rel_err", detail::rel_diff(svv, 10.0)).str();
  return r;
}

inline CriterionResult criterion_appendix(const AcceptanceOptions& opt) {
  CriterionResult r{3, "oracle/appendix agreement"};
  const KernelParams k(1.0, 1.0);
  std::vector<AppendixComparison> cmp;
  for (double kbt : {0.0, 1.0, 10.0})
    for (double t : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) cmp.push_back(appendix_comparison(k, ThermalState(kbt), t));

  auto worst_xx = [&](const AppendixVariant& v) {
    double e = 0.0;
    for (const auto& c : cmp)
      if (std::abs(c.sxx_oracle) >= 1e-8) e = std::max(e, detail::rel_diff(c.sxx(v), c.sxx_oracle));
    return e;
  };
  auto worst_vv = [&](const AppendixVariant& v) {
    double e = 0.0;
    for (const auto& c : cmp)
      if (std::abs(c.svv_oracle) >= 1e-8) e = std::max(e, detail::rel_diff(c.svv(v), c.svv_oracle));
    return e;
  };

  // F_X depends on (A2, A12) and F_V on (A2, A18, A21): pick each winner jointly over A2.
  AppendixVariant best;
  double best_err = INFINITY;
  std::ostringstream table;
  for (int m = 0; m < 16; ++m) {
    AppendixVariant v{(m & 1) != 0, (m & 2) != 0, (m & 4) != 0, (m & 8) != 0};
    const double e = std::max(worst_xx(v), worst_vv(v));
    table << (m ? " " : "") << v.name() << ":" << std::scientific << std::setprecision(2) << e;
    if (e < best_err) {
      best_err = e;
      best = v;
    }
  }
  const AppendixVariant judged = opt.forced_variant.value_or(best);
  const double exx = worst_xx(judged), evv = worst_vv(judged);
  const double eprinted = std::max(worst_xx(AppendixVariant::printed()), worst_vv(AppendixVariant::printed()));
  r.passed = std::max(exx, evv) <= 1e-4;
  auto yn = [](bool b) { return b ? std::string("corrected") : std::string("as_printed"); };
  r.measured = detail::Measured()
                   .add("variant", judged.name())("max_rel_err_xx", exx)("max_rel_err_vv", evv)
                   .add("A2", yn(judged.a2_plus))
                   .add("A12", yn(judged.a12_squared))
                   .add("A18", yn(judged.a18_lambda_plus))
                   .add("A21", yn(judged.a21_half))("printed_max_rel_err", eprinted)
                   .str();
  r.detail = std::string(opt.forced_variant ? "forced variant; " : "winning variant; ") + "all variants: " + table.str();
  return r;
}

inline CriterionResult criterion_relaxation() {
  CriterionResult r{4, "relaxation oracle"};
  detail::Measured m;
  double worst = 0.0;
  const auto grid = linspace(0.0, 50.0, 1001);
  for (auto [g0, tc] : {std::pair{1.0, 1.0}, std::pair{0.275, 1.0}, std::pair{2.0, 0.5}}) {
    const KernelParams k(g0, tc);
    const Relaxation rel(k);
    const auto o = relaxation_ode_oracle(k, grid);
    double e = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      e = std::max({e, std::abs(rel.H(grid[i]) - o.H[i]), std::abs(rel.h(grid[i]) - o.h[i])});
    m("err(" + format_double(g0) + "," + format_double(tc) + ")", e);
    worst = std::max(worst, e);
  }
  r.passed = worst <= 1e-8;
  r.measured = m("max_abs_err", worst).str();
  return r;
}

inline CriterionResult criterion_mc_fdr(const AcceptanceOptions& opt) {
  CriterionResult r{5, "Monte Carlo FDR"};
  const KernelParams k(1.0, 1.0);
  const auto bath = discretize_bath(k, 500, 50.0);
  const auto lags = linspace(0.0, 10.0, 20);
  double worst = 0.0;
  detail::Measured m;
  for (double kbt : {0.0, 1.0, 10.0}) {
    const auto ac = noise_autocorrelation(bath, ThermalState(kbt), lags, 10000, opt.seed);
    double z = 0.0;
    for (std::size_t l = 0; l < lags.size(); ++l) z = std::max(z, std::abs(ac.autocorr[l].z(ac.expected[l])));
    m("max_z(kBT=" + format_double(kbt) + ")", z);
    worst = std::max(worst, z);
  }
  r.passed = worst <= 3.0;
  r.measured = m("reconstruction_err", bath.reconstruction_error).str();
  return r;
}

inline CriterionResult criterion_mc_ensemble(const AcceptanceOptions& opt) {
  CriterionResult r{6, "ensemble vs quadrature"};
  const KernelParams k(1.0, 1.0);
  const ThermalState th(10.0);
  const double wmax = 25.0;
  const auto bath = discretize_bath(k, 256, wmax);
  const std::vector<double> grid{0.0, 1.0, 5.0, 20.0};
  GleOptions go;
  go.n_traj = 10000;
  go.seed = opt.seed;
  const auto ens = integrate_gle(k, bath, th, PotentialSpec::free(), {}, grid, go);
  VarianceOptions vo;
  vo.omega_max = wmax;  // the oracle sees the same band-limited spectrum as the bath
  double worst = 0.0;
  detail::Measured m;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto o = variances_frequency_oracle(k, th, grid[i], vo);
    const double zx = std::abs(ens.var_X(i).z(o.sxx)), zv = std::abs(ens.var_V(i).z(o.svv));
    m("z_xx(t=" + format_double(grid[i]) + ")", zx)("z_vv(t=" + format_double(grid[i]) + ")", zv);
    worst = std::max({worst, zx, zv});
  }
  r.passed = worst <= 3.0;
  r.measured = m.str();
  r.detail = "n_modes=256 omega_max=25 n_traj=10000 kBT=10";
  return r;
}

inline CriterionResult criterion_sxv_consistency() {
  CriterionResult r{7, "sigma_XV consistency"};
  const KernelParams k(1.0, 1.0);
  double worst = 0.0;
  for (double kbt : {0.0, 10.0})
    for (double t : linspace(1.0, 10.0, 10)) {
      const auto s = variances_frequency_oracle(k, ThermalState(kbt), t);
      worst = std::max(worst, detail::rel_diff(s.sxv, 0.5 * s.dsxx_dt));
    }
  r.passed = worst <= 1e-5;
  r.measured = detail::Measured()("max_rel_err", worst).str();
  return r;
}

inline CriterionResult criterion_diffusion_limits() {
  CriterionResult r{8, "diffusion limits"};
  detail::Measured m;
  // classical limit
  const KernelParams k1(1.0, 1.0);
  const ThermalState hot(10.0);
  const auto d_hot = delta0(k1, hot);
  const double t_long = d_hot.t_inf.back();
  const double dq_hot = quantum_diffusion_coefficient(k1, hot, t_long, d_hot.value);
  const bool ok_hot = detail::rel_diff(dq_hot, 10.0) <= 0.03;
  m("D_q_classical", dq_hot)("t", t_long);

  // vacuum with the weak-coupling parameters
  const KernelParams k0(0.275, 1.0);
  const ThermalState cold(0.0);
  const double d0 = delta0_value(k0, cold);
  const Relaxation rel(k0);
  const auto grid = linspace(0.5, 160.0, 320);
  std::vector<double> dq;
  for (double t : grid) dq.push_back(quantum_diffusion_coefficient(rel, variances_frequency_oracle(k0, cold, t), d0));
  const double mn = *std::min_element(dq.begin(), dq.end());
  const auto imax = static_cast<std::size_t>(std::max_element(dq.begin(), dq.end()) - dq.begin());
  const bool nonneg = mn >= 0.0;
  const bool rises = imax > 0 && imax + 1 < dq.size() && dq[imax] > dq.front();
  auto at = [&](double t) { return dq[static_cast<std::size_t>(std::lround((t - 0.5) / (grid[1] - grid[0])))]; };
  const double a80 = at(80.0), a160 = at(160.0);
  const double settle = std::abs(a160 - a80) / std::abs(a80);
  const bool settles = settle <= 0.01 && a160 > 0.0;
  m("D_q_min", mn)("t_peak", grid[imax])("D_q_peak", dq[imax])("D_q(80)", a80)("D_q(160)", a160)("rel_change", settle);
  r.passed = ok_hot && nonneg && rises && settles;
  r.measured = m.str();
  r.detail = std::string("classical ") + (ok_hot ? "ok" : "FAIL") + "; nonneg " + (nonneg ? "ok" : "FAIL") +
             "; peak " + (rises ? "ok" : "FAIL") + "; settles " + (settles ? "ok" : "FAIL");
  return r;
}

inline CriterionResult criterion_overdamped_coefficient() {
  CriterionResult r{9, "overdamped coefficient"};
  const KernelParams k(1.0, 1.0);
  const double hot = overdamped_diffusion(k, ThermalState(100.0), 1.0);
  const double w = 1.7;
  const double vac = overdamped_diffusion(k, ThermalState(0.0), w);
  const double one = overdamped_diffusion(k, ThermalState(1.0), 1.0);
  const double ref = 0.5 / std::tanh(0.5);
  const double e_hot = detail::rel_diff(hot, 100.0);
  const double e_one = std::abs(one - ref);
  r.passed = e_hot <= 0.01 && vac == w / 2.0 && e_one <= 1e-12;
  r.measured = detail::Measured()("D_qo(kBT=100)", hot)("rel_err", e_hot)("D_qo(kBT=0,w=1.7)", vac)(
                   "D_qo(kBT=1)", one)("abs_err_coth", e_one)
                   .str();
  return r;
}

inline CriterionResult criterion_correction_hierarchy() {
  CriterionResult r{10, "correction hierarchy invariant"};
  const auto grid = linspace(0.0, 50.0, 501);
  const auto harm = PotentialSpec::harmonic(1.3);
  const auto hs = evolve_corrections(harm, CorrectionState::coherent(0.4, 0.1, 1.3), grid);
  double width_drift = 0.0;
  for (const auto& s : hs.states)
    width_drift = std::max({width_drift, detail::rel_diff(s.dxx, hs.states.front().dxx),
                            detail::rel_diff(s.dpp, hs.states.front().dpp)});
  const auto quart = PotentialSpec::quartic_well(1.0, 0.3);
  const auto qs = evolve_corrections(quart, CorrectionState::coherent(0.8, 0.0, 1.0), grid);
  r.passed = hs.max_uncertainty_drift <= 1e-8 && qs.max_uncertainty_drift <= 1e-8 && width_drift <= 1e-8;
  r.measured = detail::Measured()("det_drift_harmonic", hs.max_uncertainty_drift)(
                   "det_drift_quartic", qs.max_uncertainty_drift)("width_drift_harmonic", width_drift)
                   .str();
  return r;
}

inline CriterionResult criterion_smoluchowski(const AcceptanceOptions& opt) {
  CriterionResult r{11, "Smoluchowski stationarity"};
  const KernelParams k(1.0, 1.0);
  const double w = 1.0;
  const auto harm = PotentialSpec::harmonic(w);
  detail::Measured m;
  bool ok = true;
  double worst_mass = 0.0;
  for (double kbt : {10.0, 0.0}) {
    const ThermalState th(kbt);
    const auto g = default_grid(k, th, w);
    const double target = kbt > 0.0 ? kbt / (w * w) : th.hbar / (2.0 * w);
    const auto init = DensityField::gaussian(g.x0, g.x(g.size() - 1), g.size(), 1.0, 0.2 * target);
    const auto res = solve_smoluchowski(harm, k, th, w, init, 20.0);
    const double var = res.snapshots.back().variance();
    const double e = detail::rel_diff(var, target);
    ok = ok && e <= 0.02;
    worst_mass = std::max(worst_mass, res.max_mass_error);
    m("var(kBT=" + format_double(kbt) + ")", var)("target", target);
  }
  ok = ok && worst_mass <= 1e-9;

  // overdamped Langevin against the PDE in an anharmonic well
  const ThermalState th(0.5);
  const auto quart = PotentialSpec::quartic_well();
  const double wt = linearized_frequency(quart);
  CorrectionOptions co;
  co.frozen_at = 0.0;
  const auto cs = evolve_corrections(quart, CorrectionState::coherent(0.0, 0.0, wt), linspace(0.0, 20.0, 201), co);
  const auto g = default_grid(k, th, wt);
  const auto init = DensityField::gaussian(g.x0, g.x(g.size() - 1), g.size(), 0.0, 0.3);
  SmoluchowskiOptions so;
  so.corrections = &cs;
  const auto res = solve_smoluchowski(quart, k, th, wt, init, 20.0, so);
  worst_mass = std::max(worst_mass, res.max_mass_error);
  OverdampedOptions oo;
  oo.n_traj = 100000;
  oo.seed = opt.seed;
  oo.dxx = cs.states.back().dxx;
  const std::vector<double> og{0.0, 10.0};
  const auto ens = overdamped_langevin_check(quart, k, th, wt, og, oo);
  const double ks = ks_distance(ens.X[1], res.snapshots.back());
  ok = ok && ks < 0.02 && res.max_mass_error <= 1e-9;
  r.passed = ok;
  r.measured = m("max_mass_err", worst_mass)("ks_quartic", ks).str();
  return r;
}

inline CriterionResult criterion_fpe_stationarity() {
  CriterionResult r{12, "FPE stationarity"};
  const KernelParams k(1.0, 1.0);
  const ThermalState th(10.0);
  const auto d = delta0(k, th);
  const auto& c = d.coefficients;
  double scale = 0.0, flux = 0.0;
  for (double V : linspace(-6.0 * std::sqrt(d.value), 6.0 * std::sqrt(d.value), 241)) {
    const double Phi = std::exp(-0.5 * V * V / d.value) / std::sqrt(2.0 * std::numbers::pi * d.value);
    scale = std::max({scale, std::abs(c.xi * V * Phi), std::abs(c.phi * V / d.value * Phi)});
    flux = std::max(flux, std::abs(stationary_flux(c, d.value, V)));
  }
  const double e = detail::rel_diff(d.value, th.kBT);
  r.passed = flux <= 1e-8 * scale && e <= 0.02;
  r.measured = detail::Measured()("delta0", d.value)("rel_err", e)("max_flux", flux)("scale", scale)(
                   "t_inf", d.t_inf.back())
                   .str();
  return r;
}

inline CriterionResult criterion_figure_morphology() {
  CriterionResult r{13, "figure morphology"};
  detail::Measured m;
  const KernelParams k(1.0, 1.0);
  auto loglog = [](const std::vector<double>& t, const std::vector<double>& y) {
    std::vector<double> lt, ly;
    for (std::size_t i = 0; i < t.size(); ++i) {
      lt.push_back(std::log(t[i]));
      ly.push_back(std::log(y[i]));
    }
    return linear_fit_slope(lt, ly);
  };
  // onset
  const ThermalState hot(10.0);
  std::vector<double> ts, ys;
  for (double t : {0.01, 0.02, 0.04, 0.06, 0.08, 0.1}) {
    ts.push_back(t);
    ys.push_back(variances_frequency_oracle(k, hot, t).sxx);
  }
  const double s_short = loglog(ts, ys);
  const bool f1 = s_short >= 1.9 && s_short <= 2.1;
  // cross-over
  ts.clear();
  ys.clear();
  for (double t = 20.0; t <= 50.0; t += 5.0) {
    ts.push_back(t);
    ys.push_back(variances_frequency_oracle(k, hot, t).sxx);
  }
  const double s_long = loglog(ts, ys);
  const bool f2 = s_long >= 0.95 && s_long <= 1.05;
  // vacuum curves: growth rate 2 sigma_XV has an interior local maximum on (0, 10 tau_c]
  bool f5 = true;
  const ThermalState cold(0.0);
  for (double tc : {0.5, 1.0, 2.0, 5.0}) {
    const KernelParams kt(1.0, tc);
    std::vector<double> rate;
    for (double t : linspace(0.1 * tc, 10.0 * tc, 60)) rate.push_back(variances_frequency_oracle(kt, cold, t).sxv);
    bool peak = false;
    for (std::size_t i = 1; i + 1 < rate.size(); ++i) peak = peak || (rate[i] > rate[i - 1] && rate[i] > rate[i + 1]);
    f5 = f5 && peak;
    m.add("fig5_peak(tau_c=" + format_double(tc) + ")", peak ? "yes" : "no");
  }
  // vacuum velocity plateau
  const double v25 = variances_frequency_oracle(k, cold, 25.0).svv;
  const double v50 = variances_frequency_oracle(k, cold, 50.0).svv;
  const bool f6 = v50 > 0.0 && detail::rel_diff(v25, v50) <= 0.01;
  m("fig1_slope", s_short)("fig2_slope", s_long)("fig6_svv25", v25)("fig6_svv50", v50);
  r.passed = f1 && f2 && f5 && f6;
  r.measured = m.str();
  r.detail = std::string("fig1 ") + (f1 ? "ok" : "FAIL") + "; fig2 " + (f2 ? "ok" : "FAIL") + "; fig5 " +
             (f5 ? "ok" : "FAIL") + "; fig6 " + (f6 ? "ok" : "FAIL");
  return r;
}

/// Criterion runners indexed by id - 1.
inline std::vector<std::function<CriterionResult(const AcceptanceOptions&)>> acceptance_criteria() {
  return {
      [](const AcceptanceOptions&) { return criterion_diffusive_growth(); },
      [](const AcceptanceOptions&) { return criterion_equipartition(); },
      criterion_appendix,
      [](const AcceptanceOptions&) { return criterion_relaxation(); },
      criterion_mc_fdr,
      criterion_mc_ensemble,
      [](const AcceptanceOptions&) { return criterion_sxv_consistency(); },
      [](const AcceptanceOptions&) { return criterion_diffusion_limits(); },
      [](const AcceptanceOptions&) { return criterion_overdamped_coefficient(); },
      [](const AcceptanceOptions&) { return criterion_correction_hierarchy(); },
      criterion_smoluchowski,
      [](const AcceptanceOptions&) { return criterion_fpe_stationarity(); },
      [](const AcceptanceOptions&) { return criterion_figure_morphology(); },
  };
}

/// Runs one criterion; an exception becomes a failed row.
inline CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {}) {
  const auto all = acceptance_criteria();
  if (id < 1 || id > static_cast<int>(all.size())) throw ValidationError("criterion", "unknown id " + std::to_string(id));
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = all[static_cast<std::size_t>(id - 1)](opt);
  } catch (const std::exception& e) {
    r.id = id;
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::vector<CriterionResult> validate_suite(const AcceptanceOptions& opt = {},
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= static_cast<int>(acceptance_criteria().size()); ++id) {
    out.push_back(run_criterion(id, opt));
    if (on_result) on_result(out.back());
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

/// One criterion per row.
inline std::string format_report(const std::vector<CriterionResult>& rs) {
  std::ostringstream os;
  os << "id,name,status,seconds,measured,detail\n";
  for (const auto& r : rs) {
    char sec[32];
    std::snprintf(sec, sizeof sec, "%.2f", r.seconds);
    os << r.id << "," << csv_field(r.name) << "," << (r.passed ? "PASS" : "FAIL") << "," << sec << ","
       << csv_field(r.measured) << "," << csv_field(r.detail) << "\n";
  }
  return os.str();
}

inline std::string format_line(const CriterionResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%s] criterion %2d", r.passed ? "PASS" : "FAIL", r.id);
  std::string s = std::string(buf) + " " + r.name + ": " + r.measured;
  if (!r.detail.empty()) s += " (" + r.detail + ")";
  return s;
}

}  // namespace qgle
