#pragma once

// Run configuration (INI), CSV series output and the drivers behind each CLI
// command.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qgle/error.hpp"
#include "qgle/fpe_diffusion.hpp"
#include "qgle/kernel_spectrum.hpp"
#include "qgle/langevin_mc.hpp"
#include "qgle/numerics.hpp"
#include "qgle/potential.hpp"
#include "qgle/relaxation.hpp"
#include "qgle/smoluchowski.hpp"
#include "qgle/variances.hpp"

namespace qgle {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& field, const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
  if (b < e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw ValidationError(field, "not a number: '" + s + "'");
  return v;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

inline std::vector<double> parse_list(const std::string& field, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_double(field, item));
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct RunConfig {
  std::string command = "variances";
  // kernel
  double gamma0 = 1.0;
  double tau_c = 1.0;
  // thermal
  double kBT = 10.0;
  double hbar = 1.0;
  double kB = 1.0;
  std::vector<double> kBT_sweep;
  std::vector<double> tau_c_sweep;
  // grids
  double t_min = 0.0;
  double t_max = 50.0;
  std::size_t n_t = 51;
  double omega_max = 0.0;  // 0 selects the default cutoff policy
  // Monte Carlo
  std::size_t n_modes = 256;
  double bath_omega_max = 25.0;
  std::size_t n_traj = 2000;
  std::uint64_t seed = 42;
  double X0 = 0.0;
  double V0 = 0.0;
  // Smoluchowski
  std::vector<double> potential{0.0, 0.0, 0.5};
  double omega_tilde = 0.0;  // 0 selects sqrt(V'') at the global minimum
  double t_final = 20.0;
  std::size_t x_points = 1024;
  double x_half_widths = 8.0;
  bool quantum_corrections = true;
  // tolerances
  double rel_tol = 1e-10;
  // output
  std::string out_dir = ".";

  bool operator==(const RunConfig&) const = default;

  KernelParams kernel() const { return KernelParams(gamma0, tau_c); }
  ThermalState thermal() const { return ThermalState(kBT, hbar, kB); }
  VarianceOptions variance_options() const {
    VarianceOptions o;
    o.omega_max = omega_max;
    o.rel_tol = rel_tol;
    return o;
  }
  std::vector<double> t_grid() const { return linspace(t_min, t_max, n_t); }

  void validate() const {
    auto positive = [](const char* f, double v) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(f, "must be positive");
    };
    positive("kernel.gamma0", gamma0);
    positive("kernel.tau_c", tau_c);
    positive("thermal.hbar", hbar);
    positive("thermal.kB", kB);
    if (!(kBT >= 0.0)) throw ValidationError("thermal.kBT", "must be >= 0");
    for (double v : kBT_sweep)
      if (!(v >= 0.0)) throw ValidationError("thermal.kBT_sweep", "entries must be >= 0");
    for (double v : tau_c_sweep) positive("kernel.tau_c_sweep", v);
    (void)KernelParams(gamma0, tau_c);
    if (!(t_min >= 0.0)) throw ValidationError("grid.t_min", "must be >= 0");
    if (!(t_max > t_min)) throw ValidationError("grid.t_max", "must exceed t_min");
    if (n_t < 2) throw ValidationError("grid.n_t", "must be >= 2");
    if (!(omega_max >= 0.0)) throw ValidationError("grid.omega_max", "must be >= 0");
    if (n_modes < 2) throw ValidationError("mc.n_modes", "must be >= 2");
    positive("mc.bath_omega_max", bath_omega_max);
    if (n_traj < 2) throw ValidationError("mc.n_traj", "must be >= 2");
    if (potential.empty() || potential.size() > 7)
      throw ValidationError("smoluchowski.potential", "needs 1 to 7 coefficients (degree <= 6)");
    if (!(omega_tilde >= 0.0)) throw ValidationError("smoluchowski.omega_tilde", "must be >= 0");
    if (!(t_final > 0.0)) throw ValidationError("smoluchowski.t_final", "must be positive");
    if (x_points < 16) throw ValidationError("smoluchowski.x_points", "must be >= 16");
    positive("smoluchowski.x_half_widths", x_half_widths);
    positive("tolerance.rel_tol", rel_tol);
  }

  boost::property_tree::ptree to_ptree() const {
    boost::property_tree::ptree pt;
    pt.put("run.command", command);
    pt.put("kernel.gamma0", format_double(gamma0));
    pt.put("kernel.tau_c", format_double(tau_c));
    pt.put("kernel.tau_c_sweep", format_list(tau_c_sweep));
    pt.put("thermal.kBT", format_double(kBT));
    pt.put("thermal.hbar", format_double(hbar));
    pt.put("thermal.kB", format_double(kB));
    pt.put("thermal.kBT_sweep", format_list(kBT_sweep));
    pt.put("grid.t_min", format_double(t_min));
    pt.put("grid.t_max", format_double(t_max));
    pt.put("grid.n_t", std::to_string(n_t));
    pt.put("grid.omega_max", format_double(omega_max));
    pt.put("mc.n_modes", std::to_string(n_modes));
    pt.put("mc.bath_omega_max", format_double(bath_omega_max));
    pt.put("mc.n_traj", std::to_string(n_traj));
    pt.put("mc.seed", std::to_string(seed));
    pt.put("mc.X0", format_double(X0));
    pt.put("mc.V0", format_double(V0));
    pt.put("smoluchowski.potential", format_list(potential));
    pt.put("smoluchowski.omega_tilde", format_double(omega_tilde));
    pt.put("smoluchowski.t_final", format_double(t_final));
    pt.put("smoluchowski.x_points", std::to_string(x_points));
    pt.put("smoluchowski.x_half_widths", format_double(x_half_widths));
    pt.put("smoluchowski.quantum_corrections", quantum_corrections ? "true" : "false");
    pt.put("tolerance.rel_tol", format_double(rel_tol));
    pt.put("output.dir", out_dir);
    return pt;
  }

  std::string to_ini() const {
    std::ostringstream os;
    boost::property_tree::write_ini(os, to_ptree());
    return os.str();
  }

  /// Overwrites the fields present in `pt`; unknown keys are rejected.
  void apply(const boost::property_tree::ptree& pt) {
    for (const auto& [section, body] : pt) {
      for (const auto& [key, node] : body) {
        const std::string field = section + "." + key;
        const std::string v = node.get_value<std::string>();
        auto num = [&] { return parse_double(field, v); };
        auto count = [&]() -> std::size_t {
          const double d = num();
          if (d < 0 || d != std::floor(d)) throw ValidationError(field, "must be a nonnegative integer");
          return static_cast<std::size_t>(d);
        };
        if (field == "run.command") command = v;
        else if (field == "kernel.gamma0") gamma0 = num();
        else if (field == "kernel.tau_c") tau_c = num();
        else if (field == "kernel.tau_c_sweep") tau_c_sweep = parse_list(field, v);
        else if (field == "thermal.kBT") kBT = num();
        else if (field == "thermal.hbar") hbar = num();
        else if (field == "thermal.kB") kB = num();
        else if (field == "thermal.kBT_sweep") kBT_sweep = parse_list(field, v);
        else if (field == "grid.t_min") t_min = num();
        else if (field == "grid.t_max") t_max = num();
        else if (field == "grid.n_t") n_t = count();
        else if (field == "grid.omega_max") omega_max = num();
        else if (field == "mc.n_modes") n_modes = count();
        else if (field == "mc.bath_omega_max") bath_omega_max = num();
        else if (field == "mc.n_traj") n_traj = count();
        else if (field == "mc.seed") {
          try {
            seed = std::stoull(v);
          } catch (const std::exception&) {
            throw ValidationError(field, "not an unsigned integer: '" + v + "'");
          }
        } else if (field == "mc.X0") X0 = num();
        else if (field == "mc.V0") V0 = num();
        else if (field == "smoluchowski.potential") potential = parse_list(field, v);
        else if (field == "smoluchowski.omega_tilde") omega_tilde = num();
        else if (field == "smoluchowski.t_final") t_final = num();
        else if (field == "smoluchowski.x_points") x_points = count();
        else if (field == "smoluchowski.x_half_widths") x_half_widths = num();
        else if (field == "smoluchowski.quantum_corrections") {
          if (v == "true" || v == "1") quantum_corrections = true;
          else if (v == "false" || v == "0") quantum_corrections = false;
          else throw ValidationError(field, "expected true or false");
        } else if (field == "tolerance.rel_tol") rel_tol = num();
        else if (field == "output.dir") out_dir = v;
        else throw ValidationError(field, "unknown configuration key");
      }
    }
  }

  void apply_ini(const std::string& text) {
    std::istringstream is(text);
    boost::property_tree::ptree pt;
    try {
      boost::property_tree::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError("config", e.what());
    }
    apply(pt);
  }

  void apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_ini(ss.str());
  }

  static RunConfig from_ini(const std::string& text) {
    RunConfig c;
    c.apply_ini(text);
    return c;
  }

  std::uint64_t hash() const { return fnv1a(to_ini()); }
};

/// Default configuration of each figure, taken from the captions.
inline RunConfig figure_config(int fig) {
  RunConfig c;
  c.command = "fig" + std::to_string(fig);
  const std::vector<double> temps{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
  const std::vector<double> taus{0.5, 1.0, 2.0, 5.0};
  switch (fig) {
    case 1: c.kBT_sweep = temps; c.t_min = 0.0; c.t_max = 2.0; c.n_t = 101; break;
    case 2: c.kBT_sweep = temps; c.t_max = 50.0; c.n_t = 51; break;
    case 3: c.kBT_sweep = temps; c.t_max = 50.0; c.n_t = 51; break;
    case 4: c.kBT = 10.0; c.tau_c_sweep = taus; c.t_max = 50.0; c.n_t = 51; break;
    case 5: c.kBT = 0.0; c.tau_c_sweep = taus; c.t_max = 30.0; c.n_t = 121; break;
    case 6: c.kBT_sweep = {0.0}; c.t_max = 50.0; c.n_t = 101; break;
    case 7: c.gamma0 = 0.275; c.kBT_sweep = temps; c.t_max = 50.0; c.n_t = 101; break;
    default: throw ValidationError("fig", "must be 1..7");
  }
  return c;
}

/// One CSV file: `#` metadata lines, a header row, then rectangular data.
struct SeriesOutput {
  std::string name;
  std::vector<std::string> columns;
  std::string units = "arbitrary units, hbar = kB = m = 1 unless configured";
  std::string provenance;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> r) {
    if (r.size() != columns.size())
      throw NumericalError("SeriesOutput '" + name + "': row width " + std::to_string(r.size()) + " != " +
                           std::to_string(columns.size()));
    rows.push_back(std::move(r));
  }

  void meta(std::string key, std::string value) {
    for (auto& [k, v] : metadata)
      if (k == key) {
        v = std::move(value);
        return;
      }
    metadata.emplace_back(std::move(key), std::move(value));
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "# series: " << name << "\n";
    os << "# units: " << units << "\n";
    os << "# path: " << provenance << "\n";
    for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
      os << "\n";
    }
    return os.str();
  }

  std::filesystem::path write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    const auto path = dir / (name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("output.dir", "cannot write '" + path.string() + "'");
    out << to_csv();
    return path;
  }
};

/// Progress callback; receives one human-readable line per unit of work.
using Progress = std::function<void(const std::string&)>;

namespace detail {

inline SeriesOutput make_series(const RunConfig& cfg, std::string name, std::vector<std::string> cols,
                                std::string provenance, double omega_max) {
  SeriesOutput s;
  s.name = std::move(name);
  s.columns = std::move(cols);
  s.provenance = std::move(provenance);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
  s.meta("config_hash", hash);
  s.meta("seed", std::to_string(cfg.seed));
  s.meta("omega_max", format_double(omega_max));
  s.meta("gamma0", format_double(cfg.gamma0));
  s.meta("tau_c", format_double(cfg.tau_c));
  return s;
}

inline std::string tag(const char* key, double v) { return std::string(key) + "=" + format_double(v); }

inline void notify(const Progress& p, const std::string& msg) {
  if (p) p(msg);
}

}  // namespace detail

/// Figure data series: one CSV per curve.
inline std::vector<SeriesOutput> run_figure(int fig, const RunConfig& cfg, const Progress& progress = {}) {
  if (fig < 1 || fig > 7) throw ValidationError("fig", "must be 1..7");
  cfg.validate();
  std::vector<SeriesOutput> out;
  const auto grid = cfg.t_grid();
  const bool tau_sweep = fig == 4 || fig == 5;
  const std::vector<double> sweep =
      tau_sweep ? (cfg.tau_c_sweep.empty() ? std::vector<double>{cfg.tau_c} : cfg.tau_c_sweep)
                : (cfg.kBT_sweep.empty() ? std::vector<double>{cfg.kBT} : cfg.kBT_sweep);
  for (double v : sweep) {
    const KernelParams k(cfg.gamma0, tau_sweep ? v : cfg.tau_c);
    const ThermalState th(tau_sweep ? cfg.kBT : v, cfg.hbar, cfg.kB);
    auto vo = cfg.variance_options();
    const double wmax = vo.omega_max > 0.0 ? vo.omega_max : default_variance_cutoff(k, th);
    const std::string curve = "fig" + std::to_string(fig) + "_" + (tau_sweep ? detail::tag("tau_c", v) : detail::tag("kBT", v));
    detail::notify(progress, "computing " + curve);
    if (fig == 7) {
      const Relaxation rel(k);
      Delta0Options dopt;
      dopt.variance = vo;
      const double d0 = delta0(k, th, dopt).value;
      auto s = detail::make_series(cfg, curve, {"t", "D_q"}, "oracle", wmax);
      s.meta("kBT", format_double(th.kBT));
      s.meta("delta0", format_double(d0));
      for (double t : grid) {
        const auto smp = variances_frequency_oracle(k, th, t, vo);
        s.add_row({t, quantum_diffusion_coefficient(rel, smp, d0)});
      }
      out.push_back(std::move(s));
      continue;
    }
    const bool vv = fig == 3 || fig == 6;
    auto s = detail::make_series(cfg, curve, {"t", vv ? "sigma2_VV" : "sigma2_XX"}, "oracle", wmax);
    s.meta("kBT", format_double(th.kBT));
    s.meta("tau_c", format_double(k.tau_c()));
    for (double t : grid) {
      const auto smp = variances_frequency_oracle(k, th, t, vo);
      s.add_row({t, vv ? smp.svv : smp.sxx});
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Oracle and appendix variances side by side.
inline std::vector<SeriesOutput> run_variances(const RunConfig& cfg, const Progress& progress = {}) {
  cfg.validate();
  const auto k = cfg.kernel();
  const auto th = cfg.thermal();
  const auto vo = cfg.variance_options();
  const double wmax = vo.omega_max > 0.0 ? vo.omega_max : default_variance_cutoff(k, th);
  auto s = detail::make_series(cfg, "variances",
                               {"t", "sxx_oracle", "svv_oracle", "sxv", "dsxx_dt", "dsvv_dt", "dsxv_dt",
                                "sxx_appendix", "svv_appendix", "rel_diff_xx", "rel_diff_vv"},
                               "oracle+appendix(" + AppendixVariant::corrected().name() + ")", wmax);
  s.meta("kBT", format_double(th.kBT));
  auto rel = [](double a, double b) { return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b); };
  for (double t : cfg.t_grid()) {
    detail::notify(progress, "variances t=" + format_double(t));
    const auto o = variances_frequency_oracle(k, th, t, vo);
    const double ax = sigma_xx_appendix(k, th, t, vo);
    const double av = sigma_vv_appendix(k, th, t, vo);
    s.add_row({t, o.sxx, o.svv, o.sxv, o.dsxx_dt, o.dsvv_dt, o.dsxv_dt, ax, av, rel(ax, o.sxx), rel(av, o.svv)});
  }
  return {s};
}

/// FPE coefficients, Delta0 and D_q(t).
inline std::vector<SeriesOutput> run_fpe(const RunConfig& cfg, const Progress& progress = {}) {
  cfg.validate();
  const auto k = cfg.kernel();
  const auto th = cfg.thermal();
  const auto vo = cfg.variance_options();
  const double wmax = vo.omega_max > 0.0 ? vo.omega_max : default_variance_cutoff(k, th);
  detail::notify(progress, "converging Delta0");
  Delta0Options dopt;
  dopt.variance = vo;
  const auto d0 = delta0(k, th, dopt);
  auto s = detail::make_series(cfg, "fpe",
                               {"t", "H", "h", "sxx", "svv", "sxv", "xi", "phi", "psi", "singular", "D_q",
                                "marginal_variance"},
                               "oracle", wmax);
  s.meta("kBT", format_double(th.kBT));
  s.meta("delta0", format_double(d0.value));
  for (std::size_t i = 0; i < d0.iterates.size(); ++i)
    s.meta("delta0_iterate", "t=" + format_double(d0.t_inf[i]) + " value=" + format_double(d0.iterates[i]));
  for (const auto& r : diffusion_table(k, th, cfg.t_grid(), d0.value, vo))
    s.add_row({r.t, r.H, r.h, r.sxx, r.svv, r.sxv, r.fpe.xi, r.fpe.phi, r.fpe.psi, r.fpe.singular ? 1.0 : 0.0, r.D_q,
               r.marginal_var});
  return {s};
}

/// Monte Carlo ensemble of the free particle against the oracle, plus the
/// noise autocorrelation against the discrete FDR sum.
inline std::vector<SeriesOutput> run_mc(const RunConfig& cfg, const Progress& progress = {}) {
  cfg.validate();
  const auto k = cfg.kernel();
  const auto th = cfg.thermal();
  detail::notify(progress, "discretizing bath");
  const auto bath = discretize_bath(k, cfg.n_modes, cfg.bath_omega_max);
  const auto grid = cfg.t_grid();
  if (grid.front() != 0.0) throw ValidationError("grid.t_min", "Monte Carlo runs start at t = 0");
  GleOptions go;
  go.n_traj = cfg.n_traj;
  go.seed = cfg.seed;
  detail::notify(progress, "integrating " + std::to_string(cfg.n_traj) + " trajectories");
  const auto ens = integrate_gle(k, bath, th, PotentialSpec::free(), {cfg.X0, cfg.V0, 0.0}, grid, go);
  auto vo = cfg.variance_options();
  vo.omega_max = cfg.bath_omega_max;
  auto s = detail::make_series(cfg, "mc_ensemble",
                               {"t", "mean_X", "mean_X_se", "var_X", "var_X_se", "var_V", "var_V_se", "sxx_oracle",
                                "svv_oracle"},
                               "monte-carlo", cfg.bath_omega_max);
  s.meta("kBT", format_double(th.kBT));
  s.meta("n_modes", std::to_string(cfg.n_modes));
  s.meta("n_traj", std::to_string(cfg.n_traj));
  s.meta("dt", format_double(ens.dt));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto o = variances_frequency_oracle(k, th, grid[i], vo);
    const auto mx = ens.mean_X(i), vx = ens.var_X(i), vv = ens.var_V(i);
    s.add_row({grid[i], mx.value, mx.stderr_, vx.value, vx.stderr_, vv.value, vv.stderr_, o.sxx, o.svv});
  }
  detail::notify(progress, "noise autocorrelation");
  std::vector<double> lags = linspace(0.0, std::min(5.0 * k.tau_c(), 0.9 * bath.max_time()), 20);
  const auto ac = noise_autocorrelation(bath, th, lags, cfg.n_traj, cfg.seed);
  auto n = detail::make_series(cfg, "mc_noise", {"lag", "autocorr", "autocorr_se", "fdr_discrete", "mean_F", "mean_F_se"},
                               "monte-carlo", cfg.bath_omega_max);
  n.meta("kBT", format_double(th.kBT));
  for (std::size_t l = 0; l < lags.size(); ++l)
    n.add_row({lags[l], ac.autocorr[l].value, ac.autocorr[l].stderr_, ac.expected[l], ac.mean[l].value,
               ac.mean[l].stderr_});
  return {s, n};
}

/// Smoluchowski relaxation in the configured potential.
inline std::vector<SeriesOutput> run_smoluchowski(const RunConfig& cfg, const Progress& progress = {}) {
  cfg.validate();
  const auto k = cfg.kernel();
  const auto th = cfg.thermal();
  const PotentialSpec pot(cfg.potential);
  if (!pot.confining()) throw ValidationError("smoluchowski.potential", "must be confining (even degree, positive leading coefficient)");
  const double xmin = pot.global_minimum(-10.0, 10.0);
  const double wt = cfg.omega_tilde > 0.0 ? cfg.omega_tilde : pot.linearized_frequency();
  const auto grid = default_grid(k, th, wt, cfg.x_points, cfg.x_half_widths, xmin);

  CorrectionSeries cs;
  if (cfg.quantum_corrections) {
    detail::notify(progress, "evolving quantum corrections");
    CorrectionOptions co;
    co.frozen_at = xmin;
    const auto tg = linspace(0.0, cfg.t_final, 201);
    cs = evolve_corrections(pot, CorrectionState::coherent(xmin, 0.0, wt, cfg.hbar), tg, co, cfg.hbar);
  }
  const double init_var = 0.25 * std::pow(grid.dx * static_cast<double>(grid.size()) / (2.0 * cfg.x_half_widths), 2);
  const auto init = DensityField::gaussian(grid.x0, grid.x(grid.size() - 1), grid.size(), xmin, init_var);
  SmoluchowskiOptions so;
  so.corrections = cfg.quantum_corrections ? &cs : nullptr;
  so.n_snapshots = 100;
  detail::notify(progress, "solving Smoluchowski equation");
  const auto res = solve_smoluchowski(pot, k, th, wt, init, cfg.t_final, so);
  const double dxx_final = cs.t.empty() ? 0.0 : cs.dxx_at(cfg.t_final);
  const double m[1] = {dxx_final};
  const auto boltz = boltzmann_density(res.snapshots.back(), [&](double x) { return effective_potential(pot, x, m); },
                                       k.gamma0(), res.D);

  auto mom = detail::make_series(cfg, "smoluchowski_moments",
                                 {"t", "mean", "variance", "mass", "min_density", "dxx", "stationary_variance"},
                                 "pde", 0.0);
  mom.meta("kBT", format_double(th.kBT));
  mom.meta("omega_tilde", format_double(wt));
  mom.meta("D_qo", format_double(res.D));
  mom.meta("dt", format_double(res.dt));
  mom.meta("potential", format_list(cfg.potential));
  for (const auto& f : res.snapshots)
    mom.add_row({f.t, f.mean(), f.variance(), f.mass(), f.min_value(), cs.t.empty() ? 0.0 : cs.dxx_at(f.t),
                 boltz.variance()});
  auto dens = detail::make_series(cfg, "smoluchowski_density", {"x", "p_final", "p_stationary"}, "pde", 0.0);
  dens.meta("t_final", format_double(res.snapshots.back().t));
  for (std::size_t i = 0; i < boltz.size(); ++i)
    dens.add_row({res.snapshots.back().x(i), res.snapshots.back().p[i], boltz.p[i]});
  return {mom, dens};
}

}  // namespace qgle
