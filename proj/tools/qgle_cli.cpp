// qgle_cli: figure series, variance tables, FPE coefficients, Monte Carlo and
// Smoluchowski runs, and the acceptance report.
//
// Precedence: built-in defaults (per-figure for `fig`) < --config < flags.
// Exit codes: 0 success, 1 validation failure, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "qgle/acceptance.hpp"
#include "qgle/cli_io.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> omega_max;
  bool quiet = false;
};

qgle::RunConfig resolve(qgle::RunConfig base, const Common& c) {
  if (!c.config.empty()) base.apply_file(c.config);
  if (c.out) base.out_dir = *c.out;
  if (c.seed) base.seed = *c.seed;
  if (c.omega_max) base.omega_max = *c.omega_max;
  base.validate();
  return base;
}

void write_all(const std::vector<qgle::SeriesOutput>& series, const qgle::RunConfig& cfg, bool quiet) {
  for (const auto& s : series) {
    const auto path = s.write(cfg.out_dir);
    if (!quiet) std::cerr << "wrote " << path.string() << " (" << s.rows.size() << " rows)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum generalized Langevin equation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", common.out, "Output directory");
  app.add_option("--seed", common.seed, "Monte Carlo seed");
  app.add_option("--omega-max", common.omega_max, "Frequency cutoff for the variance quadrature")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", common.quiet, "Suppress progress output");

  int fig = 0;
  auto* fig_cmd = app.add_subcommand("fig", "Figure data series, one CSV per curve");
  fig_cmd->add_option("n", fig, "Figure number")->required()->check(CLI::Range(1, 7));
  auto* var_cmd = app.add_subcommand("variances", "Oracle and appendix variances side by side");
  auto* fpe_cmd = app.add_subcommand("fpe", "Fokker-Planck coefficients, Delta0 and D_q(t)");
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo ensemble against the variance oracle");
  auto* smol_cmd = app.add_subcommand("smoluchowski", "Overdamped density evolution");
  auto* val_cmd = app.add_subcommand("validate", "Run the acceptance criteria");
  std::vector<int> only;
  std::string variant;
  val_cmd->add_option("--criterion", only, "Run only these criterion ids")->check(CLI::Range(1, 13));
  val_cmd->add_option("--variant", variant, "Force the appendix variant: printed or corrected")
      ->check(CLI::IsMember({"printed", "corrected"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const bool quiet = common.quiet;
  const qgle::Progress progress = [quiet](const std::string& msg) {
    if (!quiet) std::cerr << msg << "\n";
  };

  try {
    if (*fig_cmd) {
      const auto cfg = resolve(qgle::figure_config(fig), common);
      write_all(qgle::run_figure(fig, cfg, progress), cfg, quiet);
    } else if (*var_cmd) {
      const auto cfg = resolve(qgle::RunConfig{}, common);
      write_all(qgle::run_variances(cfg, progress), cfg, quiet);
    } else if (*fpe_cmd) {
      const auto cfg = resolve(qgle::RunConfig{}, common);
      write_all(qgle::run_fpe(cfg, progress), cfg, quiet);
    } else if (*mc_cmd) {
      auto base = qgle::RunConfig{};
      base.t_max = 20.0;
      base.n_t = 21;
      const auto cfg = resolve(base, common);
      write_all(qgle::run_mc(cfg, progress), cfg, quiet);
    } else if (*smol_cmd) {
      const auto cfg = resolve(qgle::RunConfig{}, common);
      write_all(qgle::run_smoluchowski(cfg, progress), cfg, quiet);
    } else if (*val_cmd) {
      const auto cfg = resolve(qgle::RunConfig{}, common);
      qgle::AcceptanceOptions opt;
      opt.seed = cfg.seed;
      if (variant == "printed") opt.forced_variant = qgle::AppendixVariant::printed();
      if (variant == "corrected") opt.forced_variant = qgle::AppendixVariant::corrected();
      std::vector<qgle::CriterionResult> rs;
      auto report = [&](const qgle::CriterionResult& r) {
        rs.push_back(r);
        std::cout << qgle::format_line(r) << std::endl;
      };
      if (only.empty()) {
        qgle::validate_suite(opt, report);
      } else {
        for (int id : only) report(qgle::run_criterion(id, opt));
      }
      std::filesystem::create_directories(cfg.out_dir);
      const auto path = std::filesystem::path(cfg.out_dir) / "validation_report.csv";
      std::ofstream(path) << qgle::format_report(rs);
      if (!quiet) std::cerr << "wrote " << path.string() << "\n";
      for (const auto& r : rs)
        if (!r.passed) return 1;
    }
  } catch (const qgle::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const qgle::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
