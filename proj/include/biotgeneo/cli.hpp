#pragma once

#include <CLI11.hpp>

#include "biotgeneo/experiments.hpp"

namespace biotgeneo {

/// Binds every experiment knob to CLI11 options on `app`, including the
/// `--config` file option (line-based `key = value`, keys matching the long
/// option names). Precedence: defaults < config file < command-line flags.
inline void bind_cli(CLI::App& app, ExperimentConfig& cfg) {
  app.set_config("--config", "", "Config file with key = value lines");
  app.add_option("--experiment", cfg.experiment, "Experiment to run")
      ->check(CLI::IsMember(
          {"table1-left", "table1-right", "table2", "convergence", "single"}))
      ->capture_default_str();
  app.add_option("--n", cfg.n, "Mesh cells per side")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--kx", cfg.kx, "Subdomain columns")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--ky", cfg.ky, "Subdomain rows")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--overlap", cfg.overlap, "Overlap width in element layers")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--nu", cfg.nu, "Poisson ratio (uniform material)")
      ->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "Permeability (uniform material)")
      ->capture_default_str();
  app.add_option("--dstab", cfg.dstab, "Pressure-jump stabilization weight")
      ->capture_default_str();
  app.add_option("--dt", cfg.dt, "Time step")->capture_default_str();
  app.add_option("--t-end", cfg.t_end, "Final time")->capture_default_str();
  app.add_option("--rtol", cfg.rtol, "GMRES relative residual tolerance")
      ->capture_default_str();
  app.add_option("--deflation", cfg.deflation, "GenEO eigenvectors per subdomain")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--tau", cfg.tau,
                 "GenEO eigenvalue threshold; enables threshold selection when > 0")
      ->capture_default_str();
  app.add_option("--precond", cfg.precond, "Displacement-block preconditioner")
      ->check(CLI::IsMember({"exact", "ic0", "oas1", "geneo-additive", "geneo-hybrid"}))
      ->capture_default_str();
  app.add_option("--schur", cfg.schur, "Pressure Schur approximation")
      ->check(CLI::IsMember({"coupled", "mass"}))->capture_default_str();
  app.add_option("--pattern", cfg.pattern, "Material pattern")
      ->check(CLI::IsMember({"uniform", "across", "along"}))->capture_default_str();
  app.add_option("--threads", cfg.threads, "Threads for subdomain solves")
      ->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--scale-down", cfg.scale_down,
               "Run table1-right at H/h=32 instead of 64");
  app.add_option("--csv", cfg.csv_path, "Output CSV path (default <experiment>.csv)");
}

/// Parses flags, runs the selected experiment, writes the CSV, and prints the
/// rows. Exit code: 0 all steps converged, 2 some step did not, 1 usage or
/// configuration error.
inline int run_cli(int argc, const char* const* argv) {
  ExperimentConfig cfg;
  CLI::App app{"Three-field Biot solver benchmarked with a GenEO block preconditioner"};
  bind_cli(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto [rows, exit_code] = run_experiment(cfg);
    const std::string path = cfg.csv_path.empty() ? cfg.experiment + ".csv" : cfg.csv_path;
    write_csv(rows, path);
    std::fputs(to_csv(rows).c_str(), stdout);
    if (cfg.experiment == "convergence") {
      const EmpiricalOrders orders = empirical_orders(rows);
      for (std::size_t i = 1; i < rows.size(); ++i)
        std::printf("order n=%d->%d: u %.3f z %.3f p %.3f\n", rows[i - 1].h_ratio * 2,
                    rows[i].h_ratio * 2, orders.order_u[i], orders.order_z[i],
                    orders.order_p[i]);
    }
    std::fprintf(stderr, "wrote %s\n", path.c_str());
    return exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace biotgeneo
