#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "biotgeneo/cli.hpp"
#include "biotgeneo/experiments.hpp"

using namespace biotgeneo;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n = 8;
  cfg.kx = cfg.ky = 2;
  cfg.dt = 0.05;
  cfg.t_end = 0.15;
  cfg.precond = "exact";
  return cfg;
}

std::string strip_timing(const std::string& csv) {
  std::string out;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t end = csv.find('\n', start);
    if (end == std::string::npos) end = csv.size();
    const std::string line = csv.substr(start, end - start);
    out += line.substr(0, line.rfind(',')) + '\n';
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("material patterns place values by subdomain parity", "[harness]") {
  const Mesh mesh = Mesh::unit_square(8);
  const Partition part = Partition::structured(mesh, 4, 4);

  const MaterialField uni =
      material_pattern(MaterialPattern::Uniform, mesh, part, 0.25, 2e-3);
  for (std::size_t t = 0; t < uni.size(); ++t) {
    REQUIRE(uni.nu[t] == 0.25);
    REQUIRE(uni.kappa[t] == 2e-3);
  }

  const MaterialPair pair;
  const MaterialField across =
      material_pattern(MaterialPattern::Across, mesh, part, 0.3, 1e-2);
  std::array<int, 16> sub_a{};  // material-A element count per subdomain
  for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
    REQUIRE((across.nu[t] == pair.nu_a || across.nu[t] == pair.nu_b));
    if (across.nu[t] == pair.nu_a) {
      REQUIRE(across.kappa[t] == pair.kappa_a);
      ++sub_a[part.owner[t]];
    } else {
      REQUIRE(across.kappa[t] == pair.kappa_b);
    }
  }
  // Checkerboard on a 4x4 grid: 8 subdomains all-A, 8 all-B.
  int full_a = 0, empty_a = 0;
  const int per_sub = mesh.triangle_count() / 16;
  for (int s = 0; s < 16; ++s) {
    if (sub_a[s] == per_sub) ++full_a;
    if (sub_a[s] == 0) ++empty_a;
    const int bx = s % 4, by = s / 4;
    REQUIRE(sub_a[s] == ((bx + by) % 2 == 0 ? per_sub : 0));
  }
  REQUIRE(full_a == 8);
  REQUIRE(empty_a == 8);

  const MaterialField along =
      material_pattern(MaterialPattern::Along, mesh, part, 0.3, 1e-2);
  for (std::int32_t t = 0; t < mesh.triangle_count(); ++t) {
    const int bx = part.owner[t] % 4;
    REQUIRE(along.nu[t] == (bx % 2 == 0 ? pair.nu_a : pair.nu_b));
  }

  REQUIRE_THROWS(pattern_from_name("diagonal"));
  REQUIRE_THROWS(precond_from_name("multigrid"));
}

TEST_CASE("time loop on the zero-source problem stays at zero", "[harness]") {
  ExperimentConfig cfg = small_config();
  const ManufacturedSolution zero = ManufacturedSolution::zero_source();
  const ExperimentRow row = time_loop(cfg, &zero);
  REQUIRE(row.converged);
  REQUIRE(row.steps == 3);
  REQUIRE(row.max_iters <= 1);
  REQUIRE(row.e_u == 0.0);
  REQUIRE(row.e_z == 0.0);
  REQUIRE(row.e_p == 0.0);
}

TEST_CASE("single-step loop runs exactly one step", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.t_end = cfg.dt;
  const ExperimentRow row = time_loop(cfg);
  REQUIRE(row.steps == 1);
  REQUIRE(row.converged);
  REQUIRE(row.max_iters >= 1);
  REQUIRE(row.mean_iters == Catch::Approx(row.max_iters));
}

TEST_CASE("default mesh run converges with a stable iteration baseline", "[harness]") {
  ExperimentConfig cfg;  // n=16, 2x2, geneo-hybrid defaults
  cfg.t_end = 5 * cfg.dt;
  const ExperimentRow row = time_loop(cfg);
  CAPTURE(row.max_iters, row.mean_iters);
  REQUIRE(row.converged);
  REQUIRE(row.steps == 5);
  REQUIRE(row.max_iters <= 60);
  REQUIRE(row.e_u < 0.1);
  REQUIRE(row.e_p < 0.5);
}

TEST_CASE("exact and geneo-hybrid runs land on the same fixed point", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.rtol = 1e-10;
  const ExperimentRow exact_row = time_loop(cfg);
  cfg.precond = "geneo-hybrid";
  cfg.deflation = 8;
  const ExperimentRow geneo_row = time_loop(cfg);
  REQUIRE(exact_row.converged);
  REQUIRE(geneo_row.converged);
  REQUIRE(exact_row.e_u == Catch::Approx(geneo_row.e_u).epsilon(1e-6));
  REQUIRE(exact_row.e_z == Catch::Approx(geneo_row.e_z).epsilon(1e-6));
  REQUIRE(exact_row.e_p == Catch::Approx(geneo_row.e_p).epsilon(1e-6));
}

TEST_CASE("csv output is byte-stable excluding the timing column", "[harness]") {
  const ExperimentConfig cfg = small_config();
  const std::vector<ExperimentRow> a = {time_loop(cfg)};
  const std::vector<ExperimentRow> b = {time_loop(cfg)};
  const std::string csv_a = to_csv(a), csv_b = to_csv(b);
  REQUIRE(strip_timing(csv_a) == strip_timing(csv_b));
  REQUIRE(csv_a.substr(0, csv_a.find('\n')) ==
          "experiment,pattern,N,H_over_h,delta_over_h,nu,kappa,steps,max_iters,"
          "mean_iters,e_u,e_z,e_p,converged,wall_s");
}

TEST_CASE("config precedence is defaults then file then flags", "[cli]") {
  const std::string path = "/tmp/biotgeneo_cli_precedence.ini";
  {
    std::ofstream f(path);
    f << "# comment line\n";
    f << "n = 12\n";
    f << "kappa = 1e-3\n";
    f << "precond = exact\n";
  }
  ExperimentConfig cfg;
  CLI::App app{"test"};
  bind_cli(app, cfg);
  const char* argv[] = {"biot-geneo", "--config", path.c_str(), "--n", "24"};
  app.parse(5, argv);
  REQUIRE(cfg.n == 24);          // flag beats file
  REQUIRE(cfg.kappa == 1e-3);    // file beats default
  REQUIRE(cfg.precond == "exact");
  REQUIRE(cfg.nu == 0.3);        // untouched default
  std::remove(path.c_str());
}

TEST_CASE("cli runs a single experiment and writes its csv", "[cli]") {
  const std::string csv = "/tmp/biotgeneo_cli_single.csv";
  const char* argv[] = {"biot-geneo", "--experiment", "single", "--n",  "8",
                        "--kx",       "2",            "--ky",   "2",   "--precond",
                        "exact",      "--dt",         "0.05",   "--t-end", "0.1",
                        "--csv",      csv.c_str()};
  REQUIRE(run_cli(17, argv) == 0);
  std::ifstream f(csv);
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  REQUIRE(header.substr(0, 18) == "experiment,pattern");
  std::string row;
  std::getline(f, row);
  REQUIRE(row.substr(0, 7) == "single,");
  std::remove(csv.c_str());
}

TEST_CASE("cli reports usage errors and help cleanly", "[cli]") {
  const char* bad[] = {"biot-geneo", "--experiment", "bogus"};
  REQUIRE(run_cli(3, bad) == 1);
  const char* unknown[] = {"biot-geneo", "--frobnicate"};
  REQUIRE(run_cli(2, unknown) == 1);
}
