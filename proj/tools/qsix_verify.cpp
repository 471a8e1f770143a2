// Command-line driver: configure a model point, run the selected identity
// suites, and emit the JSON report. Exit code 0 = all suites passed,
// 1 = some suite failed, 2 = configuration error.

#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsix/verify.hpp"

namespace {

std::complex<double> parse_complex(const std::string& s) {
  // "re,im" or plain "re"
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) return {std::stod(s), 0.0};
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("expected 're' or 're,im', got '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qsix-verify: six-vertex transfer-matrix and Q-operator identity "
      "checks at machine precision"};

  qsix::verify::RunConfig cfg;
  cfg.sectors.clear();
  cfg.suites.clear();

  int sites = 2;
  std::vector<int> sectors;
  int sector_max = -1;
  int spin_int = -1;
  std::string q_str = "0.55,0.08";
  std::string zeta_str = "0.8,0.3";
  std::string phi_str = "2.4,0.2";
  std::vector<std::string> lambda_strs;
  std::string lambda_circle;
  double trunc_tol = 1e-14;
  long trunc_max = 512;
  std::string suites_csv = "all";
  std::string out_path, dump_path;
  bool precision_warn = false;

  app.add_option("--sites", sites, "Number of lattice sites M")
      ->capture_default_str();
  auto* opt_sectors =
      app.add_option("--sectors", sectors,
                     "Charge sectors l to run (comma separated)")
          ->delimiter(',');
  auto* opt_sector_max = app.add_option(
      "--sector-max", sector_max, "Run all sectors l = 0..L");
  opt_sectors->excludes(opt_sector_max);
  auto* opt_spin = app.add_option(
      "--spin-int", spin_int, "Integer spin I (finite-dimensional mode)");
  auto* opt_zeta = app.add_option(
      "--zeta", zeta_str, "zeta as re,im (generic complex-spin mode)");
  opt_spin->excludes(opt_zeta);
  app.add_option("--q", q_str, "q as re,im (0 < |q| < 1)")
      ->capture_default_str();
  app.add_option("--phi", phi_str, "Horizontal field phi as re,im")
      ->capture_default_str();
  app.add_option("--lambda", lambda_strs,
                 "Spectral parameter re,im (repeatable)");
  app.add_option("--lambda-circle", lambda_circle,
                 "Lambda grid of n points on the circle |lambda| = r, as "
                 "'r,n'");
  app.add_option("--trunc-tol", trunc_tol, "Fock trace truncation tolerance")
      ->capture_default_str();
  app.add_option("--trunc-max", trunc_max, "Fock trace term bound")
      ->capture_default_str();
  app.add_option("--suites", suites_csv,
                 "Comma separated suite list (tq, wronskian, commute, "
                 "factorize, inversion, asymptotics, genfun, askeyroy, "
                 "bethe, all)")
      ->capture_default_str();
  app.add_option("--out", out_path, "Write the JSON report to this path");
  app.add_option("--dump-matrices", dump_path,
                 "Dump operator matrices as CSV under this directory");
  app.add_flag("--precision-warn", precision_warn,
               "Warn when q is close to a root of unity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.sites = sites;
    if (sector_max >= 0) {
      for (int l = 0; l <= sector_max; ++l) cfg.sectors.push_back(l);
    } else if (!sectors.empty()) {
      cfg.sectors = sectors;
    } else {
      const int top = (spin_int >= 0) ? std::min(3, spin_int * sites) : 3;
      for (int l = 0; l <= top; ++l) cfg.sectors.push_back(l);
    }
    if (spin_int >= 0) cfg.spin_I = spin_int;
    cfg.q = parse_complex(q_str);
    cfg.zeta = parse_complex(zeta_str);
    cfg.phi = parse_complex(phi_str);
    if (!lambda_circle.empty()) {
      if (!lambda_strs.empty())
        throw qsix::verify::ConfigError(
            "config: --lambda and --lambda-circle are exclusive");
      const auto comma = lambda_circle.find(',');
      if (comma == std::string::npos)
        throw qsix::verify::ConfigError("config: --lambda-circle wants 'r,n'");
      const double r = std::stod(lambda_circle.substr(0, comma));
      const int n = std::stoi(lambda_circle.substr(comma + 1));
      if (r <= 0 || n <= 0)
        throw qsix::verify::ConfigError("config: bad --lambda-circle values");
      for (int k = 0; k < n; ++k) {
        const double th = 2.0 * M_PI * k / n + 0.3;  // offset avoids axes
        cfg.lambdas.push_back({r * std::cos(th), r * std::sin(th)});
      }
    } else if (!lambda_strs.empty()) {
      cfg.lambdas.clear();
      for (const auto& s : lambda_strs) cfg.lambdas.push_back(parse_complex(s));
    }
    cfg.policy.tol = trunc_tol;
    cfg.policy.n_max = trunc_max;
    {
      cfg.suites.clear();
      std::stringstream ss(suites_csv);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) cfg.suites.push_back(item);
    }
    cfg.out_path = out_path;
    cfg.dump_matrices_path = dump_path;
    cfg.precision_warn = precision_warn;

    const qsix::verify::SuiteReport report = qsix::verify::run_suite(cfg);
    const std::string json = report.to_json();
    if (out_path.empty()) {
      std::cout << json << "\n";
    } else {
      std::ofstream f(out_path);
      if (!f) throw qsix::verify::ConfigError("config: cannot write " + out_path);
      f << json << "\n";
      int passed = 0;
      for (const auto& r : report.records) passed += r.pass ? 1 : 0;
      std::cout << "wrote " << out_path << ": " << passed << "/"
                << report.records.size() << " suites passed\n";
    }
    return report.all_pass() ? 0 : 1;
  } catch (const qsix::verify::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const qsix::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
