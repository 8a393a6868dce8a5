#include "tmat/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tmat/basis.hpp"
#include "tmat/errors.hpp"
#include "tmat/params.hpp"
#include "tmat/tmatrix.hpp"

#ifndef TMAT_VERSION
#define TMAT_VERSION "0.0.0"
#endif

namespace tmat::cli {
namespace {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  int l = 0;
  std::optional<int> n_max;
  std::optional<int> l_max;
  int N = 40;
  std::string sigma = "-1";
  std::vector<double> z_parts;
  std::optional<double> energy;
  std::string gamma = "1";
  double alpha = 1.0;
  double mu = 1.0;
  double hbar = 1.0;
  std::optional<double> tol;
  std::string format = "csv";
  std::optional<std::string> out;
  bool strict = false;
  bool hydrogen = false;
  std::vector<double> k_parts;
  std::vector<double> p_parts;
  std::vector<double> window = {0.05, 1.5};

  // Resolved values.
  std::optional<cd> z;
  PhysicalSystem sys;
  bool auto_special = false;
};

constexpr const char* kUsage =
    "usage: tmat {basis-check|potential-converge|tau|pole-scan} [--l INT] [--n-max INT] [--l-max INT] [--N INT]\n"
    "            [--sigma {+1,-1}] [--z RE,IM | --energy E] [--gamma FLOAT|auto-special] [--alpha F] [--mu F]\n"
    "            [--hbar F] [--tol F] [--format csv|json] [--out PATH] [--strict] [--config FILE] [--hydrogen]\n"
    "run 'tmat --help' for details\n";

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string name;
  double value;
  double tol;
  bool pass;
};

struct Report {
  json results = json::object();
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  bool tolerance_failure = false;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

json cjson(cd v) { return json{{"re", v.real()}, {"im", v.imag()}}; }


MomentumVector polar(double r, double theta, double phi) {
  return {r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), r * std::cos(theta)};
}

double tolerance(const RunConfig& cfg, double fallback) { return cfg.tol.value_or(fallback); }

void resolve(RunConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) throw ConfigFailure(std::string(name) + " must be positive and finite");
  };
  positive(cfg.alpha, "--alpha");
  positive(cfg.mu, "--mu");
  positive(cfg.hbar, "--hbar");
  if (cfg.tol) positive(*cfg.tol, "--tol");
  if (cfg.l < 0) throw ConfigFailure("--l must be >= 0");
  if (cfg.n_max && *cfg.n_max < 0) throw ConfigFailure("--n-max must be >= 0");
  if (cfg.l_max && *cfg.l_max < 0) throw ConfigFailure("--l-max must be >= 0");
  if (cfg.N < 2) throw ConfigFailure("--N must be >= 2");

  if (!cfg.z_parts.empty()) {
    const auto& v = cfg.z_parts;
    if (v.size() > 2) throw ConfigFailure("--z takes RE or RE,IM");
    cfg.z = cd(v[0], v.size() == 2 ? v[1] : 0.0);
  } else if (cfg.energy) {
    positive(*cfg.energy, "--energy");
    cfg.z = cd(-*cfg.energy, 0.0);
  }

  cfg.sys.alpha = cfg.alpha;
  cfg.sys.mu = cfg.mu;
  cfg.sys.hbar = cfg.hbar;
  cfg.sys.sigma = cfg.sigma == "+1" || cfg.sigma == "1" ? 1 : -1;
  if (cfg.gamma == "auto-special") {
    if (!cfg.z || cfg.z->imag() != 0.0 || cfg.z->real() >= 0.0)
      throw ConfigFailure("--gamma auto-special needs a real negative --z or an --energy");
    cfg.sys = with_special_gamma(cfg.sys, -cfg.z->real());
    cfg.auto_special = true;
  } else {
    double g = 0.0;
    try {
      std::size_t used = 0;
      g = std::stod(cfg.gamma, &used);
      if (used != cfg.gamma.size()) throw std::invalid_argument(cfg.gamma);
    } catch (const std::exception&) {
      throw ConfigFailure("--gamma takes a number or auto-special");
    }
    positive(g, "--gamma");
    cfg.sys.gamma = g;
  }
  cfg.sys.validate();
}

json config_json(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["l"] = cfg.l;
  j["n_max"] = cfg.n_max ? json(*cfg.n_max) : json(nullptr);
  j["l_max"] = cfg.l_max ? json(*cfg.l_max) : json(nullptr);
  j["N"] = cfg.N;
  j["sigma"] = cfg.sys.sigma;
  j["z"] = cfg.z ? cjson(*cfg.z) : json(nullptr);
  j["gamma"] = cfg.sys.gamma;
  j["gamma_mode"] = cfg.auto_special ? "auto-special" : "fixed";
  j["alpha"] = cfg.sys.alpha;
  j["mu"] = cfg.sys.mu;
  j["hbar"] = cfg.sys.hbar;
  j["tol"] = cfg.tol ? json(*cfg.tol) : json(nullptr);
  j["strict"] = cfg.strict;
  return j;
}

void add_check(Report& r, std::string name, double value, double tol, bool exit_on_fail = true) {
  const bool pass = value <= tol;
  r.checks.push_back({std::move(name), value, tol, pass});
  if (!pass && exit_on_fail) r.tolerance_failure = true;
}

Report cmd_basis_check(const RunConfig& cfg) {
  const int n_max = cfg.n_max.value_or(6);
  const int l_max = cfg.l_max.value_or(3);
  const double tol = tolerance(cfg, 1e-8);
  const double g = cfg.sys.gamma;
  const double g3 = g * g * g;

  std::vector<SpectralIndex> idx;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m)
      for (int n = 0; n <= n_max; ++n) idx.push_back({n, l, m});
  const int M = static_cast<int>(idx.size());

  Report r;
  r.header = {"n1", "l1", "m1", "n2", "l2", "m2", "re", "im", "expected", "defect"};
  std::vector<std::vector<double>> defect(M, std::vector<double>(M, 0.0));
  double worst = 0.0;
  double worst_diag = 0.0;
  for (int i = 0; i < M; ++i) {
    for (int j = i; j < M; ++j) {
      const cd v = basis_inner_product(idx[i], idx[j], g);
      const double expected = i == j ? g3 : 0.0;
      const double d = std::abs(v - expected) / g3;
      defect[i][j] = defect[j][i] = d;
      worst = std::max(worst, d);
      if (i == j) worst_diag = std::max(worst_diag, d);
      const auto& a = idx[i];
      const auto& b = idx[j];
      r.rows.push_back({std::to_string(a.n), std::to_string(a.l), std::to_string(a.m), std::to_string(b.n),
                        std::to_string(b.l), std::to_string(b.m), fmt(v.real()), fmt(v.imag()), fmt(expected),
                        fmt(d)});
    }
  }
  json indices = json::array();
  for (const auto& s : idx) indices.push_back({s.n, s.l, s.m});
  r.results["indices"] = indices;
  r.results["defect_matrix"] = defect;
  r.results["max_defect"] = worst;
  r.results["max_diagonal_defect"] = worst_diag;
  add_check(r, "max orthonormality defect", worst, tol);
  return r;
}

Report cmd_potential_converge(const RunConfig& cfg) {
  const int n_max = cfg.n_max.value_or(40);
  const int l_max = cfg.l_max.value_or(10);
  const double tol = tolerance(cfg, 1e-2);
  if (!cfg.k_parts.empty() && cfg.k_parts.size() != 3) throw ConfigFailure("--k needs X,Y,Z");
  if (!cfg.p_parts.empty() && cfg.p_parts.size() != 3) throw ConfigFailure("--p needs X,Y,Z");
  // The default kinematics are off-forward with a generic angle.
  const MomentumVector k =
      cfg.k_parts.empty() ? polar(0.5, 0.3, 0.1) : MomentumVector(cfg.k_parts[0], cfg.k_parts[1], cfg.k_parts[2]);
  const MomentumVector p =
      cfg.p_parts.empty() ? polar(2.0, 1.5, 1.2) : MomentumVector(cfg.p_parts[0], cfg.p_parts[1], cfg.p_parts[2]);

  const double exact = potential_element(cfg.sys, k, p);
  std::vector<int> n_grid;
  for (int n = std::min(10, n_max); n < n_max; n += 10) n_grid.push_back(n);
  n_grid.push_back(n_max);

  Report r;
  r.header = {"n_max", "l_max", "partial_sum", "exact", "rel_err"};
  json table = json::array();
  double final_err = 0.0;
  for (int nm : n_grid) {
    for (int lm = 0; lm <= l_max; ++lm) {
      const double s = potential_expansion(cfg.sys, k, p, nm, lm).value;
      const double err = std::abs(s - exact) / std::abs(exact);
      r.rows.push_back({std::to_string(nm), std::to_string(lm), fmt(s), fmt(exact), fmt(err)});
      table.push_back({{"n_max", nm}, {"l_max", lm}, {"partial_sum", s}, {"exact", exact}, {"rel_err", err}});
      if (nm == n_max && lm == l_max) final_err = err;
    }
  }

  // The n-tail is judged against the l <= l_max partial-wave target; against
  // the full potential the error floors at the l-truncation level.
  json monotone = nullptr;
  if (std::abs(k.norm() - p.norm()) > 0.0 && k.norm() > 0.0 && p.norm() > 0.0) {
    double target = 0.0;
    for (int l = 0; l <= l_max; ++l) target += potential_partial_wave(cfg.sys, k, p, l);
    bool decreasing = true;
    double previous = INFINITY;
    for (int nm : n_grid) {
      const double e = std::abs(potential_expansion(cfg.sys, k, p, nm, l_max).value - target);
      decreasing = decreasing && e < previous;
      previous = e;
    }
    monotone = decreasing;
    if (!decreasing) r.warnings.push_back("n-truncation error is not monotone over the n_max grid");
  }
  r.results["k"] = {k.x(), k.y(), k.z()};
  r.results["p"] = {p.x(), p.y(), p.z()};
  r.results["table"] = table;
  r.results["final_rel_err"] = final_err;
  r.results["monotone_tail"] = monotone;
  add_check(r, "relative error at (n_max, l_max)", final_err, tol);
  return r;
}

Report cmd_tau(const RunConfig& cfg) {
  if (!cfg.z) throw ConfigFailure("tau needs --z RE,IM or --energy E");
  const double tol = tolerance(cfg, 1e-6);
  const int N = cfg.N;
  const int sigma = cfg.sys.sigma;
  const auto state = to_dimensionless(cfg.sys, *cfg.z, BranchSelection::TBranch);

  Report r;
  const TauRoute primary = state.special_point() ? TauRoute::DiagonalSpecial : TauRoute::FactorizedCGC;
  auto route_name = [](TauRoute t) {
    switch (t) {
      case TauRoute::DirectSolve: return "direct-solve";
      case TauRoute::FactorizedCGC: return "factorized-CGC";
      case TauRoute::DiagonalSpecial: return "diagonal-special";
    }
    return "";
  };

  TauResult direct;
  try {
    direct = tau_matrix(cfg.l, state, sigma, N, TauRoute::DirectSolve);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularShift) throw;
    std::string msg = e.what();
    if (sigma == -1 && cfg.z->imag() == 0.0 && cfg.z->real() < 0.0) {
      const double Eb = binding_energy(cfg.sys);
      const double E = -cfg.z->real();
      int best = 0;
      for (int n = 1; n < 4 * N; ++n)
        if (std::abs(hydrogen_level(n, cfg.l, Eb) - E) < std::abs(hydrogen_level(best, cfg.l, Eb) - E)) best = n;
      msg += "; nearest pole E_{" + std::to_string(best) + "," + std::to_string(cfg.l) +
             "} = " + fmt(hydrogen_level(best, cfg.l, Eb));
    }
    throw Error(ErrorKind::SingularShift, msg.substr(msg.find(": ") + 2));
  }
  const TauResult main = tau_matrix(cfg.l, state, sigma, N, primary);

  // Truncation reaches about log(tol)/log|omega2| rows in from the edge.
  const cd w = (state.sqrt_y - cd(0.0, 1.0)) / (state.sqrt_y + cd(0.0, 1.0));
  const double decay = std::abs(w);
  int edge = N;
  if (decay < 1.0) edge = decay == 0.0 ? 1 : static_cast<int>(std::ceil(std::log(tol) / std::log(decay))) + 1;
  const int interior = std::max(0, N - edge);

  double discrepancy = 0.0;
  double scale = 0.0;
  for (int n = 0; n < interior; ++n)
    for (int m = 0; m < interior; ++m) {
      discrepancy = std::max(discrepancy, std::abs(main.tau(n, m) - direct.tau(n, m)));
      scale = std::max(scale, std::abs(main.tau(n, m)));
    }
  if (scale > 0.0) discrepancy /= scale;
  double asymmetry = (main.tau - main.tau.transpose()).cwiseAbs().maxCoeff();

  r.header = {"n", "m", "re", "im"};
  json tau = json::array();
  for (int n = 0; n < N; ++n) {
    json row = json::array();
    for (int m = 0; m < N; ++m) {
      r.rows.push_back({std::to_string(n), std::to_string(m), fmt(main.tau(n, m).real()), fmt(main.tau(n, m).imag())});
      row.push_back(cjson(main.tau(n, m)));
    }
    tau.push_back(row);
  }
  r.results["route"] = route_name(primary);
  r.results["cross_check_route"] = route_name(TauRoute::DirectSolve);
  r.results["y"] = cjson(state.y);
  r.results["rho"] = state.rho;
  r.results["omega2_modulus"] = decay;
  r.results["interior"] = interior;
  r.results["max_interior_discrepancy"] = discrepancy;
  r.results["rcond"] = direct.rcond;
  r.results["tau"] = tau;

  if (interior == 0) {
    r.warnings.push_back("SlowConvergence: N = " + std::to_string(N) +
                         " leaves no interior block at this tolerance (|omega2| = " + fmt(decay) + ")");
    if (cfg.strict) r.tolerance_failure = true;
  } else {
    add_check(r, "max interior route discrepancy", discrepancy, tol);
  }
  add_check(r, "symmetry", asymmetry, 1e-10 * std::max(1.0, main.tau.cwiseAbs().maxCoeff()));
  return r;
}

Report cmd_pole_scan(const RunConfig& cfg) {
  if (cfg.sys.sigma != -1)
    throw ConfigFailure("pole-scan needs --sigma -1: the repulsive case has no poles by construction");
  const double tol = tolerance(cfg, 1e-8);
  const int n_hi = cfg.n_max.value_or(3);
  const auto& win = cfg.window;
  if (win.size() != 2 || !(win[0] > 0.0) || !(win[1] > win[0]))
    throw ConfigFailure("--window takes LO,HI with 0 < LO < HI (units of E_b)");
  const double Eb = binding_energy(cfg.sys);
  const auto poles = pole_scan(cfg.l, 0, n_hi, cfg.sys, win[0] * Eb, win[1] * Eb);

  Report r;
  r.header = {"n", "l", "energy", "expected", "rel_err", "residue", "residue_sqrt_form", "residue_rel_err"};
  json list = json::array();
  double worst = 0.0;
  double worst_direct = 0.0;
  double worst_residue = 0.0;
  double worst_sqrt_form = 0.0;
  for (const auto& p : poles) {
    const double rel = std::abs(p.energy - p.expected) / p.expected;
    const double sqrt_form = -2.0 * std::sqrt(p.expected * p.expected * p.expected);
    const double res_rel = std::abs(p.residue - sqrt_form) / std::abs(sqrt_form);
    worst = std::max(worst, rel);
    worst_direct = std::max(worst_direct, p.direct_check);
    worst_residue = std::max(worst_residue, std::abs(p.residue + 2.0 * p.expected) / (2.0 * p.expected));
    worst_sqrt_form = std::max(worst_sqrt_form, res_rel);
    r.rows.push_back({std::to_string(p.n), std::to_string(p.l), fmt(p.energy), fmt(p.expected), fmt(rel),
                      fmt(p.residue), fmt(sqrt_form), fmt(res_rel)});
    list.push_back({{"n", p.n},
                    {"l", p.l},
                    {"energy", p.energy},
                    {"expected", p.expected},
                    {"rel_err", rel},
                    {"residue", p.residue},
                    {"residue_sqrt_form", sqrt_form},
                    {"residue_rel_err", res_rel},
                    {"direct_check", p.direct_check}});
  }
  r.results["binding_energy"] = Eb;
  r.results["window"] = {win[0] * Eb, win[1] * Eb};
  r.results["poles"] = list;
  add_check(r, "max pole position rel_err", worst, tol);
  add_check(r, "max residue deviation from -2 E_p", worst_residue, 1e-6, false);
  add_check(r, "max residue deviation from -2 sqrt(E_p^3)", worst_sqrt_form, 1e-6, false);
  add_check(r, "max dense-route deviation next to the pole", worst_direct, 1e-6, false);
  return r;
}

void write_report(const RunConfig& cfg, const Report& r, std::ostream& out, std::ostream& err) {
  if (cfg.format == "json") {
    json checks = json::array();
    for (const auto& c : r.checks)
      checks.push_back({{"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"pass", c.pass}});
    json doc;
    doc["config"] = config_json(cfg);
    doc["results"] = r.results;
    doc["diagnostics"] = {{"checks", checks}, {"warnings", r.warnings}};
    doc["version"] = TMAT_VERSION;
    out << doc.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < r.header.size(); ++i) out << (i ? "," : "") << r.header[i];
    out << '\n';
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
  }
  for (const auto& c : r.checks)
    err << "# " << c.name << ": " << brief(c.value) << " (tol " << brief(c.tol) << ") " << (c.pass ? "PASS" : "FAIL")
        << '\n';
  for (const auto& w : r.warnings) err << "# warning: " << w << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Coulomb T-matrix in a Sturmian-type momentum basis", "tmat"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "key=value file; command-line flags override it");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());

  app.add_option("--l", cfg.l, "partial wave");
  app.add_option("--n-max", cfg.n_max, "largest radial index");
  app.add_option("--l-max", cfg.l_max, "largest partial wave");
  app.add_option("--N", cfg.N, "truncation size of the tau matrix");
  app.add_option("--sigma", cfg.sigma, "+1 repulsive, -1 attractive")->check(CLI::IsMember({"+1", "1", "-1"}));
  auto* zopt = app.add_option("--z", cfg.z_parts, "complex energy RE,IM")->delimiter(',')->expected(1, 2);
  app.add_option("--energy", cfg.energy, "positive E, sets z = -E")->excludes(zopt);
  app.add_option("--gamma", cfg.gamma, "basis scale or auto-special");
  auto* aopt = app.add_option("--alpha", cfg.alpha, "coupling strength");
  auto* mopt = app.add_option("--mu", cfg.mu, "reduced mass");
  auto* hopt = app.add_option("--hbar", cfg.hbar, "Planck constant");
  app.add_option("--tol", cfg.tol, "tolerance (command-specific default)");
  app.add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", cfg.out, "write the report here instead of stdout");
  app.add_flag("--strict", cfg.strict, "treat slow-convergence warnings as failures");
  app.add_flag("--hydrogen", cfg.hydrogen, "alpha, mu, hbar in eV and Angstrom for hydrogen");
  app.add_option("--k", cfg.k_parts, "potential-converge: first momentum X,Y,Z")->delimiter(',')->expected(3);
  app.add_option("--p", cfg.p_parts, "potential-converge: second momentum X,Y,Z")->delimiter(',')->expected(3);
  app.add_option("--window", cfg.window, "pole-scan: energy window LO,HI in units of E_b")->delimiter(',')->expected(2);

  for (const char* name : {"basis-check", "potential-converge", "tau", "pole-scan"})
    app.add_subcommand(name)->fallthrough();
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Success;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return Success;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kUsage;
    return ConfigError;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.hydrogen) {
    if (aopt->count() == 0) cfg.alpha = 14.399645;
    if (mopt->count() == 0) cfg.mu = 510998.95;
    if (hopt->count() == 0) cfg.hbar = 1973.2698;
  }

  Report report;
  try {
    resolve(cfg);
    if (cfg.command == "basis-check") report = cmd_basis_check(cfg);
    else if (cfg.command == "potential-converge") report = cmd_potential_converge(cfg);
    else if (cfg.command == "tau") report = cmd_tau(cfg);
    else report = cmd_pole_scan(cfg);
  } catch (const ConfigFailure& e) {
    err << "error: " << e.what() << "\n" << kUsage;
    return ConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_config_error() ? ConfigError : NumericalFailure;
  }

  if (cfg.out) {
    std::ofstream file(*cfg.out, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << *cfg.out << '\n';
      return ConfigError;
    }
    write_report(cfg, report, file, err);
  } else {
    write_report(cfg, report, out, err);
  }
  return report.tolerance_failure ? ToleranceFailure : Success;
}

}  // namespace tmat::cli
