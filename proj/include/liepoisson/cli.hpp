#pragma once

// Subcommand implementations behind the command-line tool. Each returns the
// process exit status: 0 success, 1 check failure, 2 configuration or I/O error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace lp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

struct CliOptions {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate",         "check-structure", "check-bracket",
                                              "check-equivalence", "variation-test",  "elp-test",
                                              "list-systems"};
  return names;
}

/// %.17g, the round-trip representation used in CSV output.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Header `t,q_1..q_n,mu_1..mu_m,a_1..a_m,<observables>`, one row per node.
inline void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& observables) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().q.size());
  const int m = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().mu.size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",q_" << i;
  for (int I = 1; I <= m; ++I) os << ",mu_" << I;
  for (int I = 1; I <= m; ++I) os << ",a_" << I;
  std::vector<const std::vector<double>*> series;
  for (const auto& name : observables) {
    os << ',' << name;
    series.push_back(traj.observable(name));
  }
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_number(traj.times[k]);
    for (int i = 0; i < n; ++i) os << ',' << format_number(traj.states[k].q[i]);
    for (int I = 0; I < m; ++I) os << ',' << format_number(traj.states[k].mu[I]);
    for (int I = 0; I < m; ++I) os << ',' << format_number(traj.apath[k][I]);
    for (const auto* s : series) os << ',' << format_number(s ? (*s)[k] : 0.0);
    os << '\n';
  }
}

namespace cli_detail {

inline std::filesystem::path out_file(const CliOptions& opt, const std::string& name) {
  std::filesystem::path dir(opt.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + opt.out + "': " + ec.message());
  return dir / name;
}

inline void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  body(f);
  if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

inline int emit_report(const std::string& cmd, Json report, const CliOptions& opt, std::ostream& out) {
  const bool pass = report.value("pass", false);
  const auto path = out_file(opt, cmd + ".json");
  const std::string text = report.dump(2) + "\n";
  write_text(path, [&](std::ostream& f) { f << text; });
  if (!opt.quiet) out << text;
  return pass ? kExitOk : kExitCheckFailed;
}

inline int simulate(const RunConfig& rc, const CliOptions& opt, std::ostream& out, std::ostream& err) {
  const auto& sys = rc.system;
  const PhasePoint start = rc.integrate.start.value_or(sys.starts.front());
  std::vector<NamedField> observables;
  for (const auto& name : rc.output.observables)
    for (const auto& o : sys.observables)
      if (o.name == name) observables.push_back({o.name, o.field});
  const auto path = out_file(opt, rc.output.path);
  Trajectory traj;
  int status = kExitOk;
  try {
    traj = integrate(sys.alg, sys.H, start, rc.integrate.t0, rc.integrate.t1, rc.integrate.dt, rc.integrate.method,
                     sys.sign, rc.formulation(), observables);
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << " (trajectory truncated)\n";
    traj = e.partial();
    status = kExitCheckFailed;
  }
  write_text(path, [&](std::ostream& f) { write_csv(f, traj, rc.output.observables); });
  if (!opt.quiet) out << "wrote " << traj.size() << " rows to " << path.string() << "\n";
  return status;
}

inline Json structure_json(const StructureReport& r) {
  return {{"anchor_residual", r.anchor_residual},
          {"jacobi_residual", r.jacobi_residual},
          {"antisymmetry_residual", r.antisymmetry_residual},
          {"samples", r.samples},
          {"pass", r.pass}};
}

}  // namespace cli_detail

inline void list_systems(std::ostream& out) {
  for (const auto& e : list_systems()) out << e.name << "  " << e.params << "\n";
}

/// Runs one subcommand against the configuration named in `opt`.
inline int run_command(const std::string& cmd, const CliOptions& opt, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  if (cmd == "list-systems") {
    list_systems(out);
    return kExitOk;
  }
  if (std::find(subcommands().begin(), subcommands().end(), cmd) == subcommands().end()) {
    err << "error: unknown subcommand '" << cmd << "'\n";
    return kExitConfig;
  }
  try {
    if (opt.config.empty()) throw ConfigError("--config is required for " + cmd);
    const RunConfig rc = load_config_file(opt.config);
    if (cmd == "simulate") {
      try {
        return simulate(rc, opt, out, err);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckFailed;
      }
    }

    const std::uint64_t seed = opt.seed.value_or(rc.check.seed);
    Rng rng(seed);
    const SystemBundle& sys = rc.system;
    Json report{{"command", cmd}, {"system", sys.name}, {"seed", seed}};
    try {
      if (cmd == "check-structure") {
        const StructureReport r = structure_suite(sys, rng, rc.check.structure);
        report.update(structure_json(r));
        report["tol"] = rc.check.structure.tol;
      } else if (cmd == "check-equivalence") {
        const EquivalenceReport r = equivalence_suite(sys, rng, rc.check.equivalence);
        report["max_diff"] = r.max_diff;
        report["gamma_spread"] = r.gamma_spread;
        report["states"] = rc.check.equivalence.states;
        report["connections"] = rc.check.equivalence.connections;
        report["tol"] = rc.check.equivalence.tol;
        report["pass"] = r.pass;
      } else if (cmd == "check-bracket") {
        const BracketLawReport laws = bracket_law_suite(sys, rng, rc.check.laws);
        const BracketReport rel = relations_suite(sys, rng, rc.check.relations);
        report["antisymmetry"] = laws.antisymmetry;
        report["leibniz"] = laws.leibniz;
        report["jacobi"] = laws.jacobi;
        report["coords_vs_connection"] = laws.coords_vs_connection;
        report["relation_xy"] = rel.xy_residual;
        report["relation_xg"] = rel.xg_residual;
        report["relation_fg"] = rel.fg_residual;
        report["pass"] = laws.pass && rel.pass;
      } else if (cmd == "variation-test") {
        const VariationReport r = variation_suite(sys, rng, rc.check.variation);
        report["max_normalized"] = r.max_normalized;
        report["max_normalized_half_dt"] = r.max_normalized_half;
        report["min_rate"] = r.min_rate;
        report["max_rate"] = r.max_rate;
        report["aggregate_rate"] = r.aggregate_rate;
        report["perturbed_max"] = r.perturbed_max;
        report["dt"] = rc.check.variation.dt;
        report["pass"] = r.pass;
      } else if (cmd == "elp-test") {
        const ElpReport r = elp_suite(sys, rng, rc.check.elp);
        report["roundtrip"] = r.roundtrip;
        report["momentum_roundtrip"] = r.momentum;
        report["elp_residual"] = r.elp;
        report["pass"] = r.pass;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      report["error"] = e.what();
      report["pass"] = false;
    }
    return emit_report(cmd, report, opt, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace lp
