#pragma once

// JSON run configuration: system selection (built-in or custom expression
// chart), integration settings, output selection and check parameters.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "checks.hpp"
#include "json.hpp"

namespace lp {

/// Invalid or unreadable configuration. Maps to exit status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

using Json = nlohmann::json;

struct IntegrateBlock {
  double t0 = 0.0;
  double t1 = 10.0;
  double dt = 1e-3;
  Method method = Method::RK4;
  std::string formulation = "auto";  // auto | coords | connection
  std::optional<PhasePoint> start;
};

struct OutputBlock {
  std::string path = "trajectory.csv";
  std::vector<std::string> observables;  // empty: all observables of the system
};

struct CheckBlock {
  std::uint64_t seed = 42;
  StructureSuiteOptions structure;
  EquivalenceOptions equivalence;
  BracketLawOptions laws;
  RelationOptions relations;
  VariationSuiteOptions variation;
  ElpSuiteOptions elp;
};

struct RunConfig {
  SystemBundle system;
  bool custom_connection = false;
  IntegrateBlock integrate;
  OutputBlock output;
  CheckBlock check;

  Formulation formulation() const {
    const bool use_conn = integrate.formulation == "connection" ||
                          (integrate.formulation == "auto" && custom_connection);
    return use_conn ? Formulation::connection(system.conn) : Formulation::coords();
  }
};

namespace config_detail {

inline void allow_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError("unknown field " + where + "." + k);
}

inline double number(const Json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

inline int count(const Json& obj, const std::string& key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(where + "." + key + " must be a positive integer");
  return v.get<int>();
}

inline double positive(const Json& obj, const std::string& key, const std::string& where, double fallback) {
  const double x = number(obj, key, where, fallback);
  if (!(x > 0.0)) throw ConfigError(where + "." + key + " must be positive");
  return x;
}

inline std::string text(const Json& obj, const std::string& key, const std::string& where, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ConfigError(where + "." + key + " must be a string");
  return obj.at(key).get<std::string>();
}

inline Vec vector(const Json& v, const std::string& where, std::optional<int> size = std::nullopt) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ConfigError(where + " must be an array of numbers");
    out[static_cast<Eigen::Index>(k)] = v[k].get<double>();
  }
  if (size && out.size() != *size)
    throw ConfigError(where + " must have " + std::to_string(*size) + " entries");
  return out;
}

inline std::array<double, 3> triple(const Json& obj, const std::string& key, const std::string& where,
                                    std::array<double, 3> fallback) {
  if (!obj.contains(key)) return fallback;
  const Vec v = vector(obj.at(key), where + "." + key, 3);
  return {v[0], v[1], v[2]};
}

/// Compiles an expression given as a string or a number.
inline Expr expression(const Json& v, const Scope& scope, const std::string& where) {
  std::string src;
  if (v.is_string()) src = v.get<std::string>();
  else if (v.is_number()) return Expr::constant(v.get<double>());
  else throw ConfigError(where + " must be an expression string or a number");
  try {
    return parse_expression(src, scope);
  } catch (const ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

/// 1-based index in [1, limit].
inline int index(const Json& entry, const char* key, int limit, const std::string& where) {
  if (!entry.contains(key) || !entry.at(key).is_number_integer())
    throw ConfigError(where + "." + key + " must be an integer index");
  const int i = entry.at(key).get<int>();
  if (i < 1 || i > limit) throw ConfigError(where + "." + key + " out of range 1.." + std::to_string(limit));
  return i - 1;
}

inline PhasePoint start(const Json& v, int n, int m, const std::string& where) {
  allow_keys(v, where, {"q", "mu"});
  PhasePoint p;
  p.q = n == 0 && !v.contains("q") ? Vec(0) : vector(v.value("q", Json::array()), where + ".q", n);
  if (!v.contains("mu")) throw ConfigError(where + ".mu is required");
  p.mu = vector(v.at("mu"), where + ".mu", m);
  return p;
}

inline SystemBundle builtin(const Json& sys) {
  allow_keys(sys, "system", {"builtin", "params"});
  const std::string name = text(sys, "builtin", "system", "");
  const Json params = sys.value("params", Json::object());
  const std::string where = "system.params";
  try {
    if (name == "pendulum") {
      allow_keys(params, where, {});
      return build_pendulum();
    }
    if (name == "rigid_body") {
      allow_keys(params, where, {"inertia"});
      RigidBodyParams p;
      p.inertia = triple(params, "inertia", where, p.inertia);
      return build_rigid_body(p);
    }
    if (name == "heavy_top") {
      allow_keys(params, where, {"inertia", "mgl", "chi"});
      HeavyTopParams p;
      p.inertia = triple(params, "inertia", where, p.inertia);
      p.mgl = number(params, "mgl", where, p.mgl);
      p.chi = triple(params, "chi", where, p.chi);
      return build_heavy_top(p);
    }
    if (name == "charged_particle") {
      allow_keys(params, where, {"mass", "field", "charge"});
      ChargedParticleParams p;
      p.mass = number(params, "mass", where, p.mass);
      p.field = number(params, "field", where, p.field);
      p.charge = number(params, "charge", where, p.charge);
      return build_charged_particle(p);
    }
  } catch (const InputError& e) {
    throw ConfigError(std::string("system.params: ") + e.what());
  }
  std::string names;
  for (const auto& e : list_systems()) names += (names.empty() ? "" : ", ") + e.name;
  throw ConfigError("system.builtin: unknown system '" + name + "' (known: " + names + ")");
}

inline SystemBundle custom(const Json& c) {
  const std::string w = "system.custom";
  allow_keys(c, w,
             {"base_dim", "fiber_dim", "anchor", "structure", "hamiltonian", "metric", "potential", "observables",
              "starts", "name"});
  if (!c.contains("base_dim") || !c.at("base_dim").is_number_integer() || c.at("base_dim").get<int>() < 0)
    throw ConfigError(w + ".base_dim must be a non-negative integer");
  const int n = c.at("base_dim").get<int>();
  const int m = count(c, "fiber_dim", w, 0);
  if (m == 0) throw ConfigError(w + ".fiber_dim is required");
  const Scope base_scope{n, 0, 'p', false};
  const Scope phase_scope{n, m, 'p', false};

  SymbolicChart sym = detail::empty_chart(n, m);
  if (n > 0) {
    if (!c.contains("anchor") || !c.at("anchor").is_array() || static_cast<int>(c.at("anchor").size()) != n)
      throw ConfigError(w + ".anchor must be an array of " + std::to_string(n) + " rows");
    for (int i = 0; i < n; ++i) {
      const Json& row = c.at("anchor")[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<int>(row.size()) != m)
        throw ConfigError(w + ".anchor rows must have " + std::to_string(m) + " entries");
      for (int I = 0; I < m; ++I)
        detail::rho_entry(sym, i, I) = expression(row[static_cast<std::size_t>(I)], base_scope,
                                                  w + ".anchor[" + std::to_string(i + 1) + "][" +
                                                      std::to_string(I + 1) + "]");
    }
  }
  if (c.contains("structure")) {
    if (!c.at("structure").is_array()) throw ConfigError(w + ".structure must be an array of entries");
    for (const Json& e : c.at("structure")) {
      const std::string ew = w + ".structure[]";
      allow_keys(e, ew, {"k", "i", "j", "value"});
      const int K = index(e, "k", m, ew);
      const int I = index(e, "i", m, ew);
      const int J = index(e, "j", m, ew);
      if (I == J) throw ConfigError(ew + ": i and j must differ (C is antisymmetric)");
      if (!e.contains("value")) throw ConfigError(ew + ".value is required");
      const Expr v = expression(e.at("value"), base_scope, ew + ".value");
      detail::c_entry(sym, K, I, J) = v;
      detail::c_entry(sym, K, J, I) = -v;
    }
  }
  SystemBundle b;
  b.name = text(c, "name", w, "custom");
  b.alg = AlgebroidChart::from_expressions(std::move(sym));
  b.conn = TQConnection::zero(n, m);
  if (!c.contains("hamiltonian")) throw ConfigError(w + ".hamiltonian is required");
  b.H = ScalarField::from_expression(expression(c.at("hamiltonian"), phase_scope, w + ".hamiltonian"), n, m);
  if (c.contains("metric")) {
    const Json& g = c.at("metric");
    if (!g.is_array() || static_cast<int>(g.size()) != m) throw ConfigError(w + ".metric must be m×m");
    std::vector<Expr> entries;
    for (const Json& row : g) {
      if (!row.is_array() || static_cast<int>(row.size()) != m) throw ConfigError(w + ".metric must be m×m");
      for (const Json& v : row) entries.push_back(expression(v, base_scope, w + ".metric"));
    }
    b.gm = BundleMetric::from_expressions(n, m, std::move(entries));
  }
  if (c.contains("potential"))
    b.U = ScalarField::from_expression(expression(c.at("potential"), base_scope, w + ".potential"), n, 0);
  b.observables.push_back({"H", b.H, true});
  if (c.contains("observables")) {
    if (!c.at("observables").is_object()) throw ConfigError(w + ".observables must map names to expressions");
    for (const auto& [name, v] : c.at("observables").items()) {
      if (name == "H") throw ConfigError(w + ".observables: 'H' is reserved");
      b.observables.push_back(
          {name, ScalarField::from_expression(expression(v, phase_scope, w + ".observables." + name), n, m), true});
    }
  }
  if (c.contains("starts")) {
    if (!c.at("starts").is_array()) throw ConfigError(w + ".starts must be an array");
    for (const Json& s : c.at("starts")) b.starts.push_back(start(s, n, m, w + ".starts[]"));
  }
  if (b.starts.empty()) b.starts.push_back({Vec::Zero(n), Vec::Ones(m)});
  return b;
}

inline TQConnection connection(const Json& entries, int n, int m) {
  const std::string w = "connection";
  if (!entries.is_array()) throw ConfigError(w + " must be an array of entries");
  auto exprs = std::vector<Expr>(static_cast<std::size_t>(m * n * m), Expr::constant(0.0));
  const Scope scope{n, 0, 'p', false};
  for (const Json& e : entries) {
    const std::string ew = w + "[]";
    allow_keys(e, ew, {"k", "i", "j", "value"});
    const int K = index(e, "k", m, ew);
    const int i = index(e, "i", n, ew);
    const int J = index(e, "j", m, ew);
    if (!e.contains("value")) throw ConfigError(ew + ".value is required");
    exprs[static_cast<std::size_t>((K * n + i) * m + J)] = expression(e.at("value"), scope, ew + ".value");
  }
  return TQConnection::from_expressions(n, m, std::move(exprs));
}

inline void check_block(const Json& c, CheckBlock& out) {
  const std::string w = "check";
  allow_keys(c, w,
             {"seed", "samples", "states", "connections", "draws", "structure_tol", "equivalence_tol",
              "antisymmetry_tol", "leibniz_tol", "jacobi_tol", "equality_tol", "relations_tol", "variation",
              "elp"});
  if (c.contains("seed")) {
    if (!c.at("seed").is_number_unsigned()) throw ConfigError("check.seed must be a non-negative integer");
    out.seed = c.at("seed").get<std::uint64_t>();
  }
  out.structure.samples = count(c, "samples", w, out.structure.samples);
  out.structure.tol = positive(c, "structure_tol", w, out.structure.tol);
  out.equivalence.states = count(c, "states", w, out.equivalence.states);
  out.equivalence.connections = count(c, "connections", w, out.equivalence.connections);
  out.equivalence.tol = positive(c, "equivalence_tol", w, out.equivalence.tol);
  out.laws.draws = count(c, "draws", w, out.laws.draws);
  out.laws.antisymmetry_tol = positive(c, "antisymmetry_tol", w, out.laws.antisymmetry_tol);
  out.laws.leibniz_tol = positive(c, "leibniz_tol", w, out.laws.leibniz_tol);
  out.laws.jacobi_tol = positive(c, "jacobi_tol", w, out.laws.jacobi_tol);
  out.laws.equality_tol = positive(c, "equality_tol", w, out.laws.equality_tol);
  out.relations.tol = positive(c, "relations_tol", w, out.relations.tol);
  if (c.contains("variation")) {
    const Json& v = c.at("variation");
    const std::string vw = "check.variation";
    allow_keys(v, vw, {"t1", "dt", "variations", "normalized_tol", "rate_lo", "rate_hi", "perturbed_min"});
    auto& o = out.variation;
    o.t1 = positive(v, "t1", vw, o.t1);
    o.dt = positive(v, "dt", vw, o.dt);
    o.variations = count(v, "variations", vw, o.variations);
    o.normalized_tol = positive(v, "normalized_tol", vw, o.normalized_tol);
    o.rate_lo = positive(v, "rate_lo", vw, o.rate_lo);
    o.rate_hi = positive(v, "rate_hi", vw, o.rate_hi);
    o.perturbed_min = positive(v, "perturbed_min", vw, o.perturbed_min);
  }
  if (c.contains("elp")) {
    const Json& v = c.at("elp");
    const std::string ew = "check.elp";
    allow_keys(v, ew, {"states", "roundtrip_tol", "t1", "dt", "elp_tol"});
    auto& o = out.elp;
    o.states = count(v, "states", ew, o.states);
    o.roundtrip_tol = positive(v, "roundtrip_tol", ew, o.roundtrip_tol);
    o.t1 = positive(v, "t1", ew, o.t1);
    o.dt = positive(v, "dt", ew, o.dt);
    o.elp_tol = positive(v, "elp_tol", ew, o.elp_tol);
  }
}

}  // namespace config_detail

/// Builds a RunConfig from parsed JSON. Throws ConfigError naming the
/// offending field.
inline RunConfig load_config(const Json& j) {
  using namespace config_detail;
  allow_keys(j, "config", {"system", "connection", "sign", "integrate", "output", "check"});
  if (!j.contains("system")) throw ConfigError("system is required");
  const Json& sys = j.at("system");
  RunConfig rc;
  if (sys.is_object() && sys.contains("custom")) {
    allow_keys(sys, "system", {"custom"});
    try {
      rc.system = custom(sys.at("custom"));
    } catch (const InputError& e) {
      throw ConfigError(std::string("system.custom: ") + e.what());
    }
  } else {
    rc.system = builtin(sys);
  }
  const int n = rc.system.alg.base_dim();
  const int m = rc.system.alg.fiber_dim();
  if (j.contains("connection")) {
    rc.system.conn = connection(j.at("connection"), n, m);
    rc.custom_connection = true;
  }
  const std::string sign = text(j, "sign", "config", rc.system.sign == Sign::Minus ? "minus" : "plus");
  if (sign == "minus") rc.system.sign = Sign::Minus;
  else if (sign == "plus") rc.system.sign = Sign::Plus;
  else throw ConfigError("sign must be \"minus\" or \"plus\"");

  if (j.contains("integrate")) {
    const Json& in = j.at("integrate");
    const std::string w = "integrate";
    allow_keys(in, w, {"t0", "t1", "dt", "method", "formulation", "start"});
    auto& b = rc.integrate;
    b.t0 = number(in, "t0", w, b.t0);
    b.t1 = number(in, "t1", w, b.t1);
    b.dt = positive(in, "dt", w, b.dt);
    if (b.t1 < b.t0) throw ConfigError("integrate.t1 must not precede integrate.t0");
    if ((b.t1 - b.t0) / b.dt > kMaxSteps) throw ConfigError("integrate.dt gives more than 1e8 steps");
    const std::string method = text(in, "method", w, "rk4");
    if (method == "rk4") b.method = Method::RK4;
    else if (method == "midpoint") b.method = Method::ImplicitMidpoint;
    else throw ConfigError("integrate.method must be \"rk4\" or \"midpoint\"");
    b.formulation = text(in, "formulation", w, "auto");
    if (b.formulation != "auto" && b.formulation != "coords" && b.formulation != "connection")
      throw ConfigError("integrate.formulation must be \"auto\", \"coords\" or \"connection\"");
    if (in.contains("start")) b.start = start(in.at("start"), n, m, "integrate.start");
  }
  if (j.contains("output")) {
    const Json& out = j.at("output");
    allow_keys(out, "output", {"path", "observables"});
    rc.output.path = text(out, "path", "output", rc.output.path);
    if (rc.output.path.empty()) throw ConfigError("output.path must not be empty");
    if (out.contains("observables")) {
      if (!out.at("observables").is_array()) throw ConfigError("output.observables must be an array of names");
      for (const Json& v : out.at("observables")) {
        if (!v.is_string()) throw ConfigError("output.observables must be an array of names");
        const std::string name = v.get<std::string>();
        bool known = false;
        for (const auto& o : rc.system.observables) known = known || o.name == name;
        if (!known) throw ConfigError("output.observables: unknown observable '" + name + "'");
        rc.output.observables.push_back(name);
      }
    }
  }
  if (rc.output.observables.empty())
    for (const auto& o : rc.system.observables) rc.output.observables.push_back(o.name);
  if (j.contains("check")) check_block(j.at("check"), rc.check);
  return rc;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return load_config(j);
}

}  // namespace lp
