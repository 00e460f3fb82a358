#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsv/hsv.hpp"

using json = nlohmann::ordered_json;
using namespace hsv;

namespace {

// Bad input: parse errors, missing fields, backend/command mismatch. Exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Backend { rational, complex };

const char* backend_name(Backend b) { return b == Backend::rational ? "rational" : "complex"; }

Backend parse_backend(const std::string& s) {
  if (s == "rational") return Backend::rational;
  if (s == "complex") return Backend::complex;
  throw UsageError("unknown backend '" + s + "'");
}

struct Options {
  std::string params_path;
  std::string backend_flag;
  std::string format;
  std::string output;
  int threads = 0;
  std::uint64_t seed = 7;
};

// HSV_BACKEND wins over --backend, which wins over the command's default.
Backend resolve_backend(const Options& o, Backend fallback, std::initializer_list<Backend> allowed,
                        const std::string& command) {
  Backend b = fallback;
  if (!o.backend_flag.empty()) b = parse_backend(o.backend_flag);
  if (const char* env = std::getenv("HSV_BACKEND"); env && *env) b = parse_backend(env);
  for (Backend a : allowed)
    if (a == b) return b;
  throw UsageError(command + " does not support the " + std::string(backend_name(b)) + " backend");
}

Config parse_config(const std::string& s) {
  std::vector<int> parts;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw UsageError("bad configuration entry '" + tok + "'");
    }
    if (used != tok.size()) throw UsageError("bad configuration entry '" + tok + "'");
    parts.push_back(v);
  }
  return Config::from_unordered(std::move(parts));
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stoi(tok, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || out.back() < 1) throw UsageError("bad list entry '" + tok + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameter files.

template <class F>
F scalar_from_json(const json& j, const std::string& field);

template <>
Rational scalar_from_json<Rational>(const json& j, const std::string& field) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw UsageError("field '" + field + "' must be an exact \"p/q\" string for the rational backend");
}

template <>
Complex scalar_from_json<Complex>(const json& j, const std::string& field) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    try {
      return to_complex(Rational::parse(s));
    } catch (const std::invalid_argument&) {
    }
    try {
      std::size_t used = 0;
      double d = std::stod(s, &used);
      if (used == s.size()) return Complex(d, 0.0);
    } catch (const std::exception&) {
    }
    throw UsageError("field '" + field + "' is not a scalar: " + s);
  }
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw UsageError("field '" + field + "' is not a scalar");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open parameter file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("parameter file: ") + e.what());
  }
}

template <class F>
struct Inputs {
  ModelParams<F> p;
  F u = F(1);
};

template <class F>
Inputs<F> load_params(const json& j) {
  if (!j.is_object()) throw UsageError("parameter file must hold a JSON object");
  Inputs<F> in;
  auto scalar = [&](const char* key, F& dst, bool required) {
    if (j.contains(key)) dst = scalar_from_json<F>(j.at(key), key);
    else if (required) throw UsageError(std::string("missing field '") + key + "'");
  };
  auto list = [&](const char* key, std::vector<F>& dst) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_array()) throw UsageError(std::string("field '") + key + "' must be an array");
    for (const auto& e : j.at(key)) dst.push_back(scalar_from_json<F>(e, key));
  };
  if (j.contains("c_infinite")) {
    if (!j.at("c_infinite").is_boolean()) throw UsageError("field 'c_infinite' must be a boolean");
    in.p.c_infinite = j.at("c_infinite").get<bool>();
  }
  scalar("q", in.p.q, true);
  scalar("a", in.p.a, true);
  scalar("c", in.p.c, !in.p.c_infinite);
  scalar("u", in.u, false);
  list("x", in.p.x);
  list("y", in.p.y);
  list("z", in.p.z);
  return in;
}

template <class F>
Inputs<F> require_params(const Options& o) {
  if (o.params_path.empty()) throw UsageError("--params is required for this command");
  return load_params<F>(read_json_file(o.params_path));
}

// ---------------------------------------------------------------------------
// Output.

json to_json(const Rational& r) { return {{"num", r.num_str()}, {"den", r.den_str()}}; }
json to_json(const Complex& c) { return {{"re", c.real()}, {"im", c.imag()}}; }

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_object() && v.contains("num") && v.contains("den"))
    return v["num"].get<std::string>() + "/" + v["den"].get<std::string>();
  if (v.is_object() && v.contains("re") && v.contains("im")) return csv_cell(json(v.dump()));
  if (v.is_null()) return "";
  return v.dump();
}

// Rows of flat records: the listed array if present, else the object itself.
std::string to_csv(const json& doc, const std::string& rows_key) {
  std::vector<json> rows;
  if (!rows_key.empty() && doc.contains(rows_key)) rows.assign(doc[rows_key].begin(), doc[rows_key].end());
  else rows.push_back(doc);
  std::ostringstream os;
  if (rows.empty()) return "";
  std::vector<std::string> keys;
  for (const auto& [k, v] : rows.front().items())
    if (!v.is_array()) keys.push_back(k);
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << (r.contains(keys[i]) ? csv_cell(r[keys[i]]) : "");
    os << '\n';
  }
  return os.str();
}

void emit(const Options& o, const json& doc, const std::string& rows_key = "", bool csv_default = false) {
  const std::string fmt = o.format.empty() ? (csv_default ? "csv" : "json") : o.format;
  const std::string text = fmt == "csv" ? to_csv(doc, rows_key) : doc.dump(2) + "\n";
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output);
  if (!out) throw UsageError("cannot write '" + o.output + "'");
  out << text;
}

json backend_info(Backend b) {
  json j{{"backend", backend_name(b)}};
  if (b == Backend::complex) j["precision_bits"] = std::numeric_limits<double>::digits;
  return j;
}

// ---------------------------------------------------------------------------
// Value commands.

template <class F>
F z_by_method(const TriangularSpec<F>& s, const std::string& method) {
  if (method == "enum") return z_enumerate(s);
  if (method == "pfaffian") return z_pfaffian(s);
  if (method == "subset") return z_subset_kuperberg(s);
  if (method == "shuffle") return z_shuffle(s);
  if (method == "alt") return z_altform(s);
  throw UsageError("unknown z method '" + method + "'");
}

template <class F>
std::vector<F> first(const std::vector<F>& v, int m, const char* name) {
  if (m < 0) return v;
  if (static_cast<int>(v.size()) < m) throw UsageError(std::string("parameter file has fewer than m entries in ") + name);
  return std::vector<F>(v.begin(), v.begin() + m);
}

template <class F>
int run_z(const Options& o, Backend b, int m, const std::string& method) {
  const auto in = require_params<F>(o);
  const auto spec = make_spec(first(in.p.x, m, "x"), in.p, in.u);
  json doc = backend_info(b);
  doc["command"] = "z";
  doc["method"] = method;
  doc["m"] = spec.m();
  doc["value"] = to_json(z_by_method(spec, method));
  emit(o, doc);
  return 0;
}

template <class F>
int run_g(const Options& o, Backend b, const Config& nu, const Config& mu, const std::string& method, int columns,
          int nodes, double tol) {
  const auto in = require_params<F>(o);
  json doc = backend_info(b);
  doc["command"] = "g";
  doc["method"] = method;
  doc["nu"] = nu.str();
  doc["mu"] = mu.str();
  if (method == "operators") {
    doc["value"] = to_json(partition_G(nu, mu, in.p.x, in.p, columns));
  } else if (method == "subset") {
    if (!mu.empty()) throw UsageError("g --method subset requires mu empty");
    doc["value"] = to_json(g_subset(nu, in.p.x, in.p));
  } else if (method == "contour") {
    if constexpr (std::is_same_v<F, Complex>) {
      if (!mu.empty()) throw UsageError("g --method contour requires mu empty");
      const auto r = g_contour_result(nu, in.p.x, in.p,
                                      make_contours(g_contour_constraints(nu, in.p.x, in.p), nu.size(), nodes), tol);
      doc["value"] = to_json(r.value);
      doc["nodes"] = r.nodes;
      doc["error_estimate"] = r.change;
    } else {
      throw UsageError("g --method contour requires the complex backend");
    }
  } else {
    throw UsageError("unknown g method '" + method + "'");
  }
  emit(o, doc);
  return 0;
}

template <class F>
int run_f(const Options& o, Backend b, const Config& mu, const Config& nu, int columns) {
  const auto in = require_params<F>(o);
  json doc = backend_info(b);
  doc["command"] = "f";
  doc["mu"] = mu.str();
  doc["nu"] = nu.str();
  doc["value"] = to_json(partition_F(mu, nu, in.p.z, in.p, columns));
  emit(o, doc);
  return 0;
}

template <class F>
int run_cauchy(const Options& o, Backend b, const Config& mu, const Config& nu, int cutoff, double rho, double tol) {
  const auto in = require_params<F>(o);
  const auto rep = cauchy_check(mu, nu, in.p.x, in.p.z, in.p, cutoff, rho);
  const bool ok = rep.holds(tol);
  json doc = backend_info(b);
  doc["command"] = "cauchy";
  doc["mu"] = mu.str();
  doc["nu"] = nu.str();
  doc["cutoff"] = cutoff;
  doc["guard_max_ratio"] = rep.guard.max_ratio;
  doc["lhs"] = to_json(rep.lhs);
  doc["rhs"] = to_json(rep.rhs);
  doc["residual"] = rep.residual;
  doc["residuals"] = rep.residuals;
  doc["decay_rate"] = rep.decay_rate;
  doc["decays"] = rep.decays;
  doc["status"] = ok ? "pass" : "fail";
  emit(o, doc);
  return ok ? 0 : 1;
}

int run_orthogonality(const Options& o, Backend b, const Config& kappa, const Config& nu, int nodes, double tol) {
  const auto in = require_params<Complex>(o);
  if (!in.p.c_infinite) throw UsageError("orthogonality requires \"c_infinite\": true");
  const auto contours = orthogonality_contours(kappa, nu, in.p, nodes);
  const auto r = orthogonality_result(kappa, nu, in.p, contours, 1.0);
  const double expected = kappa == nu ? 1.0 : 0.0;
  const double residual = std::abs(r.value - expected);
  const bool ok = residual <= tol;
  json doc = backend_info(b);
  doc["command"] = "orthogonality";
  doc["kappa"] = kappa.str();
  doc["nu"] = nu.str();
  doc["value"] = to_json(r.value);
  doc["expected"] = expected;
  doc["residual"] = residual;
  doc["error_estimate"] = r.change;
  doc["status"] = ok ? "pass" : "fail";
  emit(o, doc);
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Verification suites. Each check is {check, point, residual, status}.

struct Suite {
  json checks = json::array();
  bool ok = true;

  void add(const std::string& check, const std::string& point, double residual, bool pass) {
    checks.push_back({{"check", check}, {"point", point}, {"residual", residual}, {"status", pass ? "pass" : "fail"}});
    ok = ok && pass;
  }
};

template <class F>
std::string join(const std::vector<F>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return s + "]";
}

template <class F>
std::string describe_params(const ModelParams<F>& p) {
  std::string s = "q=" + to_string(p.q) + " a=" + to_string(p.a) + " c=" + (p.c_infinite ? "inf" : to_string(p.c));
  if (!p.x.empty()) s += " x=" + join(p.x);
  if (!p.y.empty()) s += " y=" + join(p.y);
  if (!p.z.empty()) s += " z=" + join(p.z);
  return s;
}

void suite_local_relations(Suite& s, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto rel : {LocalRelation::ybe, LocalRelation::reflection, LocalRelation::r_unitarity,
                   LocalRelation::k_unitarity, LocalRelation::factorization})
    for (const auto& t : verify_local_relation_random(rel, trials, rng))
      s.add(t.report.relation, t.point, t.report.residual, t.report.holds);
}

ModelParams<Rational> default_operator_params() {
  ModelParams<Rational> p;
  p.q = Rational(1, 3);
  p.a = Rational(2);
  p.c = Rational(5);
  p.x = {Rational(9, 10), Rational(4, 5)};
  p.z = {Rational(3, 10), Rational(1, 5)};
  return p;
}

// Exact parts must vanish; limits in n_columns must shrink from N - 1 to N.
void suite_operators(Suite& s, const ModelParams<Rational>& p, int columns) {
  const std::string point = describe_params(p) + " N=" + std::to_string(columns);
  for (auto id : {OperatorIdentity::aa_commute, OperatorIdentity::bb_commute, OperatorIdentity::ab_exchange,
                  OperatorIdentity::a_at_zero, OperatorIdentity::a_at_one, OperatorIdentity::a_inverse_pair,
                  OperatorIdentity::stochastic_rows, OperatorIdentity::branching}) {
    IdentityOptions opt;
    opt.n_small = 2;
    const auto r = verify_operator_identity(id, p, columns, opt);
    if (id != OperatorIdentity::branching) s.add(r.identity, point, r.exact_residual, r.exact_residual == 0.0);
    if (r.tail_residual > 0.0 || r.tail_residual_prev > 0.0)
      s.add(r.identity + ".tail", point, r.tail_residual, r.tail_residual < r.tail_residual_prev);
  }
}

template <class Rng>
std::vector<Rational> random_alphabet(Rng& rng, int m, long bound) {
  std::vector<Rational> x;
  for (int i = 0; i < m; ++i) x.push_back(random_rational(rng, bound));
  return x;
}

void suite_triangular(Suite& s, int trials, std::uint64_t seed, int max_m) {
  std::mt19937_64 rng(seed);
  for (int m = 1; m <= max_m; ++m)
    for (int t = 0; t < trials; ++t) {
      ModelParams<Rational> p;
      std::vector<Rational> x;
      ZPropertyReport props;
      Rational expect;
      std::vector<std::pair<std::string, Rational>> methods;
      for (int attempt = 0;; ++attempt) {
        if (attempt > 1000) throw DegeneratePoint("no admissible random point found");
        p.q = random_rational(rng, 9);
        p.a = random_rational(rng, 9);
        p.c = random_rational(rng, 9);
        x = random_alphabet(rng, m, 13);
        try {
          const auto spec = make_spec(x, p);
          expect = z_enumerate(spec);
          methods.clear();
          for (const char* name : {"pfaffian", "subset", "shuffle", "alt"}) methods.push_back({name, z_by_method(spec, name)});
          props = verify_z_properties(spec, random_alphabet(rng, m + 3, 29));
          break;
        } catch (const DivisionByZero&) {
        } catch (const DegeneratePoint&) {
        }
      }
      const std::string point = describe_params(p) + " x=" + join(x);
      for (const auto& [name, v] : methods) s.add("z_" + name + "_vs_enum", point, residual_of(v, expect), v == expect);
      for (const auto& c : props.checks) s.add("z_" + c.name, point, c.residual, c.holds);
    }
  // Kuperberg point a = -c = 1: Pfaffian formula for even m, zero for odd m.
  for (int m = 2; m <= max_m; ++m)
    for (int t = 0; t < trials; ++t) {
      ModelParams<Rational> p;
      p.a = Rational(1);
      p.c = Rational(-1);
      std::vector<Rational> x;
      Rational lhs, rhs;
      for (int attempt = 0;; ++attempt) {
        if (attempt > 1000) throw DegeneratePoint("no admissible random point found");
        p.q = random_rational(rng, 9);
        x = random_alphabet(rng, m, 13);
        try {
          lhs = z_enumerate(make_spec(x, p));
          rhs = z_kuperberg(x, p.q);
          break;
        } catch (const DivisionByZero&) {
        } catch (const DegeneratePoint&) {
        }
      }
      s.add("z_kuperberg", describe_params(p) + " x=" + join(x), residual_of(lhs, rhs), lhs == rhs);
    }
}

template <class Rng>
Matrix<Rational> random_skew(Rng& rng, int n) {
  return skew_from<Rational>(n, [&](int, int) { return random_rational(rng, 19); });
}

void suite_pfaffian(Suite& s, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int n = 1; n <= 10; ++n)
    for (int t = 0; t < trials; ++t) {
      const auto m = random_skew(rng, n);
      const Rational pf = pfaffian(m), det = determinant(m);
      s.add("pf_squared_is_det", "order=" + std::to_string(n) + " trial=" + std::to_string(t),
            residual_of(pf * pf, det), pf * pf == det);
    }
  for (int n : {2, 3, 4, 6})
    for (int t = 0; t < trials; ++t) {
      const auto a = random_skew(rng, n), b = random_skew(rng, n);
      const double r = pfaffian_sum_residual(a, b);
      s.add("pf_sum_expansion", "order=" + std::to_string(n) + " trial=" + std::to_string(t), r, r == 0.0);
    }
  for (int n : {2, 4, 6})
    for (int t = 0; t < trials; ++t) {
      std::vector<Rational> x;
      double r = 0.0;
      for (int attempt = 0;; ++attempt) {
        if (attempt > 1000) throw DegeneratePoint("no admissible random point found");
        x = random_alphabet(rng, n, 13);
        try {
          r = stembridge_residual(x);
          break;
        } catch (const DivisionByZero&) {
        }
      }
      s.add("stembridge", "x=" + join(x), r, r == 0.0);
    }
}

// G_nu(x | Y^{-1}) recursion checks at random real points away from the poles.
void suite_g_recursions(Suite& s, int trials, std::uint64_t seed, const std::optional<ModelParams<Complex>>& given) {
  const std::vector<Config> shapes{Config{1}, Config{2}, Config{2, 1}, Config{3, 1}};
  CounterRng rng(seed, 0);
  for (int t = 0; t < trials; ++t) {
    const Config& nu = shapes[t % shapes.size()];
    ModelParams<Complex> p;
    std::vector<Complex> x;
    if (given) {
      p = *given;
      x = p.x;
    } else {
      p.q = 1.0 / 3.0;
      p.a = 2.0;
      p.c = 5.0;
      for (int i = 0; i <= nu.size(); ++i) x.push_back(0.2 + 0.5 * rng.uniform());
      for (int j = 0; j <= nu.max_part(); ++j) p.y.push_back(1.3 + 1.2 * rng.uniform());
    }
    const auto rep = verify_g_recursion_suite(nu, x, p);
    const std::string point = "nu=" + nu.str() + " " + describe_params(p) + " x=" + join(x);
    for (const auto& c : rep.checks) s.add(c.name, point, c.residual, c.holds);
  }
}

int run_verify(const Options& o, const std::string& suite, std::optional<int> trials_opt, int columns) {
  Suite s;
  Backend b;
  if (suite == "g-recursions") {
    b = resolve_backend(o, Backend::complex, {Backend::complex}, "verify " + suite);
    std::optional<ModelParams<Complex>> given;
    if (!o.params_path.empty()) given = require_params<Complex>(o).p;
    suite_g_recursions(s, trials_opt.value_or(4), o.seed, given);
  } else {
    b = resolve_backend(o, Backend::rational, {Backend::rational}, "verify " + suite);
    if (suite == "local-relations") {
      suite_local_relations(s, trials_opt.value_or(20), o.seed);
    } else if (suite == "operators") {
      auto p = o.params_path.empty() ? default_operator_params() : require_params<Rational>(o).p;
      suite_operators(s, p, columns);
    } else if (suite == "triangular") {
      suite_triangular(s, trials_opt.value_or(2), o.seed, 5);
    } else if (suite == "pfaffian") {
      suite_pfaffian(s, trials_opt.value_or(3), o.seed);
    } else {
      throw UsageError("unknown suite '" + suite + "'");
    }
  }
  long failed = 0;
  for (const auto& c : s.checks) failed += c["status"] == "fail";
  json doc = backend_info(b);
  doc["command"] = "verify";
  doc["suite"] = suite;
  doc["seed"] = o.seed;
  doc["checks"] = s.checks;
  doc["total"] = s.checks.size();
  doc["failed"] = failed;
  doc["status"] = s.ok ? "pass" : "fail";
  emit(o, doc, "checks");
  return s.ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// ASEP.

struct AsepArgs {
  std::string mu, nu;
  double q = 0.25, alpha = 0.5, gamma = 0.0, t = 1.0;
  int sites = 8;
  std::string method = "exact";
  long samples = 100000;
  int nodes = 256;
  double a = -1.0, c = 2.0;
  std::string L_list = "32,64,128,256";
};

AsepParams asep_params(const AsepArgs& a) {
  AsepParams p{a.q, a.alpha, a.gamma, a.t, a.sites};
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

int run_asep_prob(const Options& o, const AsepArgs& a) {
  resolve_backend(o, Backend::complex, {Backend::complex}, "asep prob");
  const Config mu = parse_config(a.mu), nu = parse_config(a.nu);
  const auto p = asep_params(a);
  json doc = backend_info(Backend::complex);
  doc["command"] = "asep prob";
  doc["method"] = a.method;
  doc["mu"] = mu.str();
  doc["nu"] = nu.str();
  if (a.method == "exact") {
    const auto r = transition_prob_exact(mu, nu, p);
    doc["value"] = r.value;
    doc["error_bound"] = r.leakage_bound + r.series_tail;
  } else if (a.method == "formula") {
    if (!mu.empty()) throw UsageError("the contour formula is defined for mu empty only");
    const auto r = transition_prob_formula_result(nu, p, asep_contours(p, nu.size(), a.nodes));
    doc["value"] = r.value.real();
    doc["error_bound"] = r.change;
  } else if (a.method == "mc") {
    const auto sim = simulate_gillespie(mu, p, a.samples, o.seed);
    const auto it = sim.estimates.find(nu);
    const Estimate e = it != sim.estimates.end() ? it->second : wilson(0, a.samples, 3.0);
    doc["value"] = e.p;
    doc["error_bound"] = 3.0 * e.stderr_;
    doc["interval"] = {e.lo, e.hi};
    doc["samples"] = a.samples;
    doc["seed"] = o.seed;
  } else {
    throw UsageError("unknown asep method '" + a.method + "'");
  }
  emit(o, doc);
  return 0;
}

int run_asep_sim(const Options& o, const AsepArgs& a) {
  resolve_backend(o, Backend::complex, {Backend::complex}, "asep sim");
  const Config mu = parse_config(a.mu);
  const auto p = asep_params(a);
  const auto sim = simulate_gillespie(mu, p, a.samples, o.seed);
  json rows = json::array();
  for (const auto& [cfg, e] : sim.estimates)
    rows.push_back({{"config", cfg.str()}, {"p", e.p}, {"lo", e.lo}, {"hi", e.hi}, {"count", e.count}});
  json doc = backend_info(Backend::complex);
  doc["command"] = "asep sim";
  doc["mu"] = mu.str();
  doc["samples"] = a.samples;
  doc["seed"] = o.seed;
  doc["distribution"] = rows;
  emit(o, doc, "distribution");
  return 0;
}

int run_asep_limit(const Options& o, const AsepArgs& a) {
  resolve_backend(o, Backend::complex, {Backend::complex}, "asep limit");
  const Config mu = parse_config(a.mu), nu = parse_config(a.nu);
  const auto Ls = parse_int_list(a.L_list);
  if (Ls.empty()) throw UsageError("--L needs at least one value");
  const auto rep = vertex_limit_check(mu, nu, a.q, a.a, a.c, a.t, Ls, a.sites);
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"L", r.L}, {"value", r.value}, {"reference", r.reference}, {"abs_error", r.abs_error}});
  json doc = backend_info(Backend::complex);
  doc["command"] = "asep limit";
  doc["mu"] = mu.str();
  doc["nu"] = nu.str();
  doc["alpha"] = rep.alpha;
  doc["gamma"] = rep.gamma;
  doc["orders"] = rep.orders;
  doc["rows"] = rows;
  emit(o, doc, "rows", true);
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and numerical tools for the half-space stochastic six-vertex model"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--params", o.params_path, "JSON parameter file");
  app.add_option("--backend", o.backend_flag, "rational or complex (HSV_BACKEND overrides)")
      ->check(CLI::IsMember({"rational", "complex"}));
  app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", o.output, "write the result here instead of stdout");
  app.add_option("--threads", o.threads, "worker cap, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "random seed");

  int m = -1, columns = 0, nodes = 256, cutoff = 12;
  std::string method_z = "pfaffian", method_g = "operators", nu_s, mu_s, kappa_s;
  double rho = 0.95, tol = 1e-8, quad_tol = 1e-9;

  auto* z = app.add_subcommand("z", "triangular partition function Z_m");
  z->add_option("--m", m, "use the first m entries of x (default: all)");
  z->add_option("--method", method_z)->check(CLI::IsMember({"enum", "pfaffian", "subset", "shuffle", "alt"}));

  auto* g = app.add_subcommand("g", "G_{nu/mu}(x)");
  g->add_option("--nu", nu_s)->required();
  g->add_option("--mu", mu_s);
  g->add_option("--method", method_g)->check(CLI::IsMember({"operators", "subset", "contour"}));
  g->add_option("--columns", columns, "minimum lattice width");
  g->add_option("--nodes", nodes, "trapezoid nodes per contour");
  g->add_option("--tol", quad_tol, "quadrature tolerance");

  auto* f = app.add_subcommand("f", "F_{mu/nu}(z)");
  f->add_option("--mu", mu_s)->required();
  f->add_option("--nu", nu_s);
  f->add_option("--columns", columns);

  auto* cauchy = app.add_subcommand("cauchy", "truncated Cauchy identity");
  cauchy->add_option("--mu", mu_s);
  cauchy->add_option("--nu", nu_s);
  cauchy->add_option("--cutoff", cutoff);
  cauchy->add_option("--rho", rho);
  cauchy->add_option("--tol", tol);

  auto* orth = app.add_subcommand("orthogonality", "orthogonality integral at c = infinity");
  orth->add_option("--kappa", kappa_s);
  orth->add_option("--nu", nu_s);
  int orth_nodes = 128;
  double orth_tol = 1e-6;
  orth->add_option("--nodes", orth_nodes);
  orth->add_option("--tol", orth_tol);

  std::string suite;
  std::optional<int> trials;
  int op_columns = 6;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite)
      ->required()
      ->check(CLI::IsMember({"local-relations", "operators", "triangular", "g-recursions", "pfaffian"}));
  verify->add_option("--trials", trials);
  verify->add_option("--columns", op_columns, "lattice width for the operators suite");

  AsepArgs aa;
  auto* asep = app.add_subcommand("asep", "half-line ASEP");
  asep->require_subcommand(1);
  auto add_rates = [&](CLI::App* c) {
    c->add_option("--mu", aa.mu, "initial configuration");
    c->add_option("--q", aa.q);
    c->add_option("--alpha", aa.alpha);
    c->add_option("--gamma", aa.gamma);
    c->add_option("--t", aa.t);
    c->add_option("--sites", aa.sites);
  };
  auto* prob = asep->add_subcommand("prob", "transition probability P_t(mu -> nu)");
  add_rates(prob);
  prob->add_option("--nu", aa.nu);
  prob->add_option("--method", aa.method)->check(CLI::IsMember({"exact", "formula", "mc"}));
  prob->add_option("--samples", aa.samples);
  prob->add_option("--nodes", aa.nodes);
  auto* sim = asep->add_subcommand("sim", "Gillespie estimate of the distribution at time t");
  add_rates(sim);
  sim->add_option("--samples", aa.samples);
  auto* limit = asep->add_subcommand("limit", "vertex model to ASEP convergence in L");
  limit->add_option("--mu", aa.mu);
  limit->add_option("--nu", aa.nu);
  limit->add_option("--q", aa.q);
  limit->add_option("--a", aa.a);
  limit->add_option("--c", aa.c);
  limit->add_option("--t", aa.t);
  limit->add_option("--sites", aa.sites);
  limit->add_option("--L", aa.L_list, "comma-separated list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("parse", e.what());
    return 2;
  }

  try {
    set_max_threads(o.threads);
    if (*z) {
      const Backend b = resolve_backend(o, Backend::rational, {Backend::rational, Backend::complex}, "z");
      return b == Backend::rational ? run_z<Rational>(o, b, m, method_z) : run_z<Complex>(o, b, m, method_z);
    }
    if (*g) {
      const Backend fallback = method_g == "contour" ? Backend::complex : Backend::rational;
      const Backend b = resolve_backend(o, fallback, {Backend::rational, Backend::complex}, "g");
      const Config nu = parse_config(nu_s), mu = parse_config(mu_s);
      return b == Backend::rational ? run_g<Rational>(o, b, nu, mu, method_g, columns, nodes, quad_tol)
                                    : run_g<Complex>(o, b, nu, mu, method_g, columns, nodes, quad_tol);
    }
    if (*f) {
      const Backend b = resolve_backend(o, Backend::rational, {Backend::rational, Backend::complex}, "f");
      const Config mu = parse_config(mu_s), nu = parse_config(nu_s);
      return b == Backend::rational ? run_f<Rational>(o, b, mu, nu, columns) : run_f<Complex>(o, b, mu, nu, columns);
    }
    if (*cauchy) {
      const Backend b = resolve_backend(o, Backend::rational, {Backend::rational, Backend::complex}, "cauchy");
      const Config mu = parse_config(mu_s), nu = parse_config(nu_s);
      return b == Backend::rational ? run_cauchy<Rational>(o, b, mu, nu, cutoff, rho, tol)
                                    : run_cauchy<Complex>(o, b, mu, nu, cutoff, rho, tol);
    }
    if (*orth) {
      const Backend b = resolve_backend(o, Backend::complex, {Backend::complex}, "orthogonality");
      return run_orthogonality(o, b, parse_config(kappa_s), parse_config(nu_s), orth_nodes, orth_tol);
    }
    if (*verify) return run_verify(o, suite, trials, op_columns);
    if (*prob) return run_asep_prob(o, aa);
    if (*sim) return run_asep_sim(o, aa);
    if (*limit) return run_asep_limit(o, aa);
  } catch (const UsageError& e) {
    print_error("config", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    print_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("computation", e.what());
    return 1;
  }
  return 2;
}
