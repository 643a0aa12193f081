#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "loglap/eigen.hpp"
#include "loglap/error.hpp"
#include "loglap/forms.hpp"
#include "loglap/kernel.hpp"
#include "loglap/operator.hpp"
#include "loglap/parallel.hpp"
#include "loglap/specfun.hpp"

namespace loglap::cli {

namespace {

using nlohmann::json;

// Raised for configuration problems detected after parsing (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string suite;
  std::string study_kind = "mesh";

  int N = 1;
  double s = 0.5;
  double p = 2.0;
  std::string shape = "interval";
  std::vector<double> box = {0.0, 0.3};
  double h = 0.003;
  int samples = 100;
  std::uint64_t seed = 1;
  std::string format;
  std::string output;
  std::string cache;
  int threads = 0;
  bool thresholds = false;
  bool list = false;

  QuadratureSpec quad;
  EigenConfig eig;

  std::string fn;
  std::vector<std::string> points = {"0"};
  std::string op_study = "none";
  std::vector<double> hlist;
  std::vector<double> slist = {0.2, 0.1, 0.05, 0.02};

  double rmin = 1e-4;
  double rmax = 100.0;
  int count = 200;

  double q = 0.0;
  double r = 0.0;
};

const std::vector<std::pair<std::string, std::string>> kSuites = {
    {"form-bounds", "check_form_bounds: explicit energy bounds on random functions"},
    {"poincare", "check_poincare: explicit-constant Poincare inequality"},
    {"hardy", "check_hardy: boundary Hardy ratio across one refinement"},
    {"sobolev", "check_sobolev_gn(sobolev): critical Sobolev ratio across one refinement"},
    {"gn", "check_sobolev_gn(gn): Gagliardo-Nirenberg ratio across one refinement"},
    {"holder", "check_sobolev_gn(holder): Holder quotient ratio across one refinement"},
    {"strauss", "check_sobolev_gn(strauss): radial decay ratio across one refinement"},
    {"diaz-saa", "check_diaz_saa: integral and pointwise inequality on positive pairs"},
    {"picone", "verify_eigen_properties: positivity, residual and Picone checks"},
    {"pohozaev-defect", "pohozaev_defect: positivity and exterior-tail cross-check"},
};

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json params_json(const RunConfig& c) { return {{"N", c.N}, {"s", c.s}, {"p", c.p}}; }

json report_json(const Report& r) {
  json entries = json::array();
  for (const CheckEntry& e : r.entries)
    entries.push_back({{"name", e.name},
                       {"pass", e.pass},
                       {"asserted", e.asserted},
                       {"lhs", e.lhs},
                       {"rhs", e.rhs},
                       {"margin", e.margin}});
  json values = json::object();
  for (const auto& kv : r.values) values[kv.first] = kv.second;
  return {{"check", r.check},
          {"params", {{"N", r.N}, {"s", r.s}, {"p", r.p}}},
          {"domain", r.domain},
          {"n_samples", r.n_samples},
          {"pass", r.pass},
          {"worst_margin", std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr)},
          {"ratios", r.ratios},
          {"entries", entries},
          {"values", values}};
}

Params make_params(const RunConfig& c) {
  try {
    return Params(c.N, c.s, c.p);
  } catch (const DomainError& e) {
    throw UsageError(std::string("invalid params: ") + e.what());
  }
}

DomainPtr make_domain(const RunConfig& c, double h) {
  try {
    const DomainPtr d = build_grid(parse_shape(c.shape), c.box, h);
    if (d->dim() != c.N)
      throw UsageError("shape " + c.shape + " is " + std::to_string(d->dim()) +
                       "-dimensional but N = " + std::to_string(c.N));
    return d;
  } catch (const DomainError& e) {
    throw UsageError(std::string("invalid domain: ") + e.what());
  }
}

FormTables make_tables(const RunConfig& c, const DomainPtr& d, const Params& par) {
  if (c.cache.empty()) return build_form_tables(d, par);
  std::ostringstream prefix;
  prefix << c.cache << "_h" << std::setprecision(17) << d->h();
  return build_form_tables_cached(d, par, prefix.str());
}

json thresholds_json(const RunConfig& c, const Params& par) {
  const double e_inv = std::exp(-1.0 / par.sp());
  const double r_star = std::exp(par.B() / par.p());
  const double s0 = b_sign_threshold(par.N(), par.p());
  json t = {{"e_inv", e_inv}, {"r_star", r_star}, {"s0", s0}};
  try {
    const DomainPtr d = make_domain(c, c.h);
    t["diam"] = d->diam();
    t["diam_le_e_inv"] = d->diam() <= e_inv;
    t["diam_lt_r_star"] = d->diam() < r_star;
  } catch (const UsageError&) {
    t["diam"] = nullptr;
  }
  t["s_le_s0"] = par.s() <= s0;
  return t;
}

Point parse_point(const std::string& text, int N) {
  Point x{0.0, 0.0, 0.0};
  std::stringstream ss(text);
  std::string part;
  int k = 0;
  while (std::getline(ss, part, ':')) {
    if (k >= 3) throw UsageError("point has more than 3 coordinates: " + text);
    try {
      x[k++] = std::stod(part);
    } catch (const std::exception&) {
      throw UsageError("cannot parse point coordinate: " + part);
    }
  }
  if (k != N) throw UsageError("point " + text + " does not have N coordinates");
  return x;
}

TestFunction make_test_function(const std::string& name, int N) {
  if (name == "gaussian") return functions::gaussian(N);
  if (name == "bump") return functions::bump(N);
  if (name == "odd") return functions::odd_gaussian(N);
  if (name == "zero") return functions::zero(N);
  throw UsageError("unknown test function: " + name + " (gaussian|bump|odd|zero)");
}

GridFunction make_grid_function(const std::string& name, const DomainPtr& d, std::uint64_t seed) {
  if (name == "random") return sample_function(d, SampleSource::random(seed));
  if (name == "smooth") return sample_function(d, SampleSource::smooth(seed));
  if (name == "tent") {
    GridFunction u{d, d->boundary_distance()};
    double m = 0.0;
    for (double v : u.values) m = std::max(m, v);
    for (double& v : u.values) v /= m;
    return u;
  }
  if (name == "zero") return GridFunction{d, std::vector<double>(d->size(), 0.0)};
  throw UsageError("unknown grid function: " + name + " (random|smooth|tent|zero)");
}

json eigen_json(const EigenResult& r) {
  json hist = json::array();
  for (const EigenStep& st : r.history) hist.push_back({st.lambda, st.step});
  return {{"lambda", r.lambda},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"restart_lambdas", r.restart_lambdas},
          {"u", r.u.values},
          {"history", hist}};
}

// Runs a ratio suite on h and h/2 and checks the maximum does not blow up.
Report ratio_refinement_suite(const RunConfig& c, const Params& par, const std::string& suite) {
  Report reps[2];
  for (int level = 0; level < 2; ++level) {
    const DomainPtr d = make_domain(c, level == 0 ? c.h : 0.5 * c.h);
    const FormTables t = make_tables(c, d, par);
    for (int k = 0; k < c.samples; ++k) {
      const bool radial = suite == "strauss";
      const GridFunction u =
          sample_function(d, SampleSource::smooth(c.seed + static_cast<std::uint64_t>(k), radial));
      Report r;
      if (suite == "hardy") {
        r = check_hardy(u, t);
      } else {
        double q = c.q;
        if (suite == "gn" && q == 0.0) q = 0.5 * (par.p() + par.p_star());
        r = check_sobolev_gn(u, t, parse_embedding_mode(suite), q);
      }
      if (k == 0) reps[level] = r;
      else reps[level].merge(r);
    }
  }
  return bounded_ratio_refinement(suite, reps[0], reps[1], 2.0);
}

Report run_suite(const RunConfig& c, const Params& par) {
  const std::string& suite = c.suite;
  if (suite == "hardy" || suite == "sobolev" || suite == "gn" || suite == "holder" ||
      suite == "strauss") {
    try {
      return ratio_refinement_suite(c, par, suite);
    } catch (const DomainError& e) {
      throw UsageError(suite + ": " + e.what());
    }
  }
  const DomainPtr d = make_domain(c, c.h);
  const FormTables t = make_tables(c, d, par);
  Report agg;
  auto fold = [&](const Report& r, int k) {
    if (k == 0) agg = r;
    else agg.merge(r);
  };
  if (suite == "form-bounds" || suite == "poincare") {
    for (int k = 0; k < c.samples; ++k) {
      const GridFunction u = sample_function(d, SampleSource::random(c.seed + k));
      fold(suite == "form-bounds" ? check_form_bounds(u, t) : check_poincare(u, t), k);
    }
    return agg;
  }
  if (suite == "diaz-saa") {
    const double r = c.r > 0.0 ? c.r : par.p();
    try {
      for (int k = 0; k < c.samples; ++k) {
        GridFunction u = sample_function(d, SampleSource::random(c.seed + 2 * k));
        GridFunction v = sample_function(d, SampleSource::random(c.seed + 2 * k + 1));
        for (double& x : u.values) x += 1.1;
        for (double& x : v.values) x += 1.1;
        fold(check_diaz_saa(u, v, t, r, 10000, c.seed + k), k);
      }
    } catch (const DomainError& e) {
      throw UsageError(std::string("diaz-saa: ") + e.what());
    }
    return agg;
  }
  if (suite == "picone") {
    EigenConfig ec = c.eig;
    ec.seed = c.seed;
    const EigenResult res = minimize_first(t, ec);
    Report r = verify_eigen_properties(res, t, {1e-2, 1e-3, 1e-4}, 10000, c.seed);
    r.check = "picone";
    return r;
  }
  if (suite == "pohozaev-defect") {
    Report rep = make_report("pohozaev-defect", t);
    const bool closed_form = d->diam() < 1.0;
    for (int k = 0; k < c.samples; ++k) {
      const GridFunction u = sample_function(d, SampleSource::random(c.seed + k));
      const double g = pohozaev_defect(u, t);
      CheckEntry pos;
      pos.name = "defect > 0";
      pos.lhs = g;
      pos.pass = g > 0.0;
      pos.margin = g > 0.0 ? 1.0 : -1.0;
      rep.add(pos);
      if (closed_form) {
        const double norm_p = std::pow(lp_norm(u, par.p()), par.p());
        const double expect = 0.5 * par.C() * energy(u, t).Js - par.C() * norm_p * par.omega() / par.sp();
        CheckEntry cf;
        cf.name = "defect = (C/2) Js - C |u|_p^p omega/(sp)";
        cf.lhs = g;
        cf.rhs = expect;
        cf.margin = -std::fabs(g - expect) / std::max(std::fabs(expect), 1e-300);
        cf.pass = std::fabs(g - expect) <= 1e-10 * std::fabs(expect);
        rep.add(cf);
      }
      rep.ratios.push_back(g / (0.5 * par.C() * energy(u, t).Js));
      rep.n_samples += 1;
    }
    // Keep only failing entries, as merged reports do.
    std::vector<CheckEntry> failing;
    for (const CheckEntry& e : rep.entries)
      if (!e.pass) failing.push_back(e);
    rep.entries = failing;
    return rep;
  }
  throw UsageError("unknown verify suite: " + suite + " (see verify --list)");
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.output);
  if (!f) throw UsageError("cannot open output path " + c.output);
  f << text;
}

std::string dump(json doc, const RunConfig& c, const Params* par) {
  doc["timestamp"] = timestamp();
  if (c.thresholds && par) doc["thresholds"] = thresholds_json(c, *par);
  return doc.dump(2) + "\n";
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << csv_number(row[k]);
    os << "\n";
  }
  return os.str();
}

int cmd_constants(const RunConfig& c, std::ostream& out) {
  const Params par = make_params(c);
  const KernelSpec k(par);
  const ClassicalConst cc = classical_const(par.N(), par.p());
  json doc = {{"command", "constants"},
              {"params", params_json(c)},
              {"C", par.C()},
              {"B", par.B()},
              {"omega_N", par.omega()},
              {"C_Np", cc.C},
              {"rho_Np", cc.rho},
              {"s0", b_sign_threshold(par.N(), par.p())},
              {"r_star", k.r_star()},
              {"e_inv", k.e_inv()}};
  if (par.has_p_star()) doc["p_star"] = par.p_star();
  if (c.format == "csv") {
    emit(c,
         csv({"N", "s", "p", "C", "B", "omega_N", "C_Np", "rho_Np", "s0", "r_star", "e_inv"},
             {{double(par.N()), par.s(), par.p(), par.C(), par.B(), par.omega(), cc.C, cc.rho,
               doc["s0"].get<double>(), k.r_star(), k.e_inv()}}),
         out);
  } else {
    emit(c, dump(doc, c, &par), out);
  }
  return kOk;
}

int cmd_kernel(const RunConfig& c, std::ostream& out) {
  const Params par = make_params(c);
  const KernelSpec k(par);
  if (!(c.rmin > 0.0 && c.rmax > c.rmin) || c.count < 2)
    throw UsageError("kernel grid requires 0 < rmin < rmax and count >= 2");
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (int i = 0; i < c.count; ++i) {
    const double r = c.rmin * std::pow(c.rmax / c.rmin, double(i) / (c.count - 1));
    const KernelParts kp = kernel_parts(k, r);
    const double res = commutator_residual_relative(k, r);
    worst = std::max(worst, std::fabs(res));
    rows.push_back({r, kernel_full(k, r), kp.plus, kp.minus, res});
  }
  const bool pass = worst <= 1e-10;
  if (c.format == "csv") {
    emit(c, csv({"r", "K", "k_plus", "k_minus", "commutator_rel"}, rows), out);
  } else {
    json table = json::array();
    for (const auto& r : rows)
      table.push_back({{"r", r[0]}, {"K", r[1]}, {"k_plus", r[2]}, {"k_minus", r[3]},
                       {"commutator_rel", r[4]}});
    json doc = {{"command", "kernel"},
                {"params", params_json(c)},
                {"r_star", k.r_star()},
                {"e_inv", k.e_inv()},
                {"max_commutator_rel", worst},
                {"pass", pass},
                {"table", table}};
    emit(c, dump(doc, c, &par), out);
  }
  return pass ? kOk : kAssertionFailed;
}

int cmd_op(const RunConfig& c, std::ostream& out) {
  if (c.N < 1 || c.N > 3) throw UsageError("op supports N in {1, 2, 3}");
  const Params par = make_params(c);
  const TestFunction u = make_test_function(c.fn.empty() ? "gaussian" : c.fn, c.N);
  std::vector<Point> pts;
  for (const std::string& t : c.points) pts.push_back(parse_point(t, c.N));
  json values = json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const OperatorValue f = eval_frac_plap(u, pts[i], c.N, c.s, c.p, c.quad);
    const OperatorValue l = eval_log_plap(u, pts[i], c.N, c.s, c.p, c.quad);
    const OperatorValue z = eval_log_plap_zero(u, pts[i], c.N, c.p, c.quad);
    values.push_back({{"x", c.points[i]},
                      {"frac", f.value}, {"frac_err", f.error},
                      {"log", l.value}, {"log_err", l.error},
                      {"log_zero", z.value}, {"log_zero_err", z.error}});
  }
  json doc = {{"command", "op"}, {"params", params_json(c)}, {"function", u.name}, {"values", values}};
  bool pass = true;
  if (c.op_study == "derivative") {
    const std::vector<double> hs = c.hlist.empty() ? std::vector<double>{1e-2, 5e-3, 2.5e-3} : c.hlist;
    const DerivativeStudy d = derivative_consistency(u, pts.front(), c.N, c.s, c.p, hs, c.quad);
    json rows = json::array();
    for (const auto& r : d.rows)
      rows.push_back({{"h", r.h}, {"fd", r.fd_value}, {"direct", r.direct_value}, {"abs_err", r.abs_err}});
    pass = d.noise_dominated || (d.slope >= 1.7 && d.slope <= 2.3);
    doc["derivative"] = {{"rows", rows}, {"slope", d.slope}, {"noise_dominated", d.noise_dominated},
                         {"pass", pass}};
  } else if (c.op_study == "small-s") {
    const auto rows = small_s_limit_study(u, pts, c.N, c.p, c.slist, c.quad);
    json js = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      js.push_back({{"s", rows[i].s}, {"sup_error", rows[i].sup_error}});
      if (i > 0 && !(rows[i].sup_error < rows[i - 1].sup_error)) pass = false;
    }
    doc["small_s"] = {{"rows", js}, {"decreasing", pass}};
  } else if (c.op_study != "none") {
    throw UsageError("unknown op study: " + c.op_study + " (none|derivative|small-s)");
  }
  emit(c, dump(doc, c, &par), out);
  return pass ? kOk : kAssertionFailed;
}

int cmd_energy(const RunConfig& c, std::ostream& out) {
  const Params par = make_params(c);
  const DomainPtr d = make_domain(c, c.h);
  const FormTables t = make_tables(c, d, par);
  const GridFunction u = make_grid_function(c.fn.empty() ? "random" : c.fn, d, c.seed);
  const EnergyBreakdown e = energy(u, t);
  json doc = {{"command", "energy"},
              {"params", params_json(c)},
              {"domain", make_report("", t).domain},
              {"function", c.fn.empty() ? "random" : c.fn},
              {"Jplus", e.Jplus},
              {"Jminus", e.Jminus},
              {"Js", e.Js},
              {"total", e.total},
              {"slog_seminorm_p", e.slog_seminorm_p},
              {"frac_seminorm_p", e.frac_seminorm_p},
              {"lp_norm_p", std::pow(lp_norm(u, par.p()), par.p())},
              {"pohozaev_defect", pohozaev_defect(u, t)}};
  emit(c, dump(doc, c, &par), out);
  return kOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  if (c.list) {
    std::ostringstream os;
    for (const auto& kv : kSuites) os << kv.first << "\t" << kv.second << "\n";
    emit(c, os.str(), out);
    return kOk;
  }
  if (c.suite.empty()) throw UsageError("verify requires a suite name (see verify --list)");
  const Params par = make_params(c);
  const Report r = run_suite(c, par);
  json doc = report_json(r);
  doc["command"] = "verify";
  doc["suite"] = c.suite;
  if (c.suite == "poincare") doc["C_poin"] = poincare_constant(make_tables(c, make_domain(c, c.h), par));
  emit(c, dump(doc, c, &par), out);
  return r.pass ? kOk : kAssertionFailed;
}

int cmd_eigen(const RunConfig& c, std::ostream& out) {
  const Params par = make_params(c);
  const DomainPtr d = make_domain(c, c.h);
  const FormTables t = make_tables(c, d, par);
  EigenConfig ec = c.eig;
  ec.seed = c.seed;
  const EigenResult res = minimize_first(t, ec);
  const Report props = verify_eigen_properties(res, t, {1e-2, 1e-3, 1e-4}, 10000, c.seed);
  json doc = {{"command", "eigen"},
              {"params", params_json(c)},
              {"domain", props.domain},
              {"result", eigen_json(res)},
              {"properties", report_json(props)}};
  bool pass = props.pass && res.lambda > 0.0;
  Point x0{0.0, 0.0, 0.0};
  for (int k = 0; k < d->dim(); ++k) x0[k] = 0.5 * (c.box[2 * k] + c.box[2 * k + 1]);
  const double r = d->diam() / 8.0;
  try {
    doc["log_estimate"] = report_json(log_estimate_check(res, t, x0, r, 4.0 * r, 0.5));
  } catch (const DomainError& e) {
    doc["log_estimate"] = {{"skipped", e.what()}};
  }
  emit(c, dump(doc, c, &par), out);
  return pass ? kOk : kAssertionFailed;
}

int cmd_study(const RunConfig& c, std::ostream& out) {
  const Params par = make_params(c);
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  bool pass = true;
  if (c.study_kind == "mesh" || c.study_kind == "energy-refinement") {
    const std::vector<double> hs =
        c.hlist.empty() ? std::vector<double>{2.0 * c.h, c.h, 0.5 * c.h} : c.hlist;
    double prev = NAN, prev_inc = NAN;
    for (double h : hs) {
      const DomainPtr d = make_domain(c, h);
      const FormTables t = make_tables(c, d, par);
      if (c.study_kind == "mesh") {
        EigenConfig ec = c.eig;
        ec.seed = c.seed;
        const EigenResult res = minimize_first(t, ec);
        const double inc = std::isnan(prev) ? NAN : std::fabs(res.lambda - prev);
        if (!std::isnan(prev_inc) && !(inc < prev_inc)) pass = false;
        rows.push_back({h, double(d->size()), res.lambda, inc, res.residual, double(res.iterations)});
        prev = res.lambda;
        prev_inc = inc;
      } else {
        const GridFunction u = sample_function(d, SampleSource::smooth(c.seed));
        const EnergyBreakdown e = energy(u, t);
        const double inc = std::isnan(prev) ? NAN : std::fabs(e.total - prev);
        if (!std::isnan(prev_inc) && !(inc < prev_inc)) pass = false;
        rows.push_back({h, double(d->size()), e.total, e.Jplus, e.Jminus, e.Js, inc});
        prev = e.total;
        prev_inc = inc;
      }
    }
    header = c.study_kind == "mesh"
                 ? std::vector<std::string>{"h", "cells", "lambda", "abs_increment", "residual", "iterations"}
                 : std::vector<std::string>{"h", "cells", "total", "Jplus", "Jminus", "Js", "abs_increment"};
  } else if (c.study_kind == "small-s") {
    const TestFunction u = make_test_function(c.fn.empty() ? "gaussian" : c.fn, c.N);
    std::vector<Point> pts;
    for (const std::string& t : c.points) pts.push_back(parse_point(t, c.N));
    const auto st = small_s_limit_study(u, pts, c.N, c.p, c.slist, c.quad);
    header = {"s", "sup_error"};
    for (std::size_t i = 0; i < st.size(); ++i) {
      rows.push_back({st[i].s, st[i].sup_error});
      if (i > 0 && !(st[i].sup_error < st[i - 1].sup_error)) pass = false;
    }
  } else if (c.study_kind == "derivative") {
    const TestFunction u = make_test_function(c.fn.empty() ? "gaussian" : c.fn, c.N);
    const std::vector<double> hs = c.hlist.empty() ? std::vector<double>{1e-2, 5e-3, 2.5e-3} : c.hlist;
    const DerivativeStudy d =
        derivative_consistency(u, parse_point(c.points.front(), c.N), c.N, c.s, c.p, hs, c.quad);
    header = {"h", "fd_value", "direct_value", "abs_err"};
    for (const auto& r : d.rows) rows.push_back({r.h, r.fd_value, r.direct_value, r.abs_err});
    pass = d.noise_dominated || (d.slope >= 1.7 && d.slope <= 2.3);
  } else {
    throw UsageError("unknown study: " + c.study_kind +
                     " (mesh|energy-refinement|small-s|derivative)");
  }
  if (c.format == "json") {
    json table = json::array();
    for (const auto& r : rows) {
      json row;
      for (std::size_t k = 0; k < header.size(); ++k)
        row[header[k]] = std::isnan(r[k]) ? json(nullptr) : json(r[k]);
      table.push_back(row);
    }
    emit(c, dump({{"command", "study"}, {"study", c.study_kind}, {"params", params_json(c)},
                  {"rows", table}, {"pass", pass}},
                 c, &par),
         out);
  } else {
    emit(c, csv(header, rows), out);
  }
  return pass ? kOk : kAssertionFailed;
}

// Flattens a JSON RunConfig into "--key value" arguments.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file " + path);
  json cfg;
  try {
    f >> cfg;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::string> args;
  std::function<void(const json&)> visit = [&](const json& obj) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const json& v = it.value();
      if (v.is_object()) {
        visit(v);
        continue;
      }
      const std::string flag = "--" + it.key();
      if (v.is_boolean()) {
        if (v.get<bool>()) args.push_back(flag);
      } else if (v.is_array()) {
        std::string joined;
        for (std::size_t k = 0; k < v.size(); ++k) {
          if (k) joined += ",";
          joined += v[k].is_string() ? v[k].get<std::string>() : v[k].dump();
        }
        args.push_back(flag);
        args.push_back(joined);
      } else {
        args.push_back(flag);
        args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
  };
  visit(cfg);
  return args;
}

void build_app(CLI::App& app, RunConfig& c, std::string& config_path) {
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", config_path, "JSON RunConfig; flags override its values");
  app.add_option("--N", c.N, "dimension");
  app.add_option("--s", c.s, "order in (0,1)");
  app.add_option("--p", c.p, "exponent > 1");
  app.add_option("--shape", c.shape, "interval | box | disc");
  app.add_option("--box", c.box, "bounding box lo,hi[,lo,hi]")->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--h", c.h, "cell size");
  app.add_option("--samples", c.samples, "number of sample functions");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--format", c.format, "json | csv");
  app.add_option("--output", c.output, "output path (default stdout)");
  app.add_option("--cache", c.cache, "weight-table cache path prefix");
  app.add_option("--threads", c.threads, "worker cap (default LOGLAP_THREADS)");
  app.add_flag("--thresholds", c.thresholds,
               "include e^{-1/sp}, e^{B/p}, s0 and the domain diameter in the output");
  app.add_option("--eps", c.quad.inner_cutoff, "quadrature inner cutoff");
  app.add_option("--outer", c.quad.outer_radius, "quadrature outer radius (0 = automatic)");
  app.add_option("--nodes", c.quad.radial_nodes_per_level, "radial nodes per level");
  app.add_option("--levels", c.quad.levels, "geometric levels below the cutoff");
  app.add_option("--angular", c.quad.angular_nodes, "angular nodes (N >= 2)");
  app.add_option("--polar", c.quad.polar_nodes, "polar nodes (N = 3)");
  app.add_option("--tol", c.quad.target_tol, "quadrature target tolerance");
  app.add_option("--restarts", c.eig.restarts, "eigen restarts");
  app.add_option("--max-iter", c.eig.max_iter, "eigen iteration cap");
  app.add_option("--eig-tol", c.eig.tol, "eigen relative lambda tolerance");
  app.add_option("--step", c.eig.initial_step, "eigen initial step");
  app.add_option("--fn", c.fn, "test function (op: gaussian|bump|odd|zero; energy: random|smooth|tent|zero)");
  app.add_option("--x", c.points, "evaluation points, coordinates joined by ':'")->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--study", c.op_study, "op study: none | derivative | small-s");
  app.add_option("--hlist", c.hlist, "step or mesh list")->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--slist", c.slist, "order list for small-s studies")->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--rmin", c.rmin, "kernel table lower radius");
  app.add_option("--rmax", c.rmax, "kernel table upper radius");
  app.add_option("--count", c.count, "kernel table size");
  app.add_option("--q", c.q, "Lebesgue exponent for gn");
  app.add_option("--r", c.r, "exponent r in (1,p] for diaz-saa");
  app.add_flag("--list", c.list, "list verify suites");

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    s->callback([&c, name] { c.subcommand = name; });
    return s;
  };
  sub("constants", "normalization constants and thresholds");
  sub("kernel", "tabulate the kernel and the commutator residual");
  sub("op", "evaluate the pointwise operators");
  sub("energy", "energy breakdown of a grid function");
  sub("verify", "run a named check suite")->add_option("suite", c.suite, "suite name");
  sub("eigen", "first eigenvalue and its properties");
  sub("study", "parameter and mesh sweeps (CSV)")->add_option("kind", c.study_kind,
                                                              "mesh | energy-refinement | small-s | derivative");
}

void validate(RunConfig& c) {
  if (c.format.empty()) c.format = c.subcommand == "study" ? "csv" : "json";
  if (c.format != "json" && c.format != "csv")
    throw UsageError("format must be json or csv, got " + c.format);
  if (c.samples < 1) throw UsageError("samples must be >= 1");
  if (c.threads < 0) throw UsageError("threads must be >= 0");
  if (!(c.h > 0.0)) throw UsageError("h must be > 0");
  try {
    c.eig.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") config_path = args[i + 1];

  try {
    if (!config_path.empty()) {
      std::vector<std::string> merged = config_args(config_path);
      merged.insert(merged.end(), args.begin(), args.end());
      args = merged;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  RunConfig c;
  std::string unused_config;
  CLI::App app{"Fractional logarithmic p-Laplacian toolkit", "loglap"};
  build_app(app, c, unused_config);
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    validate(c);
    if (c.threads > 0) set_thread_count(c.threads);
    if (c.subcommand == "constants") return cmd_constants(c, out);
    if (c.subcommand == "kernel") return cmd_kernel(c, out);
    if (c.subcommand == "op") return cmd_op(c, out);
    if (c.subcommand == "energy") return cmd_energy(c, out);
    if (c.subcommand == "verify") return cmd_verify(c, out);
    if (c.subcommand == "eigen") return cmd_eigen(c, out);
    if (c.subcommand == "study") return cmd_study(c, out);
    err << "error: no subcommand\n";
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ToleranceError& e) {
    err << "error: " << e.what() << " (achieved " << e.achieved() << ")\n";
    return kAssertionFailed;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const MismatchError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kAssertionFailed;
  }
}

}  // namespace loglap::cli
