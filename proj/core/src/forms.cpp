#include "loglap/forms.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "loglap/error.hpp"
#include "loglap/parallel.hpp"

namespace loglap {

namespace {

double abs_pow(double a, double p) {
  if (p == 2.0) return a * a;
  return std::pow(std::fabs(a), p);
}

void require_same(const GridFunction& u, const FormTables& t) {
  if (!u.domain || !t.domain || !u.domain->same_as(*t.domain) || u.size() != t.domain->size())
    throw MismatchError("grid function and weight tables belong to different domains");
}

double sum_in_order(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double pair_dist(const GridDomain& d, std::size_t i, std::size_t j) {
  const Point& a = d.center(i);
  const Point& b = d.center(j);
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

CheckEntry leq(const std::string& name, double lhs, double rhs, bool asserted = true) {
  CheckEntry e;
  e.name = name;
  e.lhs = lhs;
  e.rhs = rhs;
  e.asserted = asserted;
  const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1e-300});
  e.margin = (rhs - lhs) / scale;
  e.pass = e.margin >= -kSignSlack;
  return e;
}

std::string describe(const GridDomain& d) {
  std::ostringstream os;
  os << to_string(d.shape()) << "[";
  for (std::size_t k = 0; k < d.box().size(); ++k) os << (k ? "," : "") << d.box()[k];
  os << "] h=" << d.h() << " cells=" << d.size();
  return os.str();
}

}  // namespace

const WeightTable& FormTables::get(KernelPart part) const {
  switch (part) {
    case KernelPart::plus: return plus;
    case KernelPart::minus: return minus;
    case KernelPart::frac: return frac;
    case KernelPart::full: return full;
  }
  return full;
}

FormTables build_form_tables(const DomainPtr& domain, const Params& params,
                             const AssemblyOptions& opt) {
  return FormTables{domain, params,
                    assemble_weights(domain, params, KernelPart::plus, opt),
                    assemble_weights(domain, params, KernelPart::minus, opt),
                    assemble_weights(domain, params, KernelPart::frac, opt),
                    assemble_weights(domain, params, KernelPart::full, opt)};
}

FormTables build_form_tables_cached(const DomainPtr& domain, const Params& params,
                                    const std::string& prefix, const AssemblyOptions& opt) {
  auto load = [&](KernelPart part) {
    const std::string path = prefix + "." + to_string(part);
    if (std::filesystem::exists(path)) {
      try {
        return read_weight_cache(path, domain, params, part);
      } catch (const MismatchError&) {
      }
    }
    WeightTable t = assemble_weights(domain, params, part, opt);
    write_weight_cache(path, t);
    return t;
  };
  return FormTables{domain, params, load(KernelPart::plus), load(KernelPart::minus),
                    load(KernelPart::frac), load(KernelPart::full)};
}

double table_energy(const GridFunction& u, const WeightTable& t) {
  if (!u.domain->same_as(*t.domain())) throw MismatchError("table/domain mismatch");
  return table_energy_restricted(u, t, kInf, t.kappa_values());
}

double table_energy_restricted(const GridFunction& u, const WeightTable& t, double cutoff,
                               const std::vector<double>& kappa) {
  const std::size_t n = u.size();
  const double p = t.params().p();
  const GridDomain& d = *u.domain;
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    const double ui = u.values[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (cutoff < kInf && !(pair_dist(d, i, j) < cutoff)) continue;
      acc += t.W(i, j) * abs_pow(ui - u.values[j], p);
    }
    rows[i] = 2.0 * acc + 2.0 * abs_pow(ui, p) * kappa[i];
  });
  return sum_in_order(rows);
}

EnergyBreakdown energy(const GridFunction& u, const FormTables& tables) {
  require_same(u, tables);
  const std::size_t n = u.size();
  const double p = tables.params.p();
  struct Row {
    double plus, minus, frac;
  };
  std::vector<Row> rows(n);
  parallel_for(n, [&](std::size_t i) {
    Row r{0.0, 0.0, 0.0};
    const double ui = u.values[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = abs_pow(ui - u.values[j], p);
      r.plus += tables.plus.W(i, j) * a;
      r.minus += tables.minus.W(i, j) * a;
      r.frac += tables.frac.W(i, j) * a;
    }
    const double ai = abs_pow(ui, p);
    rows[i] = {2.0 * r.plus + 2.0 * ai * tables.plus.kappa(i),
               2.0 * r.minus + 2.0 * ai * tables.minus.kappa(i),
               2.0 * r.frac + 2.0 * ai * tables.frac.kappa(i)};
  });
  EnergyBreakdown e;
  for (const Row& r : rows) {
    e.Jplus += r.plus;
    e.Jminus += r.minus;
    e.Js += r.frac;
  }
  const Params& par = tables.params;
  e.total = 0.5 * p * (e.Jplus - e.Jminus) + 0.5 * par.B() * par.C() * e.Js;
  e.slog_seminorm_p = e.Jplus;
  e.frac_seminorm_p = e.Js;
  return e;
}

double energy_total_full(const GridFunction& u, const FormTables& tables) {
  require_same(u, tables);
  return 0.5 * table_energy(u, tables.full);
}

double energy_pairing(const GridFunction& u, const GridFunction& v, const FormTables& tables) {
  require_same(u, tables);
  require_same(v, tables);
  const std::size_t n = u.size();
  const double p = tables.params.p();
  const WeightTable& W = tables.full;
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = i + 1; j < n; ++j)
      acc += W.W(i, j) * phi_p(u.values[i] - u.values[j], p) * (v.values[i] - v.values[j]);
    rows[i] = acc + W.kappa(i) * phi_p(u.values[i], p) * v.values[i];
  });
  return sum_in_order(rows);
}

GridFunction energy_gradient(const GridFunction& u, const FormTables& tables) {
  require_same(u, tables);
  const std::size_t n = u.size();
  const double p = tables.params.p();
  const WeightTable& W = tables.full;
  GridFunction g{u.domain, std::vector<double>(n, 0.0)};
  parallel_for(n, [&](std::size_t k) {
    double acc = 0.0;
    const double uk = u.values[k];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      acc += W.W(k, j) * phi_p(uk - u.values[j], p);
    }
    g.values[k] = p * (acc + W.kappa(k) * phi_p(uk, p));
  });
  return g;
}

void Report::add(const CheckEntry& e) {
  entries.push_back(e);
  if (!e.asserted) return;
  pass = pass && e.pass;
  worst_margin = std::min(worst_margin, e.margin);
}

void Report::merge(const Report& o) {
  n_samples += o.n_samples;
  pass = pass && o.pass;
  worst_margin = std::min(worst_margin, o.worst_margin);
  ratios.insert(ratios.end(), o.ratios.begin(), o.ratios.end());
  for (const CheckEntry& e : o.entries)
    if (e.asserted && !e.pass) entries.push_back(e);
  for (const auto& kv : o.values) {
    auto it = std::find_if(values.begin(), values.end(),
                           [&](const auto& x) { return x.first == kv.first; });
    if (it == values.end()) values.push_back(kv);
  }
}

Report make_report(const std::string& check, const FormTables& tables) {
  Report r;
  r.check = check;
  r.N = tables.params.N();
  r.s = tables.params.s();
  r.p = tables.params.p();
  r.domain = describe(*tables.domain);
  return r;
}

Report check_form_bounds(const GridFunction& u, const FormTables& tables) {
  const Params& par = tables.params;
  const double p = par.p(), sp = par.sp(), C = par.C(), w = par.omega();
  const double diam = tables.domain->diam();
  const EnergyBreakdown e = energy(u, tables);
  const double norm_p = std::pow(lp_norm(u, p), p);

  Report rep = make_report("form-bounds", tables);
  rep.n_samples = 1;

  rep.add(leq("(1) Jminus >= 0", 0.0, e.Jminus));
  rep.add(leq("(1) Jminus <= 2^p w/(sp)^2 C |u|_p^p", e.Jminus,
              std::pow(2.0, p) * w / (sp * sp) * C * norm_p));

  if (diam < 1.0) {
    const double bound =
        -(2.0 * w / sp) * C * std::pow(diam, -sp) * (std::log(diam) + 1.0 / sp) * norm_p;
    rep.add(leq("(2) Jplus - Jminus >= lower bound", bound, e.Jplus - e.Jminus));
    if (diam <= std::exp(-1.0 / sp)) rep.add(leq("(2) Jplus - Jminus >= 0", 0.0, e.Jplus - e.Jminus));
  }

  for (double r : {0.5, 0.1, 0.01}) {
    const double tail = std::pow(2.0, p) * w / sp * std::pow(r, -sp) * norm_p;
    const std::string tag = "(3) r=" + std::to_string(r).substr(0, 4);
    rep.add(leq(tag + " Js <= -[u]^p/(C ln r) + tail", e.Js, -e.Jplus / (C * std::log(r)) + tail));
    rep.add(leq(tag + " variant with -p ln r", e.Js, e.Jplus / (C * (-p * std::log(r))) + tail,
                false));
  }

  if (diam <= std::exp(-1.0 / sp) && par.B() >= 0.0) {
    rep.add(leq("(4) total >= 0", 0.0, e.total));
    GridFunction a = u;
    bool changes_sign = false;
    bool has_pos = false, has_neg = false;
    for (double& v : a.values) {
      has_pos = has_pos || v > 0.0;
      has_neg = has_neg || v < 0.0;
      v = std::fabs(v);
    }
    changes_sign = has_pos && has_neg;
    const double ea = energy(a, tables).total;
    rep.add(leq("(4) energy(|u|) <= energy(u)", ea, e.total));
    if (changes_sign) {
      CheckEntry strict = leq("(4) strict for sign-changing u", ea, e.total);
      strict.pass = ea < e.total;
      rep.add(strict);
    }
  }
  rep.ratios.push_back(norm_p > 0.0 ? e.Jminus / norm_p : 0.0);
  return rep;
}

double poincare_constant(const FormTables& tables) {
  const Params& par = tables.params;
  const int N = par.N();
  const double diam = tables.domain->diam();
  const double a = std::min(diam, 1.0);
  return N * std::pow(diam, N + par.sp()) /
         (par.C() * par.omega() * std::pow(a, N) * (1.0 - N * std::log(a)));
}

Report check_poincare(const GridFunction& u, const FormTables& tables) {
  const double norm_p = std::pow(lp_norm(u, tables.params.p()), tables.params.p());
  if (norm_p == 0.0) throw DomainError("poincare check requires a nonzero function");
  const double cp = poincare_constant(tables);
  const double semi = energy(u, tables).Jplus;
  Report rep = make_report("poincare", tables);
  rep.n_samples = 1;
  rep.add(leq("|u|_p^p <= C_poin [u]^p", norm_p, cp * semi));
  rep.ratios.push_back(norm_p / (cp * semi));
  rep.values.push_back({"C_poin", cp});
  return rep;
}

double hardy_functional(const GridFunction& u, const FormTables& tables) {
  const double p = tables.params.p(), sp = tables.params.sp();
  const auto& d = tables.domain->boundary_distance();
  double h = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    h += abs_pow(u.values[i], p) * std::pow(d[i], -sp) * std::max(0.0, -std::log(d[i]));
  return h * tables.domain->cell_volume();
}

Report check_hardy(const GridFunction& u, const FormTables& tables) {
  const double semi = energy(u, tables).Jplus;
  if (semi == 0.0 && lp_norm(u, 2.0) == 0.0)
    throw DomainError("hardy check requires a nonzero function");
  const double ratio = hardy_functional(u, tables) / semi;
  Report rep = make_report("hardy", tables);
  rep.n_samples = 1;
  CheckEntry e;
  e.name = "H(u)/[u]^p finite";
  e.lhs = ratio;
  e.pass = std::isfinite(ratio);
  e.margin = e.pass ? 0.0 : -kInf;
  rep.add(e);
  rep.ratios.push_back(ratio);
  return rep;
}

EmbeddingMode parse_embedding_mode(const std::string& name) {
  if (name == "sobolev") return EmbeddingMode::sobolev;
  if (name == "gn") return EmbeddingMode::gn;
  if (name == "holder") return EmbeddingMode::holder;
  if (name == "strauss") return EmbeddingMode::strauss;
  throw DomainError("unknown embedding mode: " + name);
}

const char* to_string(EmbeddingMode mode) {
  switch (mode) {
    case EmbeddingMode::sobolev: return "sobolev";
    case EmbeddingMode::gn: return "gn";
    case EmbeddingMode::holder: return "holder";
    case EmbeddingMode::strauss: return "strauss";
  }
  return "?";
}

Report check_sobolev_gn(const GridFunction& u, const FormTables& tables, EmbeddingMode mode,
                        double q) {
  require_same(u, tables);
  const Params& par = tables.params;
  const int N = par.N();
  const double p = par.p(), s = par.s(), sp = par.sp();
  const double semi = energy(u, tables).Jplus;
  const double norm_p = lp_norm(u, p);
  double ratio = 0.0;
  Report rep = make_report(to_string(mode), tables);
  rep.n_samples = 1;

  switch (mode) {
    case EmbeddingMode::sobolev: {
      if (!(N > sp)) throw DomainError("sobolev mode requires N > s p");
      ratio = std::pow(lp_norm(u, par.p_star()), p) / semi;
      break;
    }
    case EmbeddingMode::gn: {
      if (!(N > sp)) throw DomainError("gn mode requires N > s p");
      const double ps = par.p_star();
      if (!(q >= p && q <= ps)) throw DomainError("gn mode requires q in [p, p*]");
      const double theta = (1.0 / p - 1.0 / q) / (1.0 / p - 1.0 / ps);
      const double wnorm = std::pow(std::pow(norm_p, p) + semi, 1.0 / p);
      ratio = lp_norm(u, q) / (std::pow(wnorm, theta) * std::pow(norm_p, 1.0 - theta));
      rep.values.push_back({"theta", theta});
      break;
    }
    case EmbeddingMode::holder: {
      if (!(sp > N)) throw DomainError("holder mode requires s p > N");
      const double beta = s - N / p;
      const GridDomain& d = *tables.domain;
      double quot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        quot = std::max(quot, std::fabs(u.values[i]) / std::pow(d.boundary_distance()[i], beta));
        for (std::size_t j = i + 1; j < u.size(); ++j)
          quot = std::max(quot, std::fabs(u.values[i] - u.values[j]) /
                                    std::pow(pair_dist(d, i, j), beta));
      }
      ratio = (lp_norm(u, kInf) + quot) / std::pow(semi, 1.0 / p);
      rep.values.push_back({"beta", beta});
      break;
    }
    case EmbeddingMode::strauss: {
      if (N < 2 || !(N > sp)) throw DomainError("strauss mode requires N >= 2 and N > s p");
      const GridDomain& d = *tables.domain;
      const double cx = 0.5 * (d.box()[0] + d.box()[1]);
      const double cy = 0.5 * (d.box()[2] + d.box()[3]);
      std::map<long long, std::pair<double, double>> by_radius;
      const double umax = lp_norm(u, kInf);
      double sup = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double rad = std::hypot(d.center(i)[0] - cx, d.center(i)[1] - cy);
        const long long key = std::llround(rad * rad / (d.h() * d.h()) * 1e6);
        auto [it, fresh] = by_radius.try_emplace(key, u.values[i], u.values[i]);
        if (!fresh) {
          it->second.first = std::min(it->second.first, u.values[i]);
          it->second.second = std::max(it->second.second, u.values[i]);
        }
        sup = std::max(sup, std::fabs(u.values[i]) * std::pow(rad, (N - sp) / p));
      }
      for (const auto& kv : by_radius)
        if (kv.second.second - kv.second.first > 1e-10 * std::max(umax, 1e-300))
          throw DomainError("strauss mode requires a radially symmetric function");
      ratio = sup / std::pow(std::pow(norm_p, p) + semi, 1.0 / p);
      break;
    }
  }
  CheckEntry e;
  e.name = std::string(to_string(mode)) + " ratio finite";
  e.lhs = ratio;
  e.pass = std::isfinite(ratio);
  e.margin = e.pass ? 0.0 : -kInf;
  rep.add(e);
  rep.ratios.push_back(ratio);
  return rep;
}

Report bounded_ratio_refinement(const std::string& check, const Report& coarse,
                                const Report& fine, double growth) {
  Report rep = fine;
  rep.check = check + "-refinement";
  rep.entries.clear();
  rep.pass = true;
  rep.worst_margin = kInf;
  auto maxr = [](const Report& r) {
    double m = 0.0;
    for (double x : r.ratios) m = std::max(m, x);
    return m;
  };
  const double mc = maxr(coarse), mf = maxr(fine);
  rep.add(leq("max ratio (fine) <= " + std::to_string(growth).substr(0, 4) + " x max ratio (coarse)",
              mf, growth * mc));
  rep.values.push_back({"max_ratio_coarse", mc});
  rep.values.push_back({"max_ratio_fine", mf});
  rep.pass = rep.pass && coarse.pass && fine.pass;
  return rep;
}

double diaz_saa_pointwise(const GridFunction& u, const GridFunction& v, double r, double p,
                          std::size_t i, std::size_t j) {
  const double ux = u.values[i], uy = u.values[j];
  const double vx = v.values[i], vy = v.values[j];
  auto w = [r](double a, double b) { return (std::pow(a, r) - std::pow(b, r)) / std::pow(a, r - 1.0); };
  return phi_p(ux - uy, p) * (w(ux, vx) - w(uy, vy)) + phi_p(vx - vy, p) * (w(vx, ux) - w(vy, uy));
}

Report check_diaz_saa(const GridFunction& u, const GridFunction& v, const FormTables& tables,
                      double r, std::size_t n_pairs, std::uint64_t seed) {
  require_same(u, tables);
  require_same(v, tables);
  const Params& par = tables.params;
  const double p = par.p();
  if (!(r > 1.0 && r <= p)) throw DomainError("diaz-saa requires r in (1, p]");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u.values[i] > 0.0) || !(v.values[i] > 0.0))
      throw DomainError("diaz-saa requires strictly positive u and v");
  if (!(tables.domain->diam() < std::exp(par.B() / p)))
    throw DomainError("diaz-saa requires diam < exp(B/p)");

  Report rep = make_report("diaz-saa", tables);
  rep.n_samples = 1;

  GridFunction wu = u, wv = v;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u.values[i], b = v.values[i];
    wu.values[i] = (std::pow(a, r) - std::pow(b, r)) / std::pow(a, r - 1.0);
    wv.values[i] = (std::pow(b, r) - std::pow(a, r)) / std::pow(b, r - 1.0);
  }
  const double ju = energy_pairing(u, wu, tables);
  const double jv = energy_pairing(v, wv, tables);
  const double diff = ju + jv;
  CheckEntry integral;
  integral.name = "J(u,(u^r-v^r)/u^{r-1}) - J(v,(v^r-u^r)/v^{r-1}) >= 0";
  integral.lhs = diff;
  const double scale = std::max({std::fabs(ju), std::fabs(jv), 1e-300});
  integral.margin = diff / scale;
  integral.pass = diff >= -kSignSlack * scale;
  rep.add(integral);
  rep.values.push_back({"integral_value", diff});

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, u.size() - 1);
  double worst = kInf;
  bool ok = true;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    if (j == i) j = (i + 1) % u.size();
    const double val = diaz_saa_pointwise(u, v, r, p, i, j);
    auto w = [r](double a, double b) { return std::fabs((std::pow(a, r) - std::pow(b, r)) / std::pow(a, r - 1.0)); };
    const double sc = std::fabs(phi_p(u.values[i] - u.values[j], p)) *
                          (w(u.values[i], v.values[i]) + w(u.values[j], v.values[j])) +
                      std::fabs(phi_p(v.values[i] - v.values[j], p)) *
                          (w(v.values[i], u.values[i]) + w(v.values[j], u.values[j]));
    const double m = sc > 0.0 ? val / sc : 0.0;
    worst = std::min(worst, m);
    if (m < -kSignSlack) ok = false;
  }
  CheckEntry pw;
  pw.name = "pointwise expression >= 0 on sampled pairs";
  pw.margin = worst;
  pw.pass = ok;
  rep.add(pw);
  rep.ratios.push_back(diff / scale);
  return rep;
}

double pohozaev_defect(const GridFunction& u, const FormTables& tables) {
  require_same(u, tables);
  const std::vector<double> kappa =
      killing_measure(*tables.domain, tables.params, KernelPart::frac, 1.0);
  return 0.5 * tables.params.C() * table_energy_restricted(u, tables.frac, 1.0, kappa);
}

double sandwich_ratio(const GridFunction& u, const FormTables& tables,
                      const WeightTable& frac_s_plus_eps) {
  return energy(u, tables).Jplus / table_energy(u, frac_s_plus_eps);
}

}  // namespace loglap
