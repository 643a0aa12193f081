// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "loglap/eigen.hpp"
#include "loglap/forms.hpp"
#include "loglap/kernel.hpp"
#include "loglap/operator.hpp"
#include "loglap/parallel.hpp"
#include "loglap/specfun.hpp"

using namespace loglap;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> body;
};

const KernelPart kParts[] = {KernelPart::full, KernelPart::plus, KernelPart::minus, KernelPart::frac};

DomainPtr baseline_domain(double h = 0.003) { return build_grid(Shape::interval, {0.0, 0.3}, h); }
Params baseline_params() { return Params(1, 0.5, 2.0); }

void constants(Outcome& o) {
  o.require(std::fabs(norm_const(1, 0.5, 2.0) - 1.0 / kPi) <= 1e-12, "C(1,0.5,2) = 1/pi");
  double worst_branch = 0.0;
  for (int N = 1; N <= 3; ++N)
    for (int k = 0; k < 10; ++k) {
      const double s = 0.05 + 0.1 * k;  // five points on each side of 1/2
      const double c = norm_const_p2(N, s);
      worst_branch = std::max(worst_branch, std::fabs(norm_const(N, s, 2.0) - c) / c);
    }
  o.require(worst_branch <= 1e-12, "p=2 branches");
  double worst_fd = 0.0;
  for (int N = 1; N <= 2; ++N)
    for (double s : {0.15, 0.3, 0.45, 0.7, 0.9})
      for (double p : {1.5, 3.0}) {
        const double d = 1e-5;
        const double fd = (std::log(norm_const(N, s + d, p)) - std::log(norm_const(N, s - d, p))) / (2 * d);
        worst_fd = std::max(worst_fd, std::fabs(fd - log_norm_const(N, s, p)));
      }
  o.require(worst_fd <= 1e-6, "d ln C / ds = B");
  o.detail << "branch_rel=" << worst_branch << " fd_abs=" << worst_fd;
}

void kernel_identities(Outcome& o) {
  double worst_comm = 0.0, worst_sign = 0.0, worst_dec = 0.0;
  for (const Params& par : {Params(1, 0.5, 2.0), Params(2, 0.3, 1.5), Params(3, 0.8, 3.0)}) {
    const KernelSpec k(par);
    for (int i = 0; i < 200; ++i) {
      const double r = 1e-4 * std::pow(1e6, i / 199.0);
      worst_comm = std::max(worst_comm, std::fabs(commutator_residual_relative(k, r)));
      const KernelParts kp = kernel_parts(k, r);
      const double bc = par.B() * par.C() * kernel_frac(k, r);
      const double scale = std::fabs(bc) + par.p() * (kp.plus + kp.minus);
      worst_dec = std::max(worst_dec, std::fabs(kernel_full(k, r) - (bc + par.p() * (kp.plus - kp.minus))) / scale);
    }
    // bisection on the sign of K, independent of the closed form
    double lo = 1e-3, hi = 1e3;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (kernel_full(k, mid) > 0.0 ? lo : hi) = mid;
    }
    worst_sign = std::max(worst_sign, std::fabs(std::sqrt(lo * hi) - std::exp(par.B() / par.p())));
    worst_sign = std::max(worst_sign, std::fabs(sign_change_radius(k) - std::exp(par.B() / par.p())));
  }
  o.require(worst_comm <= 1e-10, "commutator");
  o.require(worst_sign <= 1e-9, "sign change");
  o.require(worst_dec <= 1e-14, "decomposition");
  o.detail << "commutator=" << worst_comm << " sign=" << worst_sign << " decomposition=" << worst_dec;
}

void closed_form_integrals(Outcome& o) {
  const KernelSpec k(baseline_params());
  const double v = annulus_integral(k, 1.0, kInf, RadialMode::log);
  o.require(std::fabs(v - 2.0) <= 1e-13, "log annulus (1,inf) = 2");
  double worst_general = 0.0;
  for (const Params& par : {Params(2, 0.4, 2.5), Params(3, 0.7, 1.5)}) {
    const double want = par.omega() / (par.sp() * par.sp());
    worst_general = std::max(worst_general,
                             std::fabs(annulus_integral(KernelSpec(par), 1.0, kInf, RadialMode::log) - want) / want);
  }
  o.require(worst_general <= 1e-13, "omega/(sp)^2");
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-2.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    double a = std::pow(10.0, U(rng)), b = std::pow(10.0, U(rng));
    if (a > b) std::swap(a, b);
    b = std::max(b, 1.1 * a);
    for (RadialMode mode : {RadialMode::pow, RadialMode::log}) {
      // r = e^t: the integrand becomes e^{-t} (times t for the log mode)
      auto f = [&](double t) { return mode == RadialMode::pow ? std::exp(-t) : t * std::exp(-t); };
      const double ref =
          2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(a), std::log(b), 12, 1e-14);
      const double got = annulus_integral(k, a, b, mode);
      worst = std::max(worst, std::fabs(got - ref) / std::max(1.0, std::fabs(ref)));
    }
  }
  o.require(worst <= 1e-10, "adaptive cross-check");
  o.detail << "log_annulus=" << v << " adaptive_rel=" << worst;
}

void operator_oracle(Outcome& o) {
  const auto u = functions::gaussian(1);
  const Point x0{0.0, 0.0, 0.0};
  double worst_frac = 0.0;
  for (double s : {0.25, 0.5, 0.75}) {
    const double want = std::pow(2.0, s) * std::tgamma(s + 0.5) / std::sqrt(kPi);
    worst_frac = std::max(worst_frac, std::fabs(eval_frac_plap(u, x0, 1, s, 2.0).value - want));
  }
  const double s = 0.5;
  const double oracle_ds = std::pow(2.0, s) * std::tgamma(s + 0.5) / std::sqrt(kPi) * (kLn2 + digamma(s + 0.5));
  const double log_err = std::fabs(eval_log_plap(u, x0, 1, s, 2.0).value - oracle_ds);
  const double zero_err = std::fabs(eval_log_plap_zero(u, x0, 1, 2.0).value - (-kEulerGamma - kLn2));
  o.require(worst_frac <= 1e-4, "frac oracle");
  o.require(log_err <= 2e-4, "log oracle");
  o.require(zero_err <= 1e-4, "zero-order oracle");
  o.detail << "frac=" << worst_frac << " log=" << log_err << " zero=" << zero_err;
}

void derivative_expansion(Outcome& o) {
  const auto bump = functions::bump(1, 1.0);
  const Point x{0.2, 0.0, 0.0};
  for (double p : {2.0, 3.0}) {
    const DerivativeStudy d = derivative_consistency(bump, x, 1, 0.4, p, {1e-2, 5e-3, 2.5e-3});
    o.require(d.slope >= 1.7 && d.slope <= 2.3, "slope p=" + std::to_string(p));
    o.detail << "slope(p=" << p << ")=" << d.slope << " ";
  }
  const auto g = functions::gaussian(1);
  const auto rows = small_s_limit_study(g, {{0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}, {1.0, 0.0, 0.0}}, 1, 2.0,
                                        {0.2, 0.1, 0.05, 0.02});
  bool decreasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].sup_error < rows[i - 1].sup_error;
  o.require(decreasing, "small-s sup error decreasing");
  o.detail << "small_s_sup=";
  for (const auto& r : rows) o.detail << r.sup_error << (&r == &rows.back() ? "" : ",");
}

void form_bounds(Outcome& o) {
  const FormTables t = build_form_tables(baseline_domain(), baseline_params());
  Report agg;
  for (int k = 0; k < 100; ++k) {
    const Report r = check_form_bounds(sample_function(t.domain, SampleSource::random(1 + k)), t);
    if (k == 0) agg = r;
    else agg.merge(r);
  }
  bool all_items = true;
  const Report one = check_form_bounds(sample_function(t.domain, SampleSource::random(1)), t);
  for (char item : {'1', '2', '3', '4'}) {
    bool seen = false;
    for (const CheckEntry& e : one.entries) seen = seen || (e.asserted && e.name[1] == item);
    all_items = all_items && seen;
  }
  o.require(all_items, "items (1)-(4) asserted");
  o.require(agg.pass && agg.n_samples == 100, "bounds on 100 functions");
  o.detail << "samples=" << agg.n_samples << " worst_margin=" << agg.worst_margin;
}

void poincare(Outcome& o) {
  const FormTables t = build_form_tables(baseline_domain(), baseline_params());
  const double cp = poincare_constant(t);
  Report agg;
  for (int k = 0; k < 100; ++k) {
    const Report r = check_poincare(sample_function(t.domain, SampleSource::random(1 + k)), t);
    if (k == 0) agg = r;
    else agg.merge(r);
  }
  double max_ratio = 0.0;
  for (double r : agg.ratios) max_ratio = std::max(max_ratio, r);
  o.require(std::fabs(cp - 0.2138) <= 5e-5, "C_poin ~ 0.2138");
  o.require(agg.pass, "inequality on 100 functions");
  o.detail << "C_poin=" << cp << " max_ratio=" << max_ratio;
}

void diaz_saa_picone(Outcome& o) {
  const FormTables t = build_form_tables(baseline_domain(), baseline_params());
  Report agg;
  for (int k = 0; k < 20; ++k) {
    GridFunction u = sample_function(t.domain, SampleSource::random(100 + 2 * k));
    GridFunction v = sample_function(t.domain, SampleSource::random(101 + 2 * k));
    for (double& x : u.values) x += 1.1;
    for (double& x : v.values) x += 1.1;
    const Report r = check_diaz_saa(u, v, t, 2.0, 10000, 7 + k);
    if (k == 0) agg = r;
    else agg.merge(r);
  }
  o.require(agg.pass, "pointwise and integral inequality");
  const EigenResult eig = minimize_first(t);
  const Report pic = verify_eigen_properties(eig, t, {1e-2, 1e-3, 1e-4}, 10000, 3);
  bool picone_ok = true;
  for (const CheckEntry& e : pic.entries)
    if (e.name.rfind("(d)", 0) == 0) picone_ok = picone_ok && e.pass;
  o.require(picone_ok, "Picone on the eigenfunction");
  o.detail << "pairs=20 worst_margin=" << agg.worst_margin << " picone_margin=" << pic.worst_margin;
}

void eigen_suite(Outcome& o) {
  const FormTables t = build_form_tables(baseline_domain(), baseline_params());
  const EigenResult r = minimize_first(t);
  o.require(r.lambda > 0.0, "lambda > 0");
  double spread = 0.0, dist = 0.0;
  for (double l : r.restart_lambdas) spread = std::max(spread, std::fabs(l - r.lambda) / r.lambda);
  for (const GridFunction& f : r.restart_functions)
    for (std::size_t i = 0; i < f.size(); ++i)
      dist = std::max(dist, std::fabs(f[i] - r.restart_functions[0][i]));
  o.require(r.restart_lambdas.size() == 5 && spread <= 1e-6, "restarts agree");
  o.require(dist <= 1e-4, "eigenfunctions agree");
  const Report props = verify_eigen_properties(r, t, {1e-3});
  bool positive = true, residual_ok = true;
  for (const CheckEntry& e : props.entries) {
    if (e.name.rfind("(a)", 0) == 0) positive = positive && e.pass;
    if (e.name.rfind("(b)", 0) == 0) residual_ok = residual_ok && e.pass;
  }
  o.require(positive, "interior positivity");
  o.require(residual_ok && r.residual <= 1e-5 * std::max(1.0, r.lambda), "weak residual");
  std::vector<double> lambdas;
  for (double h : {0.006, 0.003, 0.0015})
    lambdas.push_back(minimize_first(build_form_tables(baseline_domain(h), baseline_params())).lambda);
  const double d1 = std::fabs(lambdas[1] - lambdas[0]), d2 = std::fabs(lambdas[2] - lambdas[1]);
  o.require(d2 < d1, "mesh increments decrease");
  o.detail << "lambda=" << r.lambda << " spread=" << spread << " sup_dist=" << dist << " residual=" << r.residual
           << " mesh=" << lambdas[0] << "," << lambdas[1] << "," << lambdas[2];
}

void gradient_check(Outcome& o) {
  const DomainPtr d = baseline_domain();
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    const FormTables t = build_form_tables(d, Params(1, 0.5, p));
    for (int f = 0; f < 5; ++f) {
      const GridFunction u = sample_function(d, SampleSource::random(500 + f));
      const GridFunction g = energy_gradient(u, t);
      for (int c = 0; c < 20; ++c) {
        const std::size_t k = rng() % d->size();
        const double step = 1e-6;
        GridFunction up = u, dn = u;
        up.values[k] += step;
        dn.values[k] -= step;
        const double fd = (energy(up, t).total - energy(dn, t).total) / (2.0 * step);
        worst = std::max(worst, std::fabs(g[k] - fd) / std::max(std::fabs(g[k]), std::fabs(fd)));
      }
    }
  }
  o.require(worst <= 1e-5, "gradient vs finite differences");
  o.detail << "worst_rel=" << worst;
}

void oracle_equivalence(Outcome& o) {
  double worst = 0.0;
  for (const DomainPtr& d : {baseline_domain(), build_grid(Shape::box, {0.0, 0.2, 0.0, 0.2}, 0.01)}) {
    const FormTables t = build_form_tables(d, Params(d->dim(), 0.5, 2.5));
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const GridFunction u = sample_function(d, SampleSource::random(seed));
      for (KernelPart part : kParts) {
        const WeightTable& w = t.get(part);
        double dense = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
          for (std::size_t j = 0; j < u.size(); ++j) dense += w.W(i, j) * std::pow(std::fabs(u[i] - u[j]), 2.5);
          dense += 2.0 * std::pow(std::fabs(u[i]), 2.5) * w.kappa(i);
        }
        for (int threads : {1, 4}) {
          set_thread_count(threads);
          worst = std::max(worst, std::fabs(table_energy(u, w) - dense) / std::fabs(dense));
        }
      }
    }
  }
  set_thread_count(0);
  o.require(worst <= 1e-13, "blocked vs dense");
  o.detail << "worst_rel=" << worst;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "constants", 1.0, constants},
      {2, "kernel identities", 1.0, kernel_identities},
      {3, "closed-form integrals", 5.0, closed_form_integrals},
      {4, "operator oracle", 60.0, operator_oracle},
      {5, "derivative expansion", 300.0, derivative_expansion},
      {6, "energy form bounds", 30.0, form_bounds},
      {7, "poincare", 30.0, poincare},
      {8, "diaz-saa / picone", 60.0, diaz_saa_picone},
      {9, "first eigenpair", 600.0, eigen_suite},
      {10, "gradient master check", 60.0, gradient_check},
      {11, "oracle equivalence", 60.0, oracle_equivalence},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail << " [over budget " << c.budget_s << " s]";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-24s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
