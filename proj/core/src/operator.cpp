#include "loglap/operator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "loglap/error.hpp"
#include "loglap/kernel.hpp"

namespace loglap {

namespace {

double norm(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

struct Direction {
  Point d;
  double w;
};

// Half of an antipodally symmetric rule; weights sum to omega_N / 2.
std::vector<Direction> half_sphere_rule(int N, int m_azimuth, int m_polar) {
  std::vector<Direction> out;
  if (N == 1) {
    out.push_back({{1.0, 0.0, 0.0}, 1.0});
  } else if (N == 2) {
    for (int k = 0; k < m_azimuth; ++k) {
      const double th = kPi * (k + 0.5) / m_azimuth;
      out.push_back({{std::cos(th), std::sin(th), 0.0}, kPi / m_azimuth});
    }
  } else if (N == 3) {
    std::vector<double> gx, gw;
    gauss_legendre(m_polar, gx, gw);
    for (int i = 0; i < m_polar; ++i) {
      const double c = 0.5 * (gx[i] + 1.0);
      const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int k = 0; k < m_azimuth; ++k) {
        const double ph = 2.0 * kPi * (k + 0.5) / m_azimuth;
        out.push_back({{sn * std::cos(ph), sn * std::sin(ph), c},
                       0.5 * gw[i] * 2.0 * kPi / m_azimuth});
      }
    }
  } else {
    throw DomainError("pointwise evaluation supports N in {1, 2, 3}");
  }
  return out;
}

struct Panel {
  double a, b;
};

// Panels ordered innermost first: geometric levels below eps, geometric
// panels on [eps, min(1, R)], panels of width <= 1/2 beyond 1.
std::vector<Panel> radial_panels(double eps, int levels, double R) {
  if (!(eps > 0.0) || !(R > eps)) throw DomainError("quadrature requires 0 < eps < outer radius");
  std::vector<Panel> out;
  for (int k = levels - 1; k >= 0; --k)
    out.push_back({std::ldexp(eps, -k - 1), std::ldexp(eps, -k)});
  const double mid = std::min(1.0, R);
  if (mid > eps) {
    const int m = std::max(1, static_cast<int>(std::ceil(std::log2(mid / eps))));
    const double ratio = std::pow(mid / eps, 1.0 / m);
    double a = eps;
    for (int i = 0; i < m; ++i) {
      const double b = (i == m - 1) ? mid : a * ratio;
      out.push_back({a, b});
      a = b;
    }
  }
  if (R > 1.0) {
    const int m = std::max(1, static_cast<int>(std::ceil((R - 1.0) / 0.5)));
    const double w = (R - 1.0) / m;
    for (int i = 0; i < m; ++i) out.push_back({1.0 + i * w, i == m - 1 ? R : 1.0 + (i + 1) * w});
  }
  return out;
}

// Which radial integrals to accumulate.
enum class Mode { fractional, classical };

struct Sums {
  double I0 = 0.0;  // int r^{-1-a} A(r) dr  (classical: int r^{-1} (A - sub) dr)
  double I1 = 0.0;  // int r^{-1-a} ln r A(r) dr
  double innermost0 = 0.0;
  double innermost1 = 0.0;
  double rem0 = 0.0;  // power-law closure of (0, innermost radius)
  double rem1 = 0.0;
};

Sums integrate(const TestFunction& u, const Point& x, double p, double a, Mode mode,
               double sub, double eps, const std::vector<Panel>& panels, int n,
               const std::vector<Direction>& dirs) {
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);
  const double ux = u.value(x);
  // Below eps the differences u(x) - u(x +- z) come from the second-order
  // Taylor model; direct subtraction loses all digits as r -> 0.
  const bool taylor = static_cast<bool>(u.gradient) && static_cast<bool>(u.hessian);
  Point g{};
  Matrix3 H{};
  if (taylor) {
    g = u.gradient(x);
    H = u.hessian(x);
  }
  Sums s;
  bool first = true;
  int level = 0;
  double second0 = 0.0;
  for (const Panel& pan : panels) {
    const double c = 0.5 * (pan.a + pan.b);
    const double hw = 0.5 * (pan.b - pan.a);
    const bool inner = taylor && pan.b <= eps;
    double p0 = 0.0, p1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = c + hw * gx[i];
      double A = 0.0;
      for (const Direction& d : dirs) {
        if (inner) {
          double lin = 0.0, quad = 0.0;
          for (int k = 0; k < 3; ++k) {
            lin += g[k] * d.d[k];
            for (int l = 0; l < 3; ++l) quad += d.d[k] * H[k][l] * d.d[l];
          }
          lin *= r;
          quad *= 0.5 * r * r;
          A += d.w * (phi_p(-lin - quad, p) + phi_p(lin - quad, p));
          continue;
        }
        Point yp, ym;
        for (int k = 0; k < 3; ++k) {
          yp[k] = x[k] + r * d.d[k];
          ym[k] = x[k] - r * d.d[k];
        }
        A += d.w * (phi_p(ux - u.value(yp), p) + phi_p(ux - u.value(ym), p));
      }
      const double wt = hw * gw[i];
      if (mode == Mode::fractional) {
        const double g = std::exp((-1.0 - a) * std::log(r)) * A;
        p0 += wt * g;
        p1 += wt * g * std::log(r);
      } else {
        p0 += wt * (A - (r > 1.0 ? sub : 0.0)) / r;
      }
    }
    if (first) {
      s.innermost0 = p0;
      s.innermost1 = p1;
      first = false;
    } else if (level == 1) {
      second0 = p0;
    }
    ++level;
    s.I0 += p0;
    s.I1 += p1;
  }
  // Close (0, a) assuming a power law c r^beta fitted to the two innermost
  // geometric levels [a, 2a] and [2a, 4a].
  const double a0 = panels.front().a;
  if (panels.size() >= 2 && s.innermost0 != 0.0 && second0 != 0.0 &&
      std::fabs(panels[1].b - 4.0 * a0) < 1e-12 * a0) {
    const double ratio = second0 / s.innermost0;
    if (ratio > 1.0) {
      const double e = std::log2(ratio);  // beta + 1
      const double c = s.innermost0 * e / (std::pow(2.0 * a0, e) - std::pow(a0, e));
      const double ae = std::pow(a0, e);
      s.rem0 = c * ae / e;
      s.rem1 = c * ae * (std::log(a0) / e - 1.0 / (e * e));
      s.I0 += s.rem0;
      s.I1 += s.rem1;
    }
  }
  return s;
}

// Bisects panels above eps whose n- and n/2-node sums disagree; kinks of
// Phi_p(u(x) - u(y)) and support edges otherwise stall the Gauss rule.
std::vector<Panel> refine_panels(const TestFunction& u, const Point& x, double p, double a,
                                 Mode mode, double sub, const QuadratureSpec& q,
                                 const std::vector<Panel>& base,
                                 const std::vector<Direction>& dirs) {
  const int n = q.radial_nodes_per_level;
  auto diff = [&](const Panel& pan, double& size) {
    const std::vector<Panel> one{pan};
    const Sums f = integrate(u, x, p, a, mode, sub, q.inner_cutoff, one, n, dirs);
    const Sums c = integrate(u, x, p, a, mode, sub, q.inner_cutoff, one, n / 2, dirs);
    size = std::fabs(f.I0) + std::fabs(f.I1);
    return std::fabs(f.I0 - c.I0) + std::fabs(f.I1 - c.I1);
  };
  std::vector<double> err(base.size(), 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].b <= q.inner_cutoff) continue;
    double size = 0.0;
    err[i] = diff(base[i], size);
    scale += size;
  }
  const double local = 1e-3 * q.target_tol * std::max(1.0, scale);
  std::vector<Panel> out;
  std::function<void(const Panel&, double, int)> split = [&](const Panel& pan, double e, int depth) {
    if (e <= local || depth >= 20) {
      out.push_back(pan);
      return;
    }
    const double m = 0.5 * (pan.a + pan.b);
    const Panel lo{pan.a, m}, hi{m, pan.b};
    double size = 0.0;
    const double el = diff(lo, size), eh = diff(hi, size);
    split(lo, el, depth + 1);
    split(hi, eh, depth + 1);
  };
  for (std::size_t i = 0; i < base.size(); ++i) split(base[i], err[i], 0);
  return out;
}

double outer_radius(const TestFunction& u, const Point& x, const QuadratureSpec& q) {
  if (q.outer_radius > 0.0) return q.outer_radius;
  return u.quadrature_radius + norm(x);
}

struct Estimates {
  Sums main;
  double err0 = 0.0;
  double err1 = 0.0;
};

Estimates run(const TestFunction& u, const Point& x, int N, double p, double a, Mode mode,
              const QuadratureSpec& q, double R) {
  if (u.dim != N) throw DomainError("test function dimension differs from N");
  if (q.radial_nodes_per_level < 2 || q.levels < 1 || q.angular_nodes < 2 || q.polar_nodes < 2)
    throw DomainError("quadrature node counts too small");
  const auto dirs = half_sphere_rule(N, q.angular_nodes, q.polar_nodes);
  double omega = 0.0;
  for (const auto& d : dirs) omega += 2.0 * d.w;
  const double sub = omega * phi_p(u.value(x), p);
  const auto panels = refine_panels(u, x, p, a, mode, sub, q, radial_panels(q.inner_cutoff, q.levels, R), dirs);

  Estimates e;
  e.main = integrate(u, x, p, a, mode, sub, q.inner_cutoff, panels, q.radial_nodes_per_level, dirs);
  const Sums coarse =
      integrate(u, x, p, a, mode, sub, q.inner_cutoff, panels, q.radial_nodes_per_level / 2, dirs);
  e.err0 = std::fabs(e.main.I0 - coarse.I0) + 1e-2 * std::fabs(e.main.rem0) +
           1e-6 * std::fabs(e.main.innermost0);
  e.err1 = std::fabs(e.main.I1 - coarse.I1) + 1e-2 * std::fabs(e.main.rem1) +
           1e-6 * std::fabs(e.main.innermost1);
  if (N >= 2) {
    const auto half = half_sphere_rule(N, q.angular_nodes / 2, std::max(2, q.polar_nodes / 2));
    double om = 0.0;
    for (const auto& d : half) om += 2.0 * d.w;
    const Sums ang = integrate(u, x, p, a, mode, om * phi_p(u.value(x), p), q.inner_cutoff, panels,
                               q.radial_nodes_per_level, half);
    e.err0 += std::fabs(e.main.I0 - ang.I0);
    e.err1 += std::fabs(e.main.I1 - ang.I1);
  }
  return e;
}

void check_tol(const OperatorValue& v, const QuadratureSpec& q) {
  if (!(v.error <= q.target_tol * std::max(1.0, std::fabs(v.value))))
    throw ToleranceError("quadrature tolerance not met", v.error);
}

}  // namespace

namespace functions {

TestFunction gaussian(int dim) {
  TestFunction f;
  f.dim = dim;
  f.name = "gaussian";
  f.value = [](const Point& x) {
    return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  };
  f.gradient = [f](const Point& x) {
    const double v = f.value(x);
    return Point{-x[0] * v, -x[1] * v, -x[2] * v};
  };
  f.hessian = [f](const Point& x) {
    const double v = f.value(x);
    Matrix3 h{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h[i][j] = (x[i] * x[j] - (i == j ? 1.0 : 0.0)) * v;
    return h;
  };
  f.support_radius = std::sqrt(2.0 * 300.0 * std::log(10.0));
  f.quadrature_radius = 12.0;
  f.smoothness = Smoothness::schwartz;
  return f;
}

TestFunction bump(int dim, double radius) {
  TestFunction f;
  f.dim = dim;
  f.name = "bump";
  const double R2 = radius * radius;
  f.value = [R2](const Point& x) {
    const double t = 1.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / R2;
    return t > 0.0 ? t * t * t : 0.0;
  };
  f.gradient = [R2](const Point& x) {
    const double t = 1.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / R2;
    if (t <= 0.0) return Point{0.0, 0.0, 0.0};
    const double c = -6.0 * t * t / R2;
    return Point{c * x[0], c * x[1], c * x[2]};
  };
  f.hessian = [R2](const Point& x) {
    const double t = 1.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / R2;
    Matrix3 h{};
    if (t <= 0.0) return h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        h[i][j] = 24.0 * t * x[i] * x[j] / (R2 * R2) - (i == j ? 6.0 * t * t / R2 : 0.0);
    return h;
  };
  f.support_radius = radius;
  f.quadrature_radius = radius;
  f.smoothness = Smoothness::C2_compact;
  return f;
}

TestFunction odd_gaussian(int dim) {
  TestFunction f;
  f.dim = dim;
  f.name = "odd_gaussian";
  f.value = [](const Point& x) {
    return x[0] * std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  };
  f.gradient = [](const Point& x) {
    const double e = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    return Point{(1.0 - 2.0 * x[0] * x[0]) * e, -2.0 * x[0] * x[1] * e,
                 -2.0 * x[0] * x[2] * e};
  };
  f.hessian = [](const Point& x) {
    const double e = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    Matrix3 h{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = 4.0 * x[0] * x[i] * x[j];
        if (i == j) v -= 2.0 * x[0];
        if (i == 0) v -= 2.0 * x[j];
        if (j == 0) v -= 2.0 * x[i];
        h[i][j] = v * e;
      }
    return h;
  };
  f.support_radius = 27.0;
  f.quadrature_radius = 9.0;
  f.smoothness = Smoothness::schwartz;
  return f;
}

TestFunction zero(int dim) {
  TestFunction f;
  f.dim = dim;
  f.name = "zero";
  f.value = [](const Point&) { return 0.0; };
  f.gradient = [](const Point&) { return Point{0.0, 0.0, 0.0}; };
  f.hessian = [](const Point&) { return Matrix3{}; };
  f.support_radius = 1.0;
  f.quadrature_radius = 1.0;
  f.smoothness = Smoothness::C2_compact;
  return f;
}

TestFunction shifted(const TestFunction& u, const Point& c) {
  TestFunction f = u;
  f.name = u.name + "_shifted";
  auto sub = [c](const Point& x) { return Point{x[0] - c[0], x[1] - c[1], x[2] - c[2]}; };
  f.value = [u, sub](const Point& x) { return u.value(sub(x)); };
  f.gradient = [u, sub](const Point& x) { return u.gradient(sub(x)); };
  f.hessian = [u, sub](const Point& x) { return u.hessian(sub(x)); };
  f.support_radius = u.support_radius + norm(c);
  f.quadrature_radius = u.quadrature_radius + norm(c);
  return f;
}

TestFunction dilated(const TestFunction& u, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("dilation factor must be > 0");
  TestFunction f = u;
  f.name = u.name + "_dilated";
  auto sc = [lambda](const Point& x) { return Point{x[0] / lambda, x[1] / lambda, x[2] / lambda}; };
  f.value = [u, sc](const Point& x) { return u.value(sc(x)); };
  f.gradient = [u, sc, lambda](const Point& x) {
    Point g = u.gradient(sc(x));
    for (double& v : g) v /= lambda;
    return g;
  };
  f.hessian = [u, sc, lambda](const Point& x) {
    Matrix3 h = u.hessian(sc(x));
    for (auto& row : h)
      for (double& v : row) v /= lambda * lambda;
    return h;
  };
  f.support_radius = u.support_radius * lambda;
  f.quadrature_radius = u.quadrature_radius * lambda;
  return f;
}

}  // namespace functions

OperatorValue eval_frac_plap(const TestFunction& u, const Point& x, int N, double t,
                             double p, const QuadratureSpec& q) {
  const Params par(N, t, p);
  const KernelSpec k(par);
  const double R = outer_radius(u, x, q);
  const Estimates e = run(u, x, N, p, par.sp(), Mode::fractional, q, R);
  const double tail = phi_p(u.value(x), p) * annulus_integral(k, R, kInf, RadialMode::pow);
  OperatorValue v{par.C() * (e.main.I0 + tail), par.C() * e.err0};
  check_tol(v, q);
  return v;
}

OperatorValue eval_log_plap(const TestFunction& u, const Point& x, int N, double s,
                            double p, const QuadratureSpec& q) {
  const Params par(N, s, p);
  const KernelSpec k(par);
  const double R = outer_radius(u, x, q);
  const Estimates e = run(u, x, N, p, par.sp(), Mode::fractional, q, R);
  const double phx = phi_p(u.value(x), p);
  const double I0 = e.main.I0 + phx * annulus_integral(k, R, kInf, RadialMode::pow);
  const double I1 = e.main.I1 + phx * annulus_integral(k, R, kInf, RadialMode::log);
  OperatorValue v{par.C() * (par.B() * I0 - p * I1),
                  par.C() * (std::fabs(par.B()) * e.err0 + p * e.err1)};
  check_tol(v, q);
  return v;
}

OperatorValue eval_log_plap_zero(const TestFunction& u, const Point& x, int N, double p,
                                 const QuadratureSpec& q) {
  const ClassicalConst cc = classical_const(N, p);
  const double R = std::max(1.0, outer_radius(u, x, q));
  const Estimates e = run(u, x, N, p, 0.0, Mode::classical, q, R);
  OperatorValue v{cc.C * e.main.I0 + cc.rho * phi_p(u.value(x), p), cc.C * e.err0};
  check_tol(v, q);
  return v;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs >= 2 points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

DerivativeStudy derivative_consistency(const TestFunction& u, const Point& x, int N,
                                       double s, double p,
                                       const std::vector<double>& h_list,
                                       const QuadratureSpec& q) {
  DerivativeStudy out;
  const OperatorValue direct = eval_log_plap(u, x, N, s, p, q);
  std::vector<double> hs, errs;
  for (double h : h_list) {
    if (!(h > 0.0) || s - h <= 0.0 || s + h >= 1.0)
      throw DomainError("derivative step leaves (0, 1)");
    const OperatorValue up = eval_frac_plap(u, x, N, s + h, p, q);
    const OperatorValue dn = eval_frac_plap(u, x, N, s - h, p, q);
    const double fd = (up.value - dn.value) / (2.0 * h);
    const double err = std::fabs(fd - direct.value);
    const double noise = (up.error + dn.error) / (2.0 * h) + direct.error;
    if (err <= noise) out.noise_dominated = true;
    out.rows.push_back({h, fd, direct.value, err});
    hs.push_back(h);
    errs.push_back(std::max(err, 1e-300));
  }
  if (hs.size() >= 2) out.slope = loglog_slope(hs, errs);
  return out;
}

std::vector<SmallSRow> small_s_limit_study(const TestFunction& u,
                                           const std::vector<Point>& points, int N,
                                           double p, const std::vector<double>& s_list,
                                           const QuadratureSpec& q) {
  std::vector<double> ref;
  for (const Point& x : points) ref.push_back(eval_log_plap_zero(u, x, N, p, q).value);
  std::vector<SmallSRow> rows;
  for (double s : s_list) {
    if (!(s > 0.0 && s <= 0.2)) throw DomainError("small-s study requires s in (0, 0.2]");
    double sup = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      sup = std::max(sup, std::fabs(eval_log_plap(u, points[i], N, s, p, q).value - ref[i]));
    rows.push_back({s, sup});
  }
  return rows;
}

}  // namespace loglap
