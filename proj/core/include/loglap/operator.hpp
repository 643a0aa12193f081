#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "loglap/specfun.hpp"

namespace loglap {

using Point = std::array<double, 3>;
using Matrix3 = std::array<std::array<double, 3>, 3>;

enum class Smoothness { C2_compact, schwartz };

struct TestFunction {
  int dim = 1;
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
  std::function<Matrix3(const Point&)> hessian;
  double support_radius = 0.0;  // |u| < 1e-300 outside this ball about 0
  double quadrature_radius = 0.0;  // default outer radius for the quadrature
  Smoothness smoothness = Smoothness::schwartz;
  std::string name;
};

namespace functions {
// exp(-|x|^2 / 2)
TestFunction gaussian(int dim);
// (1 - |x|^2/R^2)^3 on |x| < R
TestFunction bump(int dim, double radius = 1.0);
// x_1 exp(-|x|^2)
TestFunction odd_gaussian(int dim);
TestFunction zero(int dim);
// x -> u(x - c)
TestFunction shifted(const TestFunction& u, const Point& c);
// x -> u(x / lambda)
TestFunction dilated(const TestFunction& u, double lambda);
}  // namespace functions

struct QuadratureSpec {
  double inner_cutoff = 1e-4;
  double outer_radius = 0.0;  // 0 selects the support radius (12 for Gaussians)
  int radial_nodes_per_level = 32;
  int levels = 40;
  int angular_nodes = 64;      // uniform circle (N = 2), azimuthal nodes (N = 3)
  int polar_nodes = 16;        // Gauss-Legendre in cos(theta) (N = 3)
  double target_tol = 1e-6;
};

struct OperatorValue {
  double value = 0.0;
  double error = 0.0;  // estimated absolute quadrature error
};

OperatorValue eval_frac_plap(const TestFunction& u, const Point& x, int N, double t,
                             double p, const QuadratureSpec& q = {});
OperatorValue eval_log_plap(const TestFunction& u, const Point& x, int N, double s,
                            double p, const QuadratureSpec& q = {});
OperatorValue eval_log_plap_zero(const TestFunction& u, const Point& x, int N, double p,
                                 const QuadratureSpec& q = {});

struct DerivativeRow {
  double h;
  double fd_value;
  double direct_value;
  double abs_err;
};

struct DerivativeStudy {
  std::vector<DerivativeRow> rows;
  double slope = 0.0;          // least-squares slope of log(err) against log(h)
  bool noise_dominated = false;
};

DerivativeStudy derivative_consistency(const TestFunction& u, const Point& x, int N,
                                       double s, double p,
                                       const std::vector<double>& h_list,
                                       const QuadratureSpec& q = {});

struct SmallSRow {
  double s;
  double sup_error;
};

std::vector<SmallSRow> small_s_limit_study(const TestFunction& u,
                                           const std::vector<Point>& points, int N,
                                           double p, const std::vector<double>& s_list,
                                           const QuadratureSpec& q = {});

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace loglap
