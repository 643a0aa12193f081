#include "loglap/specfun.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <string>

#include "loglap/error.hpp"

namespace loglap {

namespace {

void require_params(int N, double s, double p) {
  if (N < 1) throw DomainError("N must be >= 1, got " + std::to_string(N));
  if (!(s > 0.0 && s < 1.0))
    throw DomainError("s must lie in (0,1), got " + std::to_string(s));
  if (!(p > 1.0) || !std::isfinite(p))
    throw DomainError("p must be > 1, got " + std::to_string(p));
}

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("ln_gamma requires finite x > 0");
  return boost::math::lgamma(x);
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("digamma requires finite x > 0");
  return boost::math::digamma(x);
}

double sphere_measure(int N) {
  if (N < 1) throw DomainError("sphere_measure requires N >= 1");
  const double h = 0.5 * N;
  return 2.0 * std::exp(h * std::log(kPi) - ln_gamma(h));
}

double norm_const(int N, double s, double p) {
  require_params(N, s, p);
  const double g = ln_gamma(0.5 * (N + s * p)) - ln_gamma(1.0 - s);
  double lnc;
  if (s > 0.5) {
    lnc = std::log(s * p) + 2.0 * (s - 1.0) * kLn2 + g -
          0.5 * (N - 1) * std::log(kPi) - ln_gamma(0.5 * (p + 1.0));
  } else {
    lnc = std::log(s * p) + (2.0 * s - 1.0) * kLn2 + g - 0.5 * N * std::log(kPi);
  }
  return std::exp(lnc);
}

double norm_const_p2(int N, double s) {
  require_params(N, s, 2.0);
  return std::exp(std::log(s) + 2.0 * s * kLn2 + ln_gamma(0.5 * N + s) -
                  0.5 * N * std::log(kPi) - ln_gamma(1.0 - s));
}

double log_norm_const(int N, double s, double p) {
  require_params(N, s, p);
  return 2.0 * kLn2 + 1.0 / s + 0.5 * p * digamma(0.5 * (N + s * p)) +
         digamma(1.0 - s);
}

ClassicalConst classical_const(int N, double p) {
  if (N < 1) throw DomainError("classical_const requires N >= 1");
  if (!(p > 1.0)) throw DomainError("classical_const requires p > 1");
  const double h = 0.5 * N;
  ClassicalConst c;
  c.C = 0.5 * p * std::exp(ln_gamma(h) - h * std::log(kPi));
  c.rho = 2.0 * kLn2 + 0.5 * p * digamma(h) - kEulerGamma;
  return c;
}

double b_sign_threshold(int N, double p) {
  double lo = 0.5;
  double hi = 1.0 - 1e-9;
  double blo = log_norm_const(N, lo, p);
  double bhi = log_norm_const(N, hi, p);
  if (!(blo > 0.0 && bhi < 0.0))
    throw std::runtime_error("B(N,s,p) does not change sign on [1/2, 1)");
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 80; ++it) {
    mid = 0.5 * (lo + hi);
    const double bm = log_norm_const(N, mid, p);
    if (std::fabs(bm) < 1e-13 || hi - lo < 1e-16) break;
    if (bm > 0.0) lo = mid; else hi = mid;
  }
  return mid;
}

Params::Params(int N, double s, double p) : N_(N), s_(s), p_(p) {
  require_params(N, s, p);
  C_ = norm_const(N, s, p);
  B_ = log_norm_const(N, s, p);
  omega_ = sphere_measure(N);
}

double Params::p_star() const {
  if (!has_p_star()) throw DomainError("p_star requires N > s*p");
  return N_ * p_ / (N_ - s_ * p_);
}

}  // namespace loglap
