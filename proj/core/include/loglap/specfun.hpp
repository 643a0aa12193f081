#pragma once

#include <cmath>

namespace loglap {

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;

double ln_gamma(double x);
double digamma(double x);

// omega_N = 2 pi^{N/2} / Gamma(N/2), surface measure of the unit sphere.
double sphere_measure(int N);

// Normalization constant C(N,s,p). The s <= 1/2 branch is used at s = 1/2.
double norm_const(int N, double s, double p);

// C(N,s) for p = 2 in the classical closed form; used as a cross-check.
double norm_const_p2(int N, double s);

// B(N,s,p) = d/ds ln C(N,s,p).
double log_norm_const(int N, double s, double p);

struct ClassicalConst {
  double C;    // C(N,p)
  double rho;  // rho(N,p)
};
ClassicalConst classical_const(int N, double p);

// Root s0 in (1/2, 1) of s -> B(N,s,p).
double b_sign_threshold(int N, double p);

class Params {
 public:
  Params(int N, double s, double p);

  int N() const { return N_; }
  double s() const { return s_; }
  double p() const { return p_; }
  double sp() const { return s_ * p_; }
  double C() const { return C_; }
  double B() const { return B_; }
  double omega() const { return omega_; }
  bool has_p_star() const { return N_ > s_ * p_; }
  double p_star() const;

  bool operator==(const Params& o) const {
    return N_ == o.N_ && s_ == o.s_ && p_ == o.p_;
  }

 private:
  int N_;
  double s_;
  double p_;
  double C_;
  double B_;
  double omega_;
};

// Phi_p(a) = |a|^{p-2} a with Phi_p(0) = 0.
inline double phi_p(double a, double p) {
  if (a == 0.0) return 0.0;
  if (p == 2.0) return a;
  return std::copysign(std::pow(std::fabs(a), p - 1.0), a);
}
}  // namespace loglap
