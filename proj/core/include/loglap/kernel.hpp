#pragma once

#include <limits>

#include "loglap/specfun.hpp"

namespace loglap {

enum class KernelPart { full, plus, minus, frac };

const char* to_string(KernelPart part);
KernelPart parse_kernel_part(const char* name);

enum class RadialMode { pow, log };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class KernelSpec {
 public:
  explicit KernelSpec(const Params& params);

  const Params& params() const { return params_; }
  double C() const { return params_.C(); }
  double B() const { return params_.B(); }
  double r_star() const { return r_star_; }
  double e_inv() const { return e_inv_; }

 private:
  Params params_;
  double r_star_;
  double e_inv_;
};

struct KernelParts {
  double plus;
  double minus;
};

// C (B - p ln r) / r^{N+sp}
double kernel_full(const KernelSpec& k, double r);
KernelParts kernel_parts(const KernelSpec& k, double r);
// Pure r^{-N-sp}, no normalization constant.
double kernel_frac(const KernelSpec& k, double r);
double kernel_eval(const KernelSpec& k, KernelPart part, double r);
// Analytic dK/dr of kernel_full.
double kernel_full_derivative(const KernelSpec& k, double r);

double sign_change_radius(const KernelSpec& k);

// r K'(r) + (N+sp) K(r) + p C r^{-N-sp}; identically zero.
double commutator_residual(const KernelSpec& k, double r);
// The residual divided by p C r^{-N-sp}.
double commutator_residual_relative(const KernelSpec& k, double r);

// omega_N * int_{R1}^{R2} r^{-1-sp} {1, ln r} dr.
double annulus_integral(const KernelSpec& k, double R1, double R2, RadialMode mode);

// int_{R1}^{R2} kappa(r) r^{N-1} dr for a kernel part (no omega_N factor).
double radial_part_integral(const KernelSpec& k, KernelPart part, double R1, double R2);

}  // namespace loglap
