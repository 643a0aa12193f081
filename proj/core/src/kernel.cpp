#include "loglap/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "loglap/error.hpp"

namespace loglap {

namespace {

void require_positive(double r) {
  if (!(r > 0.0)) throw DomainError("kernel radius must be > 0");
}

double exponent(const KernelSpec& k) { return k.params().N() + k.params().sp(); }

// Antiderivatives of r^{-1-a} and r^{-1-a} ln r; both vanish at infinity.
double F_pow(double r, double a) {
  if (std::isinf(r)) return 0.0;
  return -std::pow(r, -a) / a;
}

double F_log(double r, double a) {
  if (std::isinf(r)) return 0.0;
  if (r == 0.0) return -kInf;
  return -std::pow(r, -a) * (std::log(r) / a + 1.0 / (a * a));
}

}  // namespace

const char* to_string(KernelPart part) {
  switch (part) {
    case KernelPart::full: return "full";
    case KernelPart::plus: return "plus";
    case KernelPart::minus: return "minus";
    case KernelPart::frac: return "frac";
  }
  return "?";
}

KernelPart parse_kernel_part(const char* name) {
  if (std::strcmp(name, "full") == 0) return KernelPart::full;
  if (std::strcmp(name, "plus") == 0) return KernelPart::plus;
  if (std::strcmp(name, "minus") == 0) return KernelPart::minus;
  if (std::strcmp(name, "frac") == 0) return KernelPart::frac;
  throw DomainError(std::string("unknown kernel part: ") + name);
}

KernelSpec::KernelSpec(const Params& params)
    : params_(params),
      r_star_(std::exp(params.B() / params.p())),
      e_inv_(std::exp(-1.0 / params.sp())) {}

double kernel_full(const KernelSpec& k, double r) {
  require_positive(r);
  const double num = k.B() - k.params().p() * std::log(r);
  const double e = exponent(k);
  if (r < 1e-3 && num > 0.0)
    return std::exp(std::log(k.C()) + std::log(num) - e * std::log(r));
  return k.C() * num / std::pow(r, e);
}

KernelParts kernel_parts(const KernelSpec& k, double r) {
  require_positive(r);
  const double l = -std::log(r);
  const double e = exponent(k);
  KernelParts out{0.0, 0.0};
  if (l > 0.0) {
    out.plus = std::exp(std::log(k.C()) + std::log(l) - e * std::log(r));
  } else if (l < 0.0) {
    out.minus = k.C() * (-l) / std::pow(r, e);
  }
  return out;
}

double kernel_frac(const KernelSpec& k, double r) {
  require_positive(r);
  return std::exp(-exponent(k) * std::log(r));
}

double kernel_eval(const KernelSpec& k, KernelPart part, double r) {
  switch (part) {
    case KernelPart::full: return kernel_full(k, r);
    case KernelPart::plus: return kernel_parts(k, r).plus;
    case KernelPart::minus: return kernel_parts(k, r).minus;
    case KernelPart::frac: return kernel_frac(k, r);
  }
  return 0.0;
}

double kernel_full_derivative(const KernelSpec& k, double r) {
  require_positive(r);
  const double e = exponent(k);
  return -e * kernel_full(k, r) / r - k.params().p() * k.C() * std::pow(r, -e - 1.0);
}

double sign_change_radius(const KernelSpec& k) { return k.r_star(); }

double commutator_residual(const KernelSpec& k, double r) {
  require_positive(r);
  const double e = exponent(k);
  return r * kernel_full_derivative(k, r) + e * kernel_full(k, r) +
         k.params().p() * k.C() * std::pow(r, -e);
}

double commutator_residual_relative(const KernelSpec& k, double r) {
  const double scale = k.params().p() * k.C() * std::pow(r, -exponent(k));
  return commutator_residual(k, r) / scale;
}

double annulus_integral(const KernelSpec& k, double R1, double R2, RadialMode mode) {
  if (!(R1 >= 0.0) || !(R2 > R1))
    throw DomainError("annulus_integral requires 0 <= R1 < R2");
  if (R1 == 0.0)
    throw DomainError("annulus_integral: r^{-1-sp} is not integrable at 0");
  const double a = k.params().sp();
  const double w = k.params().omega();
  if (mode == RadialMode::pow) return w * (F_pow(R2, a) - F_pow(R1, a));
  return w * (F_log(R2, a) - F_log(R1, a));
}

double radial_part_integral(const KernelSpec& k, KernelPart part, double R1, double R2) {
  if (!(R2 > R1)) return 0.0;
  const double w = k.params().omega();
  const double C = k.C();
  auto pow_i = [&](double a, double b) { return annulus_integral(k, a, b, RadialMode::pow) / w; };
  auto log_i = [&](double a, double b) { return annulus_integral(k, a, b, RadialMode::log) / w; };
  switch (part) {
    case KernelPart::frac:
      return pow_i(R1, R2);
    case KernelPart::plus:
      return R1 < 1.0 ? -C * log_i(R1, std::min(R2, 1.0)) : 0.0;
    case KernelPart::minus:
      return R2 > 1.0 ? C * log_i(std::max(R1, 1.0), R2) : 0.0;
    case KernelPart::full:
      return C * (k.B() * pow_i(R1, R2) - k.params().p() * log_i(R1, R2));
  }
  return 0.0;
}

}  // namespace loglap
