#pragma once

#include <cstdint>
#include <vector>

#include "loglap/forms.hpp"

namespace loglap {

struct EigenConfig {
  double initial_step = 1.0;
  double armijo = 1e-4;
  double shrink = 0.5;
  double tol = 1e-13;  // relative change of lambda
  int max_iter = 50000;
  int restarts = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EigenStep {
  double lambda;
  double step;
};

struct EigenResult {
  double lambda = 0.0;
  GridFunction u;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<EigenStep> history;
  std::vector<double> restart_lambdas;
  std::vector<GridFunction> restart_functions;  // sign-aligned, one per restart
};

double rayleigh(const GridFunction& u, const FormTables& tables);

// sup_i |G_i - lambda p Phi_p(u_i) h^N| / (p h^N)
double weak_residual(const GridFunction& u, double lambda, const FormTables& tables);

// Flips the sign so that sum u_i >= 0.
void align_sign(GridFunction& u);

// One projected-gradient solve from the given start.
EigenResult minimize_from(const GridFunction& start, const FormTables& tables,
                          const EigenConfig& config);
EigenResult minimize_first(const FormTables& tables, const EigenConfig& config = {});

Report verify_eigen_properties(const EigenResult& result, const FormTables& tables,
                               const std::vector<double>& picone_eps = {1e-3},
                               std::size_t picone_pairs = 10000, std::uint64_t seed = 1);

Report log_estimate_check(const EigenResult& result, const FormTables& tables, const Point& x0,
                          double r, double R, double delta);

}  // namespace loglap
