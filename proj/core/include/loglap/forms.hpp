#pragma once

#include <string>
#include <vector>

#include "loglap/grid.hpp"

namespace loglap {

// Weight tables for all kernel parts on one domain and parameter set.
struct FormTables {
  DomainPtr domain;
  Params params;
  WeightTable plus;
  WeightTable minus;
  WeightTable frac;
  WeightTable full;

  const WeightTable& get(KernelPart part) const;
};

FormTables build_form_tables(const DomainPtr& domain, const Params& params,
                             const AssemblyOptions& opt = {});
// Loads parts from "<prefix>.<part>" when present and matching, otherwise
// assembles them and writes the cache.
FormTables build_form_tables_cached(const DomainPtr& domain, const Params& params,
                                    const std::string& prefix,
                                    const AssemblyOptions& opt = {});

struct EnergyBreakdown {
  double Jplus = 0.0;
  double Jminus = 0.0;
  double Js = 0.0;
  double total = 0.0;
  double slog_seminorm_p = 0.0;
  double frac_seminorm_p = 0.0;
};

// sum_{i,j} |u_i - u_j|^p W_ij + 2 sum_i |u_i|^p kappa_i for one table.
double table_energy(const GridFunction& u, const WeightTable& t);
// Same sum restricted to pairs at centre distance < cutoff, with the given
// killing measure replacing the table's.
double table_energy_restricted(const GridFunction& u, const WeightTable& t, double cutoff,
                               const std::vector<double>& kappa);

EnergyBreakdown energy(const GridFunction& u, const FormTables& tables);
// (1/2) of the full-kernel sum; equals energy(u).total up to rounding.
double energy_total_full(const GridFunction& u, const FormTables& tables);
double energy_pairing(const GridFunction& u, const GridFunction& v, const FormTables& tables);
GridFunction energy_gradient(const GridFunction& u, const FormTables& tables);

struct CheckEntry {
  std::string name;
  bool pass = true;
  bool asserted = true;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // (rhs - lhs) / scale for "lhs <= rhs" checks
};

struct Report {
  std::string check;
  int N = 0;
  double s = 0.0;
  double p = 0.0;
  std::string domain;
  int n_samples = 0;
  bool pass = true;
  double worst_margin = kInf;
  std::vector<double> ratios;
  std::vector<CheckEntry> entries;
  std::vector<std::pair<std::string, double>> values;

  void add(const CheckEntry& e);
  void merge(const Report& other);
};

Report make_report(const std::string& check, const FormTables& tables);

// Numerical slack for sign assertions, relative to the larger side.
inline constexpr double kSignSlack = 1e-10;

Report check_form_bounds(const GridFunction& u, const FormTables& tables);
double poincare_constant(const FormTables& tables);
Report check_poincare(const GridFunction& u, const FormTables& tables);
double hardy_functional(const GridFunction& u, const FormTables& tables);
Report check_hardy(const GridFunction& u, const FormTables& tables);

enum class EmbeddingMode { sobolev, gn, holder, strauss };
EmbeddingMode parse_embedding_mode(const std::string& name);
const char* to_string(EmbeddingMode mode);
Report check_sobolev_gn(const GridFunction& u, const FormTables& tables, EmbeddingMode mode,
                        double q = 0.0);

// Max of the coarse-grid ratios against the fine-grid ratios; passes when the
// fine maximum is at most growth times the coarse maximum.
Report bounded_ratio_refinement(const std::string& check, const Report& coarse,
                                const Report& fine, double growth = 2.0);

// Pointwise expression for a pair of cells; j may be -1 for an exterior point.
double diaz_saa_pointwise(const GridFunction& u, const GridFunction& v, double r, double p,
                          std::size_t i, std::size_t j);
Report check_diaz_saa(const GridFunction& u, const GridFunction& v, const FormTables& tables,
                      double r, std::size_t n_pairs = 10000, std::uint64_t seed = 1);

double pohozaev_defect(const GridFunction& u, const FormTables& tables);

// [u]^p_{s+log,p} against the pure (s+eps)-fractional seminorm on the same grid.
double sandwich_ratio(const GridFunction& u, const FormTables& tables,
                      const WeightTable& frac_s_plus_eps);

}  // namespace loglap
