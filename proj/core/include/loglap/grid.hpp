#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "loglap/kernel.hpp"
#include "loglap/operator.hpp"
#include "loglap/specfun.hpp"

namespace loglap {

enum class Shape { interval, box, disc };

const char* to_string(Shape shape);
Shape parse_shape(const std::string& name);

// Uniform Cartesian grid restricted to a domain. For N = 2 the box is
// {xlo, xhi, ylo, yhi}; a disc is inscribed in a square box.
class GridDomain {
 public:
  Shape shape() const { return shape_; }
  int dim() const { return N_; }
  double h() const { return h_; }
  double cell_volume() const { return cell_volume_; }
  const std::vector<double>& box() const { return box_; }
  std::size_t size() const { return centers_.size(); }
  const std::vector<Point>& centers() const { return centers_; }
  const Point& center(std::size_t i) const { return centers_[i]; }
  const std::vector<double>& boundary_distance() const { return dist_; }
  double diam() const { return diam_; }
  double box_diagonal() const;

  // Distance from x to the boundary along the unit direction d.
  double exit_distance(const Point& x, const Point& d) const;
  bool contains(const Point& x) const;
  // Distance from x (inside the shape) to its boundary.
  double distance_to_boundary(const Point& x) const;
  // Exact geometric diameter of the continuous shape.
  double shape_diameter() const;

  bool same_as(const GridDomain& o) const;

  friend std::shared_ptr<const GridDomain> build_grid(Shape, const std::vector<double>&, double);

 private:
  Shape shape_ = Shape::interval;
  int N_ = 1;
  double h_ = 0.0;
  double cell_volume_ = 0.0;
  std::vector<double> box_;
  std::vector<Point> centers_;
  std::vector<double> dist_;
  double diam_ = 0.0;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

DomainPtr build_grid(Shape shape, const std::vector<double>& box, double h);

struct GridFunction {
  DomainPtr domain;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

struct SampleSource {
  enum class Kind { analytic, random, eigen_initial, smooth };
  Kind kind = Kind::random;
  std::function<double(const Point&)> f;
  std::uint64_t seed = 0;
  bool radial = false;

  static SampleSource analytic(std::function<double(const Point&)> f);
  static SampleSource random(std::uint64_t seed);
  static SampleSource eigen_initial(std::uint64_t seed);
  // Seeded low-frequency profile vanishing on the boundary; the same
  // continuous function for every h, so it can be compared across grids.
  static SampleSource smooth(std::uint64_t seed, bool radial = false);
};

// The continuous profile behind SampleSource::smooth.
std::function<double(const Point&)> smooth_profile(const GridDomain& domain, std::uint64_t seed,
                                                   bool radial);

GridFunction sample_function(const DomainPtr& domain, const SampleSource& source);

// (sum |u_i|^q h^N)^{1/q}; q = infinity gives max |u_i|.
double lp_norm(const GridFunction& u, double q);

class WeightTable {
 public:
  WeightTable() = default;
  WeightTable(DomainPtr domain, const Params& params, KernelPart part);

  KernelPart part() const { return part_; }
  const Params& params() const { return *params_; }
  const DomainPtr& domain() const { return domain_; }
  std::size_t size() const { return n_; }

  double W(std::size_t i, std::size_t j) const {
    return i <= j ? packed_[index(i, j)] : packed_[index(j, i)];
  }
  double& W_upper(std::size_t i, std::size_t j) { return packed_[index(i, j)]; }
  double kappa(std::size_t i) const { return kappa_[i]; }
  std::vector<double>& kappa_values() { return kappa_; }
  const std::vector<double>& kappa_values() const { return kappa_; }
  std::vector<double>& packed() { return packed_; }
  const std::vector<double>& packed() const { return packed_; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    return i * n_ - (i * (i + 1)) / 2 + j;
  }

  KernelPart part_ = KernelPart::full;
  std::shared_ptr<const Params> params_;
  DomainPtr domain_;
  std::size_t n_ = 0;
  std::vector<double> packed_;  // upper triangle including diagonal, row-major
  std::vector<double> kappa_;   // killing measure times cell volume
};

struct AssemblyOptions {
  int near_subdivision = 4;      // sub-cells per axis for pairs closer than 3h
  int killing_directions = 720;  // rays for the exterior integral (N = 2)
};

// Pairs with centre distance >= 3h use the midpoint rule. Closer pairs use
// sub-cell midpoints weighted by (|x-y| / |x_i-x_j|)^p, which is exact for
// linear profiles in 1D and keeps the near-field sum convergent for sp >= 1.
// The diagonal weight is zero: it only ever multiplies |u_i - u_i|^p.
WeightTable assemble_weights(const DomainPtr& domain, const Params& params, KernelPart part,
                             const AssemblyOptions& opt = {});

// Per-cell killing measure: h^N * int_{(R^N \ Omega) cap B_rmax(x_i)} kappa(|x_i - y|) dy,
// integrated along rays with the radial part in closed form.
std::vector<double> killing_measure(const GridDomain& domain, const Params& params,
                                    KernelPart part, double rmax = kInf,
                                    int directions = 720);

void write_weight_cache(const std::string& path, const WeightTable& table);
// Throws MismatchError when the sidecar does not describe the requested table.
WeightTable read_weight_cache(const std::string& path, const DomainPtr& domain,
                              const Params& params, KernelPart part);

}  // namespace loglap
