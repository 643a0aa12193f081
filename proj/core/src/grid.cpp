#include "loglap/grid.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "loglap/error.hpp"
#include "loglap/parallel.hpp"

namespace loglap {

namespace {

constexpr int kCacheFormatVersion = 1;

int cells_along(double lo, double hi, double h) {
  const double n = (hi - lo) / h;
  const long k = std::lround(n);
  if (k < 1 || std::fabs(n - static_cast<double>(k)) > 1e-6 * std::max(1.0, n))
    throw DomainError("cell size must divide the box side length");
  return static_cast<int>(k);
}

double dist(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

const char* to_string(Shape shape) {
  switch (shape) {
    case Shape::interval: return "interval";
    case Shape::box: return "box";
    case Shape::disc: return "disc";
  }
  return "?";
}

Shape parse_shape(const std::string& name) {
  if (name == "interval") return Shape::interval;
  if (name == "box") return Shape::box;
  if (name == "disc") return Shape::disc;
  throw DomainError("unknown shape: " + name);
}

double GridDomain::box_diagonal() const {
  if (N_ == 1) return box_[1] - box_[0];
  return std::hypot(box_[1] - box_[0], box_[3] - box_[2]);
}

double GridDomain::shape_diameter() const {
  if (shape_ == Shape::disc) return box_[1] - box_[0];
  return box_diagonal();
}

bool GridDomain::contains(const Point& x) const {
  switch (shape_) {
    case Shape::interval: return x[0] > box_[0] && x[0] < box_[1];
    case Shape::box:
      return x[0] > box_[0] && x[0] < box_[1] && x[1] > box_[2] && x[1] < box_[3];
    case Shape::disc: {
      const double R = 0.5 * (box_[1] - box_[0]);
      return std::hypot(x[0] - 0.5 * (box_[0] + box_[1]), x[1] - 0.5 * (box_[2] + box_[3])) < R;
    }
  }
  return false;
}

double GridDomain::distance_to_boundary(const Point& x) const {
  switch (shape_) {
    case Shape::interval: return std::min(x[0] - box_[0], box_[1] - x[0]);
    case Shape::box:
      return std::min({x[0] - box_[0], box_[1] - x[0], x[1] - box_[2], box_[3] - x[1]});
    case Shape::disc: {
      const double R = 0.5 * (box_[1] - box_[0]);
      return R - std::hypot(x[0] - 0.5 * (box_[0] + box_[1]), x[1] - 0.5 * (box_[2] + box_[3]));
    }
  }
  return 0.0;
}

double GridDomain::exit_distance(const Point& x, const Point& d) const {
  if (shape_ == Shape::disc) {
    const double R = 0.5 * (box_[1] - box_[0]);
    const double cx = x[0] - 0.5 * (box_[0] + box_[1]);
    const double cy = x[1] - 0.5 * (box_[2] + box_[3]);
    const double b = cx * d[0] + cy * d[1];
    const double c = cx * cx + cy * cy - R * R;
    return -b + std::sqrt(std::max(0.0, b * b - c));
  }
  double t = kInf;
  for (int k = 0; k < N_; ++k) {
    const double lo = box_[2 * k], hi = box_[2 * k + 1];
    if (d[k] > 0.0) t = std::min(t, (hi - x[k]) / d[k]);
    else if (d[k] < 0.0) t = std::min(t, (lo - x[k]) / d[k]);
  }
  return t;
}

bool GridDomain::same_as(const GridDomain& o) const {
  return shape_ == o.shape_ && N_ == o.N_ && h_ == o.h_ && box_ == o.box_ &&
         centers_.size() == o.centers_.size();
}

DomainPtr build_grid(Shape shape, const std::vector<double>& box, double h) {
  if (!(h > 0.0)) throw DomainError("cell size h must be > 0");
  auto g = std::make_shared<GridDomain>();
  g->shape_ = shape;
  g->N_ = shape == Shape::interval ? 1 : 2;
  if (box.size() != static_cast<std::size_t>(2 * g->N_))
    throw DomainError(std::string("shape ") + to_string(shape) + " expects " +
                      std::to_string(2 * g->N_) + " box values");
  for (int k = 0; k < g->N_; ++k)
    if (!(box[2 * k + 1] > box[2 * k])) throw DomainError("degenerate box");
  if (shape == Shape::disc &&
      std::fabs((box[1] - box[0]) - (box[3] - box[2])) > 1e-12 * (box[1] - box[0]))
    throw DomainError("disc requires a square bounding box");
  g->box_ = box;
  g->h_ = h;
  g->cell_volume_ = std::pow(h, g->N_);

  const int nx = cells_along(box[0], box[1], h);
  const int ny = g->N_ == 2 ? cells_along(box[2], box[3], h) : 1;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      Point c{box[0] + (i + 0.5) * h, g->N_ == 2 ? box[2] + (j + 0.5) * h : 0.0, 0.0};
      if (!g->contains(c)) continue;
      g->centers_.push_back(c);
    }
  }
  if (g->centers_.size() < 2) throw DomainError("domain has fewer than 2 inside cells");

  for (const Point& c : g->centers_) g->dist_.push_back(g->distance_to_boundary(c));

  double dmax = 0.0;
  const auto& cs = g->centers_;
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (std::size_t j = i + 1; j < cs.size(); ++j) dmax = std::max(dmax, dist(cs[i], cs[j]));
  const double from_cells = std::min(dmax + h * std::sqrt(static_cast<double>(g->N_)),
                                     g->box_diagonal());
  g->diam_ = std::max(from_cells, g->shape_diameter());
  return g;
}

SampleSource SampleSource::analytic(std::function<double(const Point&)> f) {
  SampleSource s;
  s.kind = Kind::analytic;
  s.f = std::move(f);
  return s;
}

SampleSource SampleSource::random(std::uint64_t seed) {
  SampleSource s;
  s.kind = Kind::random;
  s.seed = seed;
  return s;
}

SampleSource SampleSource::eigen_initial(std::uint64_t seed) {
  SampleSource s;
  s.kind = Kind::eigen_initial;
  s.seed = seed;
  return s;
}

SampleSource SampleSource::smooth(std::uint64_t seed, bool radial) {
  SampleSource s;
  s.kind = Kind::smooth;
  s.seed = seed;
  s.radial = radial;
  return s;
}

std::function<double(const Point&)> smooth_profile(const GridDomain& domain, std::uint64_t seed,
                                                   bool radial) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::array<double, 4> a{}, b{};
  for (double& v : a) v = unif(rng);
  for (double& v : b) v = unif(rng);
  a[0] = 1.5 + 0.5 * a[0];
  const std::vector<double> box = domain.box();
  const Shape shape = domain.shape();
  const int N = domain.dim();
  return [=](const Point& x) {
    const double cx = 0.5 * (box[0] + box[1]);
    const double Lx = box[1] - box[0];
    if (radial || shape == Shape::disc) {
      const double cy = N == 2 ? 0.5 * (box[2] + box[3]) : 0.0;
      const double R = 0.5 * Lx;
      const double r = std::hypot(x[0] - cx, N == 2 ? x[1] - cy : 0.0) / R;
      if (r >= 1.0) return 0.0;
      double m = 0.0;
      for (int k = 0; k < 4; ++k) m += a[k] * std::cos(k * kPi * r);
      if (radial) return (1.0 - r * r) * m;
      const double th = std::atan2(x[1] - cy, x[0] - cx);
      for (int k = 1; k < 4; ++k) m += 0.5 * b[k] * std::cos(k * th);
      return (1.0 - r * r) * m;
    }
    const double tx = (x[0] - box[0]) / Lx;
    double env = std::sin(kPi * tx);
    double m = 0.0;
    for (int k = 0; k < 4; ++k) m += a[k] * std::cos(k * kPi * tx);
    if (N == 2) {
      const double ty = (x[1] - box[2]) / (box[3] - box[2]);
      env *= std::sin(kPi * ty);
      for (int k = 1; k < 4; ++k) m += b[k] * std::cos(k * kPi * ty);
    }
    return env * m;
  };
}

GridFunction sample_function(const DomainPtr& domain, const SampleSource& source) {
  GridFunction u{domain, std::vector<double>(domain->size(), 0.0)};
  std::mt19937_64 rng(source.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  switch (source.kind) {
    case SampleSource::Kind::analytic:
      for (std::size_t i = 0; i < u.size(); ++i) u.values[i] = source.f(domain->center(i));
      break;
    case SampleSource::Kind::random:
      for (double& v : u.values) v = unif(rng);
      break;
    case SampleSource::Kind::smooth: {
      const auto f = smooth_profile(*domain, source.seed, source.radial);
      for (std::size_t i = 0; i < u.size(); ++i) u.values[i] = f(domain->center(i));
      break;
    }
    case SampleSource::Kind::eigen_initial: {
      const auto& d = domain->boundary_distance();
      const double dmax = *std::max_element(d.begin(), d.end());
      for (std::size_t i = 0; i < u.size(); ++i)
        u.values[i] = d[i] / dmax * (1.0 + 0.25 * unif(rng));
      break;
    }
  }
  return u;
}

double lp_norm(const GridFunction& u, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::fabs(v));
    return m;
  }
  if (!(q >= 1.0)) throw DomainError("lp_norm requires q >= 1");
  double s = 0.0;
  for (double v : u.values) s += std::pow(std::fabs(v), q);
  return std::pow(s * u.domain->cell_volume(), 1.0 / q);
}

WeightTable::WeightTable(DomainPtr domain, const Params& params, KernelPart part)
    : part_(part),
      params_(std::make_shared<const Params>(params)),
      domain_(std::move(domain)),
      n_(domain_->size()),
      packed_(n_ * (n_ + 1) / 2, 0.0),
      kappa_(n_, 0.0) {}

std::vector<double> killing_measure(const GridDomain& domain, const Params& params,
                                    KernelPart part, double rmax, int directions) {
  const KernelSpec k(params);
  std::vector<Point> dirs;
  double w;
  if (domain.dim() == 1) {
    dirs = {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
    w = 1.0;
  } else {
    for (int m = 0; m < directions; ++m) {
      const double th = 2.0 * kPi * (m + 0.5) / directions;
      dirs.push_back({std::cos(th), std::sin(th), 0.0});
    }
    w = 2.0 * kPi / directions;
  }
  std::vector<double> out(domain.size(), 0.0);
  parallel_for(domain.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (const Point& d : dirs) {
      const double rho = domain.exit_distance(domain.center(i), d);
      if (rho < rmax) acc += radial_part_integral(k, part, rho, rmax);
    }
    out[i] = w * acc * domain.cell_volume();
  });
  return out;
}

WeightTable assemble_weights(const DomainPtr& domain, const Params& params, KernelPart part,
                             const AssemblyOptions& opt) {
  WeightTable t(domain, params, part);
  const KernelSpec k(params);
  const int N = domain->dim();
  const double h = domain->h();
  const double hN = domain->cell_volume();
  const double p = params.p();
  const int m = std::max(1, opt.near_subdivision);

  std::vector<Point> sub;
  for (int a = 0; a < m; ++a) {
    const double oa = ((a + 0.5) / m - 0.5) * h;
    if (N == 1) {
      sub.push_back({oa, 0.0, 0.0});
    } else {
      for (int b = 0; b < m; ++b) sub.push_back({oa, ((b + 0.5) / m - 0.5) * h, 0.0});
    }
  }
  const double sub_w = std::pow(hN / static_cast<double>(sub.size()), 2.0);

  const std::size_t n = domain->size();
  parallel_for(n, [&](std::size_t i) {
    const Point& xi = domain->center(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point& xj = domain->center(j);
      const double r = dist(xi, xj);
      double w;
      if (r >= 3.0 * h * (1.0 - 1e-12)) {
        w = kernel_eval(k, part, r) * hN * hN;
      } else {
        w = 0.0;
        for (const Point& a : sub) {
          for (const Point& b : sub) {
            const Point x{xi[0] + a[0], xi[1] + a[1], 0.0};
            const Point y{xj[0] + b[0], xj[1] + b[1], 0.0};
            const double rr = dist(x, y);
            w += kernel_eval(k, part, rr) * std::pow(rr / r, p);
          }
        }
        w *= sub_w;
      }
      t.W_upper(i, j) = w;
    }
  });
  t.kappa_values() = killing_measure(*domain, params, part, kInf, opt.killing_directions);
  return t;
}

void write_weight_cache(const std::string& path, const WeightTable& table) {
  static_assert(std::endian::native == std::endian::little,
                "cache format is little-endian; add byte swapping for this host");
  const GridDomain& d = *table.domain();
  nlohmann::json side = {
      {"format_version", kCacheFormatVersion},
      {"N", table.params().N()},
      {"s", table.params().s()},
      {"p", table.params().p()},
      {"shape", to_string(d.shape())},
      {"box", d.box()},
      {"h", d.h()},
      {"part", to_string(table.part())},
      {"cells", d.size()},
      {"layout", "packed upper triangle row-major, then killing measure"}};
  std::ofstream js(path + ".json");
  if (!js) throw std::runtime_error("cannot write " + path + ".json");
  js << side.dump(2) << "\n";
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path);
  bin.write(reinterpret_cast<const char*>(table.packed().data()),
            static_cast<std::streamsize>(table.packed().size() * sizeof(double)));
  bin.write(reinterpret_cast<const char*>(table.kappa_values().data()),
            static_cast<std::streamsize>(table.kappa_values().size() * sizeof(double)));
  if (!bin) throw std::runtime_error("short write to " + path);
}

WeightTable read_weight_cache(const std::string& path, const DomainPtr& domain,
                              const Params& params, KernelPart part) {
  std::ifstream js(path + ".json");
  if (!js) throw MismatchError("missing cache sidecar " + path + ".json");
  nlohmann::json side;
  try {
    js >> side;
  } catch (const nlohmann::json::exception& e) {
    throw MismatchError(std::string("unreadable cache sidecar: ") + e.what());
  }
  auto expect = [&](const char* key, const nlohmann::json& want) {
    if (!side.contains(key) || side[key] != want)
      throw MismatchError(std::string("cache sidecar mismatch in field ") + key);
  };
  expect("format_version", kCacheFormatVersion);
  expect("N", params.N());
  expect("s", params.s());
  expect("p", params.p());
  expect("shape", to_string(domain->shape()));
  expect("box", domain->box());
  expect("h", domain->h());
  expect("part", to_string(part));
  expect("cells", domain->size());

  WeightTable t(domain, params, part);
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw MismatchError("missing cache file " + path);
  bin.read(reinterpret_cast<char*>(t.packed().data()),
           static_cast<std::streamsize>(t.packed().size() * sizeof(double)));
  bin.read(reinterpret_cast<char*>(t.kappa_values().data()),
           static_cast<std::streamsize>(t.kappa_values().size() * sizeof(double)));
  if (!bin) throw MismatchError("cache file " + path + " is truncated");
  if (bin.peek() != std::char_traits<char>::eof())
    throw MismatchError("cache file " + path + " has trailing data");
  return t;
}

}  // namespace loglap
