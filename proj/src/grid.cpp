#include "parcon/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace parcon {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}

}  // namespace

SpatialGrid SpatialGrid::interval(int nodes, double length) {
  require(nodes >= 3, "interval grid needs at least 3 nodes per axis");
  require(length > 0.0, "interval grid needs positive length");
  SpatialGrid g;
  g.dim = 1;
  g.nodes = {nodes, 1};
  g.extent = {length, 0.0};
  return g;
}

SpatialGrid SpatialGrid::rectangle(int nodes_x, int nodes_y, double length_x, double length_y) {
  require(nodes_x >= 3 && nodes_y >= 3, "rectangle grid needs at least 3 nodes per axis");
  require(length_x > 0.0 && length_y > 0.0, "rectangle grid needs positive extents");
  SpatialGrid g;
  g.dim = 2;
  g.nodes = {nodes_x, nodes_y};
  g.extent = {length_x, length_y};
  return g;
}

Point SpatialGrid::point(int interior_index) const {
  Point p;
  if (dim == 1) {
    p.x = (interior_index + 1) * spacing(0);
  } else {
    const int nx = interior(0);
    const int ix = interior_index % nx;
    const int iy = interior_index / nx;
    p.x = (ix + 1) * spacing(0);
    p.y = (iy + 1) * spacing(1);
  }
  return p;
}

GridFunction::GridFunction(const Grids& grids, double value)
    : GridFunction(grids.space.interior_count(), grids.time.steps, value) {}

GridFunction::GridFunction(int interior_count, int steps, double value)
    : ni_(interior_count), nt_(steps) {
  require(interior_count > 0 && steps >= 1, "grid function needs positive shape");
  v_.assign(static_cast<std::size_t>(ni_) * (nt_ + 1), value);
}

bool GridFunction::matches(const Grids& grids) const {
  return ni_ == grids.space.interior_count() && nt_ == grids.time.steps;
}

void GridFunction::fill(double value) { std::fill(v_.begin(), v_.end(), value); }

namespace {

void check_match(const Grids& grids, const GridFunction& f, const char* op) {
  if (!f.matches(grids))
    throw DimensionMismatch(std::string(op) + ": field shape does not match grids");
}

}  // namespace

double lp_norm(const Grids& grids, const GridFunction& f, double p) {
  check_match(grids, f, "lp_norm");
  if (std::isinf(p)) return max_abs(f);
  if (!(p >= 1.0)) throw DimensionMismatch("lp_norm: exponent must be >= 1 or inf");
  const double w = grids.space.cell_volume() * grids.time.dt();
  double acc = 0.0;
  const int ni = f.interior_count();
  for (int k = 1; k <= f.steps(); ++k) {
    auto lv = f.level(k);
    if (p == 2.0) {
      for (int i = 0; i < ni; ++i) acc += lv[i] * lv[i];
    } else if (p == 1.0) {
      for (int i = 0; i < ni; ++i) acc += std::abs(lv[i]);
    } else {
      for (int i = 0; i < ni; ++i) acc += std::pow(std::abs(lv[i]), p);
    }
  }
  return std::pow(acc * w, 1.0 / p);
}

double inner_product_q(const Grids& grids, const GridFunction& f, const GridFunction& g) {
  check_match(grids, f, "inner_product_q");
  check_match(grids, g, "inner_product_q");
  const double w = grids.space.cell_volume() * grids.time.dt();
  double acc = 0.0;
  const int ni = f.interior_count();
  for (int k = 1; k <= f.steps(); ++k) {
    auto a = f.level(k);
    auto b = g.level(k);
    for (int i = 0; i < ni; ++i) acc += a[i] * b[i];
  }
  return acc * w;
}

double lp_norm_spatial(const SpatialGrid& grid, std::span<const double> f, double p) {
  if (static_cast<int>(f.size()) != grid.interior_count())
    throw DimensionMismatch("lp_norm_spatial: field shape does not match grid");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(p >= 1.0)) throw DimensionMismatch("lp_norm_spatial: exponent must be >= 1 or inf");
  double acc = 0.0;
  for (double v : f) acc += (p == 2.0) ? v * v : std::pow(std::abs(v), p);
  return std::pow(acc * grid.cell_volume(), 1.0 / p);
}

double inner_product_spatial(const SpatialGrid& grid, std::span<const double> f,
                             std::span<const double> g) {
  if (static_cast<int>(f.size()) != grid.interior_count() || f.size() != g.size())
    throw DimensionMismatch("inner_product_spatial: field shape does not match grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * g[i];
  return acc * grid.cell_volume();
}

double max_abs(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

void lin_comb(double a, const GridFunction& f, double b, const GridFunction& g,
              GridFunction& out) {
  if (f.interior_count() != g.interior_count() || f.steps() != g.steps())
    throw DimensionMismatch("lin_comb: operand shapes differ");
  if (out.interior_count() != f.interior_count() || out.steps() != f.steps())
    out = GridFunction(f.interior_count(), f.steps());
  const auto& fv = f.data();
  const auto& gv = g.data();
  auto& ov = out.data();
  for (std::size_t i = 0; i < fv.size(); ++i) ov[i] = a * fv[i] + b * gv[i];
}

}  // namespace parcon
