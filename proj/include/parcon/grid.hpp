#pragma once

#include <array>
#include <span>
#include <vector>

#include "parcon/errors.hpp"

namespace parcon {

/// Spatial coordinates of a node. `y` is unused in one dimension.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform tensor grid on an interval (dim 1) or an axis-aligned rectangle
/// (dim 2). Nodes include the boundary; unknowns live on interior nodes only,
/// and homogeneous Dirichlet values are implicit zeros. Interior nodes are
/// indexed row-major (x fastest).
struct SpatialGrid {
  int dim = 1;
  std::array<int, 2> nodes{3, 1};      // total nodes per axis, boundary included
  std::array<double, 2> extent{1.0, 0.0};

  static SpatialGrid interval(int nodes, double length = 1.0);
  static SpatialGrid rectangle(int nodes_x, int nodes_y,
                               double length_x = 1.0, double length_y = 1.0);

  double spacing(int axis) const { return extent[axis] / (nodes[axis] - 1); }
  int interior(int axis) const { return nodes[axis] - 2; }
  int interior_count() const {
    return dim == 1 ? interior(0) : interior(0) * interior(1);
  }

  /// Quadrature weight each interior node carries: the product of spacings.
  double cell_volume() const {
    return dim == 1 ? spacing(0) : spacing(0) * spacing(1);
  }

  int index(int ix, int iy = 0) const { return iy * interior(0) + ix; }
  Point point(int interior_index) const;
};

/// Uniform partition of [0, horizon] into `steps` implicit-Euler steps.
/// Level k sits at time k*dt; level 0 is the initial condition.
struct TimeGrid {
  double horizon = 1.0;
  int steps = 1;

  double dt() const { return horizon / steps; }
  double time(int k) const { return horizon * k / steps; }
};

struct Grids {
  SpatialGrid space;
  TimeGrid time;
};

/// Scalar field on the space-time cylinder: one value per (interior node,
/// time level), levels 0..steps. Time level 0 carries no quadrature weight;
/// integrals over the cylinder sum levels 1..steps with weight dt each and
/// cell_volume per node, matching the pairing the adjoint transposes.
class GridFunction {
public:
  GridFunction() = default;
  GridFunction(const Grids& grids, double value = 0.0);
  GridFunction(int interior_count, int steps, double value = 0.0);

  double& operator()(int i, int k) { return v_[static_cast<std::size_t>(k) * ni_ + i]; }
  double operator()(int i, int k) const { return v_[static_cast<std::size_t>(k) * ni_ + i]; }

  std::span<double> level(int k) { return {v_.data() + static_cast<std::size_t>(k) * ni_, static_cast<std::size_t>(ni_)}; }
  std::span<const double> level(int k) const { return {v_.data() + static_cast<std::size_t>(k) * ni_, static_cast<std::size_t>(ni_)}; }

  int interior_count() const { return ni_; }
  int steps() const { return nt_; }
  int levels() const { return nt_ + 1; }

  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  bool matches(const Grids& grids) const;
  void fill(double value);

private:
  int ni_ = 0;
  int nt_ = 0;
  std::vector<double> v_;
};

/// Scalar field on the spatial grid alone (interior nodes).
struct SpatialField {
  std::vector<double> v;

  int size() const { return static_cast<int>(v.size()); }
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
};

/// L^p norm over the cylinder, p in [1, inf]. The sup norm scans every level
/// including 0; finite p uses the quadrature described on GridFunction.
double lp_norm(const Grids& grids, const GridFunction& f, double p);

/// Quadrature pairing over the cylinder (levels 1..steps).
double inner_product_q(const Grids& grids, const GridFunction& f, const GridFunction& g);

/// Spatial L^p norm of one level or a terminal slice, p in [1, inf].
double lp_norm_spatial(const SpatialGrid& grid, std::span<const double> f, double p);

/// Spatial quadrature pairing.
double inner_product_spatial(const SpatialGrid& grid, std::span<const double> f,
                             std::span<const double> g);

/// Max of |f| over every node and level.
double max_abs(const GridFunction& f);

/// out = a*f + b*g, shapes must agree.
void lin_comb(double a, const GridFunction& f, double b, const GridFunction& g,
              GridFunction& out);

}  // namespace parcon
