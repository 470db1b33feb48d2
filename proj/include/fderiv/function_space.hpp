#pragma once

// Discretized L2[0,1]: curves sampled on a shared grid, trapezoid quadrature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fderiv/error.hpp"

namespace fderiv {

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Ordered abscissae in [0,1] with composite-trapezoid weights.
class Grid {
 public:
  static GridPtr make(std::vector<double> points) {
    const std::size_t m = points.size();
    require(m >= 2, ErrorKind::InvalidGrid, "grid needs at least 2 points");
    for (double p : points)
      require(std::isfinite(p), ErrorKind::InvalidGrid, "grid point is not finite");
    require(points.front() >= 0.0 && points.back() <= 1.0, ErrorKind::InvalidGrid,
            "grid must lie in [0,1]");
    for (std::size_t k = 1; k < m; ++k)
      require(points[k] > points[k - 1], ErrorKind::InvalidGrid,
              "grid points must be strictly increasing");

    std::vector<double> weights(m);
    weights[0] = 0.5 * (points[1] - points[0]);
    weights[m - 1] = 0.5 * (points[m - 1] - points[m - 2]);
    for (std::size_t k = 1; k + 1 < m; ++k) weights[k] = 0.5 * (points[k + 1] - points[k - 1]);
    return GridPtr(new Grid(std::move(points), std::move(weights)));
  }

  static GridPtr uniform(std::size_t m, double first = 0.0, double last = 1.0) {
    require(m >= 2, ErrorKind::InvalidGrid, "grid needs at least 2 points");
    std::vector<double> points(m);
    const double step = (last - first) / static_cast<double>(m - 1);
    for (std::size_t k = 0; k < m; ++k) points[k] = first + step * static_cast<double>(k);
    points.back() = last;
    return make(std::move(points));
  }

  std::size_t size() const noexcept { return points_.size(); }
  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double point(std::size_t k) const { return points_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }

  friend bool operator==(const Grid& a, const Grid& b) { return a.points_ == b.points_; }

 private:
  Grid(std::vector<double> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {}

  std::vector<double> points_;
  std::vector<double> weights_;
};

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  return a == b || (a && b && *a == *b);
}

/// Function values on a grid. Immutable grid, mutable values.
class Curve {
 public:
  Curve(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, ErrorKind::InvalidCurve, "curve has no grid");
    require(values_.size() == grid_->size(), ErrorKind::InvalidCurve,
            "curve length " + std::to_string(values_.size()) + " does not match grid length " +
                std::to_string(grid_->size()));
    for (double v : values_) require(std::isfinite(v), ErrorKind::InvalidCurve, "curve value is not finite");
  }

  static Curve constant(GridPtr grid, double c) {
    const std::size_t m = grid->size();
    return Curve(std::move(grid), std::vector<double>(m, c));
  }

  static Curve zero(GridPtr grid) { return constant(std::move(grid), 0.0); }

  template <typename F>
  static Curve from_function(GridPtr grid, F&& f) {
    std::vector<double> v(grid->size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid->point(k));
    return Curve(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  Curve& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }

  Curve& operator+=(const Curve& other) {
    check_same(other);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
  }

  Curve& operator-=(const Curve& other) {
    check_same(other);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
  }

  friend Curve operator+(Curve a, const Curve& b) { return a += b; }
  friend Curve operator-(Curve a, const Curve& b) { return a -= b; }
  friend Curve operator*(double s, Curve a) { return a *= s; }
  friend Curve operator*(Curve a, double s) { return a *= s; }

 private:
  void check_same(const Curve& other) const {
    require(same_grid(grid_, other.grid_), ErrorKind::GridMismatch, "curves live on different grids");
  }

  GridPtr grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const Curve& f, const Curve& g) {
  require(same_grid(f.grid(), g.grid()), ErrorKind::GridMismatch, "curves live on different grids");
}

/// Trapezoid approximation of the integral of f*g over the grid span.
inline double inner_product(const Curve& f, const Curve& g) {
  require_same_grid(f, g);
  const auto w = f.grid()->weights();
  const auto a = f.values();
  const auto b = g.values();
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += a[k] * b[k] * w[k];
  return s;
}

inline double l2_norm(const Curve& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

/// Squared L2 distance without materializing the difference curve.
inline double squared_distance(const Curve& f, const Curve& g) {
  require_same_grid(f, g);
  const auto w = f.grid()->weights();
  const auto a = f.values();
  const auto b = g.values();
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = a[k] - b[k];
    s += w[k] * d * d;
  }
  return s;
}

inline double distance(const Curve& f, const Curve& g) { return std::sqrt(squared_distance(f, g)); }

/// a*x + y, pointwise.
inline Curve axpy(double a, const Curve& x, const Curve& y) {
  require_same_grid(x, y);
  std::vector<double> out(y.values().begin(), y.values().end());
  const auto xv = x.values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * xv[k];
  return Curve(y.grid(), std::move(out));
}

}  // namespace fderiv
