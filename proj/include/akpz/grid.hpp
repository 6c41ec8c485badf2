#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "akpz/common.hpp"

namespace akpz {

/// Uniform rectangular grid geometry; node (i,j) sits at
/// origin + (i*dx1, j*dx2), 0 <= i < n1, 0 <= j < n2.
struct GridGeom {
  int n1 = 0, n2 = 0;
  Vec2 origin;
  Vec2 spacing{1, 1};

  int size() const { return n1 * n2; }
  int idx(int i, int j) const { return j * n1 + i; }
  Vec2 coord(int i, int j) const {
    return {origin.x + i * spacing.x, origin.y + j * spacing.y};
  }
  bool on_ring(int i, int j) const {
    return i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1;
  }
};

enum NodeFlag : std::uint8_t {
  kInterior = 0,
  kBoundary = 1,  // value pinned / one-ring exclusion
  kMasked = 2,    // no valid data at this node
};

template <class T>
struct Field {
  GridGeom geom;
  std::vector<T> values;
  std::vector<std::uint8_t> flags;

  Field() = default;
  explicit Field(const GridGeom& g, T fill = T{})
      : geom(g), values(g.size(), fill), flags(g.size(), kInterior) {
    for (int j = 0; j < g.n2; j++)
      for (int i = 0; i < g.n1; i++)
        if (g.on_ring(i, j)) flags[g.idx(i, j)] = kBoundary;
  }

  T& at(int i, int j) { return values[geom.idx(i, j)]; }
  const T& at(int i, int j) const { return values[geom.idx(i, j)]; }
  std::uint8_t& flag(int i, int j) { return flags[geom.idx(i, j)]; }
  std::uint8_t flag(int i, int j) const { return flags[geom.idx(i, j)]; }

  bool valid(int i, int j) const { return flag(i, j) != kMasked; }

  /// Interior in the stencil sense: the node and its one-ring carry data.
  bool stencil_ok(int i, int j) const {
    if (i < 1 || j < 1 || i > geom.n1 - 2 || j > geom.n2 - 2) return false;
    for (int a = -1; a <= 1; a++)
      for (int b = -1; b <= 1; b++)
        if (!valid(i + a, j + b)) return false;
    return true;
  }
};

/// Scalar height values on a grid.
struct HeightField : Field<double> {
  using Field<double>::Field;

  Vec2 gradient(int i, int j) const {
    return {(at(i + 1, j) - at(i - 1, j)) / (2 * geom.spacing.x),
            (at(i, j + 1) - at(i, j - 1)) / (2 * geom.spacing.y)};
  }

  Mat2 hessian(int i, int j) const {
    double dx = geom.spacing.x, dy = geom.spacing.y;
    double h11 = (at(i + 1, j) - 2 * at(i, j) + at(i - 1, j)) / (dx * dx);
    double h22 = (at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)) / (dy * dy);
    double h12 = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) +
                  at(i - 1, j - 1)) /
                 (4 * dx * dy);
    return {h11, h12, h12, h22};
  }
};

/// Per-node complex z values aligned with a height grid.
struct ComplexField : Field<cplx> {
  using Field<cplx>::Field;
  bool branch_consistent = false;

  cplx dx1(int i, int j) const {
    return (at(i + 1, j) - at(i - 1, j)) / (2 * geom.spacing.x);
  }
  cplx dx2(int i, int j) const {
    return (at(i, j + 1) - at(i, j - 1)) / (2 * geom.spacing.y);
  }
};

/// Residual grids sharing the parent height-field geometry.
struct ResidualField {
  GridGeom geom;
  Field<double> el;            // L[h]
  Field<cplx> burgers;         // Delta
  Field<double> hessian_norm;  // |D^2 h|_F
};

// ---------------------------------------------------------------------------
// Bicubic (Catmull-Rom) interpolation on a uniform grid. C^1 in the sample
// point, fourth-order accurate for smooth data; needed wherever fields are
// resampled and later differentiated twice.

namespace detail {

template <class T>
T cubic_kernel(double t, T fm1, T f0, T f1, T f2) {
  T a = -0.5 * fm1 + 1.5 * f0 - 1.5 * f1 + 0.5 * f2;
  T b = fm1 - 2.5 * f0 + 2.0 * f1 - 0.5 * f2;
  T c = 0.5 * (f1 - fm1);
  return ((a * t + b) * t + c) * t + f0;
}

}  // namespace detail

/// Bicubic sample of a field at physical coordinate x. Returns nullopt when
/// the 4x4 stencil leaves the grid or touches masked nodes.
template <class T>
std::optional<T> bicubic(const Field<T>& f, Vec2 x) {
  const GridGeom& g = f.geom;
  double u = (x.x - g.origin.x) / g.spacing.x;
  double v = (x.y - g.origin.y) / g.spacing.y;
  int i0 = int(std::floor(u)), j0 = int(std::floor(v));
  if (i0 < 1 || j0 < 1 || i0 > g.n1 - 3 || j0 > g.n2 - 3) return std::nullopt;
  double tu = u - i0, tv = v - j0;
  T col[4];
  for (int b = -1; b <= 2; b++) {
    for (int a = -1; a <= 2; a++)
      if (!f.valid(i0 + a, j0 + b)) return std::nullopt;
    col[b + 1] = detail::cubic_kernel(tu, f.at(i0 - 1, j0 + b),
                                      f.at(i0, j0 + b), f.at(i0 + 1, j0 + b),
                                      f.at(i0 + 2, j0 + b));
  }
  return detail::cubic_kernel(tv, col[0], col[1], col[2], col[3]);
}

}  // namespace akpz
