#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "akpz/common.hpp"
#include "akpz/laurent.hpp"

namespace akpz {

/// Height gradient rho = (rho1, rho2), dimensionless.
struct Slope {
  double r1 = 0, r2 = 0;

  Slope() = default;
  Slope(double a, double b) : r1(a), r2(b) {}

  Vec2 vec() const { return {r1, r2}; }
};

/// Convex polygon of allowed slopes, integer vertices, counterclockwise.
class NewtonPolygon {
 public:
  NewtonPolygon() = default;
  explicit NewtonPolygon(std::vector<std::array<int, 2>> vertices)
      : verts_(std::move(vertices)) {}

  const std::vector<std::array<int, 2>>& vertices() const { return verts_; }

  /// Signed distance to the boundary, positive inside.
  double boundary_distance(const Slope& rho) const {
    double d = std::numeric_limits<double>::infinity();
    size_t n = verts_.size();
    for (size_t i = 0; i < n; i++) {
      const auto& a = verts_[i];
      const auto& b = verts_[(i + 1) % n];
      double ex = b[0] - a[0], ey = b[1] - a[1];
      double len = std::hypot(ex, ey);
      // inward normal for ccw ordering is (-ey, ex)/len
      double s = (-ey * (rho.r1 - a[0]) + ex * (rho.r2 - a[1])) / len;
      d = std::min(d, s);
    }
    return d;
  }

  bool contains(const Slope& rho, double margin) const {
    return boundary_distance(rho) >= margin;
  }

 private:
  std::vector<std::array<int, 2>> verts_;
};

/// A dimer lattice model: characteristic polynomial, slope polygon,
/// and the genus-zero bijection data between the upper half plane and
/// the interior of the polygon.
struct DimerModel {
  std::string name;
  NewtonPolygon polygon;
  LaurentPoly P;

  /// P times a monomial, gauged so its exponent hull equals the slope
  /// polygon; this is the polynomial the Ronkin / Legendre machinery runs on.
  /// (Curve-local quantities are gauge invariant and keep using P.)
  LaurentPoly ronkin_P;

  /// Sign s in the magnetic-coordinate bridge B*(rho) = s (log|z|, log|w|).
  /// It is -1 when P is written in powers of 1/z, 1/w, as for the square
  /// grid, whose exponent hull is the negative of the slope polygon.
  double magnetic_sign = 1.0;

  /// Closed-form inverse of the slope map where known; falls back to a
  /// 1d bracketed Newton iteration when absent.
  std::function<cplx(const Slope&)> closed_form_z;

  /// Argument sheet selector; the shipped models use the principal sheet.
  /// A nonzero offset shifts (rho1, rho2) by even integers.
  std::array<int, 2> branch_offset = {0, 0};
};

/// P(z,w) at a point off the coordinate axes.
inline cplx eval_P(const DimerModel& m, cplx z, cplx w) {
  if (z == 0.0 || w == 0.0) throw DomainError("eval_P: z = 0 or w = 0");
  return m.P.eval(z, w);
}

/// The unique w on the spectral curve P(z, w) = 0 over a given z.
/// Works for models whose cleared polynomial has w-degree one.
inline cplx solve_w(const DimerModel& m, cplx z, double pole_tol = 1e-12) {
  if (z == 0.0) throw DomainError("solve_w: z = 0");
  auto poly = m.P.as_poly_in_w();  // coefficients in w, entries are z-polys
  if (poly.size() != 2)
    throw DomainError("solve_w: model is not degree one in w");
  auto eval_zpoly = [&](const std::map<int, double>& p) {
    cplx acc = 0;
    for (const auto& [e, c] : p) acc += c * LaurentPoly::ipow(z, e);
    return acc;
  };
  cplx a = eval_zpoly(poly[1]);  // a(z) w + b(z) = 0
  cplx b = eval_zpoly(poly[0]);
  if (std::abs(a) < pole_tol)
    throw DomainError("solve_w: z at a pole of the spectral curve");
  return -b / a;
}

/// dw/dz along the curve, via implicit differentiation.
inline cplx curve_dw_dz(const DimerModel& m, cplx z, cplx w) {
  cplx pz = m.P.dz().eval(z, w);
  cplx pw = m.P.dw().eval(z, w);
  if (std::abs(pw) == 0.0) throw DomainError("curve_dw_dz: P_w = 0");
  return -pz / pw;
}

/// Slope attached to z in the upper half plane:
/// rho = (1/pi)(-arg w, arg z), principal sheet.
inline Slope slope_from_z(const DimerModel& m, cplx z) {
  if (!(z.imag() > 0))
    throw DomainError("slope_from_z: z must be in the open upper half plane");
  cplx w = solve_w(m, z);
  double r1 = -std::arg(w) / kPi + 2.0 * m.branch_offset[0];
  double r2 = std::arg(z) / kPi + 2.0 * m.branch_offset[1];
  return {r1, r2};
}

/// True iff rho is inside the polygon at distance >= delta from the boundary
/// and each coordinate is at distance >= delta from every integer.
inline bool is_liquid(const DimerModel& m, const Slope& rho, double delta) {
  if (!m.polygon.contains(rho, delta)) return false;
  auto off_integers = [&](double v) {
    return std::fabs(v - std::round(v)) >= delta;
  };
  return off_integers(rho.r1) && off_integers(rho.r2);
}

namespace detail {

// closed-form inverse for the honeycomb: z is the apex of the triangle over
// [0,1] with angle pi*rho2 at 0 and pi*rho1 at 1
inline cplx honeycomb_z(const Slope& rho) {
  double r = std::sin(kPi * rho.r1) / std::sin(kPi * (rho.r1 + rho.r2));
  return std::polar(r, kPi * rho.r2);
}

// closed-form inverse for the square grid: z lies on the circular arc through
// -1, 1 subtending angle pi*rho1, intersected with the ray arg z = pi*rho2
inline cplx square_z(const Slope& rho) {
  double phi = kPi * rho.r1, theta = kPi * rho.r2;
  double cot = std::cos(phi) / std::sin(phi);
  double st = std::sin(theta);
  double r = st * cot + std::sqrt(st * st * cot * cot + 1.0);
  return std::polar(r, theta);
}

}  // namespace detail

struct ZFromSlopeOptions {
  double margin = 0.02;      // required distance to the polygon boundary
  double residual_tol = 1e-12;
  int max_iterations = 50;
  bool force_newton = false;  // ignore the model's closed form (test hook)
};

/// Inverse of slope_from_z on the liquid interior. Uses the model's closed
/// form when present, otherwise Newton on (log|z|, arg z).
inline cplx z_from_slope(const DimerModel& m, const Slope& rho,
                         const ZFromSlopeOptions& opts = {}) {
  if (!is_liquid(m, rho, opts.margin))
    throw DomainError("z_from_slope: slope outside the liquid interior");
  Slope base{rho.r1 - 2.0 * m.branch_offset[0],
             rho.r2 - 2.0 * m.branch_offset[1]};
  if (m.closed_form_z && !opts.force_newton) return m.closed_form_z(base);

  // arg z = pi rho2 inverts exactly, so the problem is one-dimensional:
  // rho1 is monotone in xi = log|z| along the ray (the map is a bijection).
  // Bracketed bisection with Newton polish, d rho1/d xi = -Im(q)/pi where
  // q = z w'(z)/w.
  const double eta = kPi * base.r2;
  auto rho1_at = [&](double xi) {
    return slope_from_z(m, std::polar(std::exp(xi), eta)).r1 - base.r1 -
           2.0 * m.branch_offset[0];
  };
  cplx z0 = detail::honeycomb_z(Slope{std::min(std::max(base.r1, 0.05), 0.95),
                                      std::min(std::max(base.r2, 0.05), 0.95)});
  double xi = std::log(std::abs(z0));
  double lo = xi, hi = xi, flo = rho1_at(lo), fhi = flo;
  for (double span = 1.0; flo * fhi > 0 && span < 64.0; span *= 2) {
    lo = xi - span;
    hi = xi + span;
    flo = rho1_at(lo);
    fhi = rho1_at(hi);
  }
  if (flo * fhi > 0)
    throw ConvergenceError("z_from_slope: failed to bracket the slope");
  bool decreasing = flo > fhi;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < opts.max_iterations; it++) {
    cplx z = std::polar(std::exp(x), eta);
    cplx w = solve_w(m, z);
    double f = slope_from_z(m, z).r1 - base.r1 - 2.0 * m.branch_offset[0];
    if (std::fabs(f) < opts.residual_tol) return z;
    (f > 0) == decreasing ? lo = x : hi = x;
    cplx q = z * curve_dw_dz(m, z, w) / w;
    double df = -q.imag() / kPi;
    double xn = (df != 0) ? x - f / df : x;
    if (!(xn > std::min(lo, hi) && xn < std::max(lo, hi)))
      xn = 0.5 * (lo + hi);  // bisection safeguard
    x = xn;
  }
  throw ConvergenceError("z_from_slope: Newton did not converge");
}

/// Honeycomb lattice with uniform weights: P(z,w) = z + w - 1,
/// slopes in the triangle (0,0), (1,0), (0,1).
inline DimerModel honeycomb() {
  DimerModel m;
  m.name = "honeycomb";
  m.polygon = NewtonPolygon({{0, 0}, {1, 0}, {0, 1}});
  m.P = LaurentPoly({{{1, 0}, 1.0}, {{0, 1}, 1.0}, {{0, 0}, -1.0}});
  m.ronkin_P = m.P;
  m.magnetic_sign = 1.0;
  m.closed_form_z = detail::honeycomb_z;
  return m;
}

/// Square grid with unit weights: P(z,w) = -1 + 1/z + 1/w + 1/(zw),
/// slopes in the unit square.
inline DimerModel square_grid() {
  DimerModel m;
  m.name = "square";
  m.polygon = NewtonPolygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  m.P = LaurentPoly(
      {{{0, 0}, -1.0}, {{-1, 0}, 1.0}, {{0, -1}, 1.0}, {{-1, -1}, 1.0}});
  // z w P = 1 + z + w - z w
  m.ronkin_P = LaurentPoly(
      {{{0, 0}, 1.0}, {{1, 0}, 1.0}, {{0, 1}, 1.0}, {{1, 1}, -1.0}});
  m.magnetic_sign = -1.0;
  m.closed_form_z = detail::square_z;
  return m;
}

/// Model lookup by the CLI's string key.
inline DimerModel model_by_name(const std::string& name) {
  if (name == "honeycomb") return honeycomb();
  if (name == "square") return square_grid();
  throw DomainError("unknown model '" + name + "' (expected honeycomb|square)");
}

}  // namespace akpz
