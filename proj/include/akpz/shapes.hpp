#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <vector>

#include "akpz/common.hpp"
#include "akpz/dimer.hpp"
#include "akpz/grid.hpp"
#include "akpz/surface_tension.hpp"

namespace akpz {

// ---------------------------------------------------------------------------
// Euler-Lagrange residual L[h] = sum_ij sigma_ij(grad h) d2h/dxi dxj.

struct ElOptions {
  double margin = 0.02;  // liquid margin required of interior slopes
};

/// EL residual, Burgers residual of the slope-induced z field, and the
/// Frobenius norm of D^2 h. Boundary ring and masked stencils are excluded
/// (flagged kMasked in the result grids).
inline ResidualField el_residual(const HeightField& h, const DimerModel& m,
                                 const ElOptions& opts = {}) {
  SlopeMapTension tension(m);
  ResidualField out;
  out.geom = h.geom;
  out.el = Field<double>(h.geom);
  out.burgers = Field<cplx>(h.geom);
  out.hessian_norm = Field<double>(h.geom);

  // z field from node-wise slopes, for the Burgers residual
  ComplexField zf(h.geom);
  for (int j = 0; j < h.geom.n2; j++)
    for (int i = 0; i < h.geom.n1; i++) zf.flag(i, j) = kMasked;

  for (int j = 0; j < h.geom.n2; j++) {
    for (int i = 0; i < h.geom.n1; i++) {
      if (!h.stencil_ok(i, j)) {
        out.el.flag(i, j) = kMasked;
        out.hessian_norm.flag(i, j) = kMasked;
        continue;
      }
      Vec2 g = h.gradient(i, j);
      Slope rho{g.x, g.y};
      if (!is_liquid(m, rho, opts.margin))
        throw DomainError("el_residual: non-liquid slope at node (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
      Mat2 H = h.hessian(i, j);
      Mat2 S = tension.hessian(rho);
      out.el.at(i, j) = frobenius_dot(S, H);
      out.hessian_norm.at(i, j) = H.frobenius();
      zf.at(i, j) = z_from_slope(m, rho, {.margin = 1e-9});
      zf.flag(i, j) = kInterior;
    }
  }

  for (int j = 0; j < h.geom.n2; j++) {
    for (int i = 0; i < h.geom.n1; i++) {
      if (!zf.stencil_ok(i, j)) {
        out.burgers.flag(i, j) = kMasked;
        continue;
      }
      cplx z = zf.at(i, j);
      cplx w = solve_w(m, z);
      out.burgers.at(i, j) = z * zf.dx2(i, j) + w * zf.dx1(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variational construction: minimize sum_cells sigma(grad h) dx1 dx2 with the
// boundary ring fixed. Damped Newton on the gradient of the energy; the cell
// Hessians Sigma(grad h) are frozen per outer iteration and the Newton system
// is solved matrix-free by conjugate gradients.

struct MinimizeOptions {
  double margin = 0.02;        // cells must keep this liquid margin
  double tol_per_node = 1e-8;  // stop when |grad E|_2 < tol * (#interior)
  int max_newton = 60;
  int max_cg = 400;
  double cg_tol = 1e-10;
};

namespace detail {

// cell-averaged slope from the four corners
inline Vec2 cell_slope(const HeightField& h, int ci, int cj) {
  double dx = h.geom.spacing.x, dy = h.geom.spacing.y;
  double s1 = (h.at(ci + 1, cj) + h.at(ci + 1, cj + 1) - h.at(ci, cj) -
               h.at(ci, cj + 1)) /
              (2 * dx);
  double s2 = (h.at(ci, cj + 1) + h.at(ci + 1, cj + 1) - h.at(ci, cj) -
               h.at(ci + 1, cj)) /
              (2 * dy);
  return {s1, s2};
}

inline bool cells_liquid(const HeightField& h, const DimerModel& m,
                         double margin) {
  for (int cj = 0; cj + 1 < h.geom.n2; cj++)
    for (int ci = 0; ci + 1 < h.geom.n1; ci++) {
      Vec2 s = cell_slope(h, ci, cj);
      if (!is_liquid(m, Slope{s.x, s.y}, margin)) return false;
    }
  return true;
}

// gradient of the discrete energy w.r.t. interior node values
inline std::vector<double> energy_gradient(const HeightField& h,
                                           const SlopeMapTension& tension) {
  const GridGeom& g = h.geom;
  double area = g.spacing.x * g.spacing.y;
  std::vector<double> grad(g.size(), 0.0);
  for (int cj = 0; cj + 1 < g.n2; cj++) {
    for (int ci = 0; ci + 1 < g.n1; ci++) {
      Vec2 s = cell_slope(h, ci, cj);
      Vec2 B = tension.grad(Slope{s.x, s.y});
      double gx = B.x / (2 * g.spacing.x) * area;
      double gy = B.y / (2 * g.spacing.y) * area;
      grad[g.idx(ci, cj)] += -gx - gy;
      grad[g.idx(ci + 1, cj)] += gx - gy;
      grad[g.idx(ci, cj + 1)] += -gx + gy;
      grad[g.idx(ci + 1, cj + 1)] += gx + gy;
    }
  }
  for (int j = 0; j < g.n2; j++)
    for (int i = 0; i < g.n1; i++)
      if (g.on_ring(i, j)) grad[g.idx(i, j)] = 0.0;
  return grad;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

/// Minimize the discrete surface-tension functional with the ring of
/// `boundary` held fixed; interior values of `boundary` are ignored.
inline HeightField minimize_surface_tension(const DimerModel& m,
                                            const HeightField& boundary,
                                            const MinimizeOptions& opts = {}) {
  const GridGeom& g = boundary.geom;
  SlopeMapTension tension(m);
  HeightField h = boundary;

  // start from the harmonic fill of the boundary data (Laplace via CG)
  {
    std::vector<double> r(g.size(), 0.0), p, Ap(g.size());
    auto apply_lap = [&](const std::vector<double>& x, std::vector<double>& y) {
      for (int j = 1; j + 1 < g.n2; j++)
        for (int i = 1; i + 1 < g.n1; i++)
          y[g.idx(i, j)] = 4 * x[g.idx(i, j)] - x[g.idx(i - 1, j)] -
                           x[g.idx(i + 1, j)] - x[g.idx(i, j - 1)] -
                           x[g.idx(i, j + 1)];
    };
    std::vector<double> x(g.size(), 0.0);
    for (int j = 0; j < g.n2; j++)
      for (int i = 0; i < g.n1; i++)
        x[g.idx(i, j)] = g.on_ring(i, j) ? boundary.at(i, j) : 0.0;
    // interpolate interior seed: mean of boundary
    double mean = 0;
    int cnt = 0;
    for (int j = 0; j < g.n2; j++)
      for (int i = 0; i < g.n1; i++)
        if (g.on_ring(i, j)) {
          mean += boundary.at(i, j);
          cnt++;
        }
    mean /= cnt;
    for (int j = 1; j + 1 < g.n2; j++)
      for (int i = 1; i + 1 < g.n1; i++) x[g.idx(i, j)] = mean;
    apply_lap(x, Ap);
    for (int j = 1; j + 1 < g.n2; j++)
      for (int i = 1; i + 1 < g.n1; i++) r[g.idx(i, j)] = -Ap[g.idx(i, j)];
    p = r;
    double rr = 0;
    for (double v : r) rr += v * v;
    for (int it = 0; it < 4 * g.size() && rr > 1e-24; it++) {
      apply_lap(p, Ap);
      double pAp = 0;
      for (int k = 0; k < g.size(); k++) pAp += p[k] * Ap[k];
      if (pAp <= 0) break;
      double alpha = rr / pAp;
      for (int j = 1; j + 1 < g.n2; j++)
        for (int i = 1; i + 1 < g.n1; i++) {
          int k = g.idx(i, j);
          x[k] += alpha * p[k];
          r[k] -= alpha * Ap[k];
        }
      double rr2 = 0;
      for (double v : r) rr2 += v * v;
      for (int k = 0; k < g.size(); k++) p[k] = r[k] + (rr2 / rr) * p[k];
      rr = rr2;
    }
    for (int j = 0; j < g.n2; j++)
      for (int i = 0; i < g.n1; i++) h.at(i, j) = x[g.idx(i, j)];
  }

  if (!detail::cells_liquid(h, m, opts.margin))
    throw DomainError(
        "minimize_surface_tension: boundary data admits no liquid start");

  int n_interior = (g.n1 - 2) * (g.n2 - 2);
  double tol = opts.tol_per_node * n_interior;
  double area = g.spacing.x * g.spacing.y;

  for (int newton = 0; newton <= opts.max_newton; newton++) {
    std::vector<double> grad = detail::energy_gradient(h, tension);
    double gn = detail::norm2(grad);
    if (gn < tol) return h;
    if (newton == opts.max_newton) break;

    // freeze per-cell Sigma for this outer iteration
    int ncells = (g.n1 - 1) * (g.n2 - 1);
    std::vector<Mat2> S(ncells);
    for (int cj = 0; cj + 1 < g.n2; cj++)
      for (int ci = 0; ci + 1 < g.n1; ci++) {
        Vec2 s = detail::cell_slope(h, ci, cj);
        S[cj * (g.n1 - 1) + ci] = tension.hessian(Slope{s.x, s.y});
      }

    auto apply_H = [&](const std::vector<double>& x, std::vector<double>& y) {
      std::fill(y.begin(), y.end(), 0.0);
      for (int cj = 0; cj + 1 < g.n2; cj++) {
        for (int ci = 0; ci + 1 < g.n1; ci++) {
          double dgx = (x[g.idx(ci + 1, cj)] + x[g.idx(ci + 1, cj + 1)] -
                        x[g.idx(ci, cj)] - x[g.idx(ci, cj + 1)]) /
                       (2 * g.spacing.x);
          double dgy = (x[g.idx(ci, cj + 1)] + x[g.idx(ci + 1, cj + 1)] -
                        x[g.idx(ci, cj)] - x[g.idx(ci + 1, cj)]) /
                       (2 * g.spacing.y);
          Vec2 dB = S[cj * (g.n1 - 1) + ci].apply({dgx, dgy});
          double gx = dB.x / (2 * g.spacing.x) * area;
          double gy = dB.y / (2 * g.spacing.y) * area;
          y[g.idx(ci, cj)] += -gx - gy;
          y[g.idx(ci + 1, cj)] += gx - gy;
          y[g.idx(ci, cj + 1)] += -gx + gy;
          y[g.idx(ci + 1, cj + 1)] += gx + gy;
        }
      }
      for (int j = 0; j < g.n2; j++)
        for (int i = 0; i < g.n1; i++)
          if (g.on_ring(i, j)) y[g.idx(i, j)] = 0.0;
    };

    // CG for H step = -grad
    std::vector<double> step(g.size(), 0.0), r = grad, p, Ap(g.size());
    for (double& v : r) v = -v;
    p = r;
    double rr = 0;
    for (double v : r) rr += v * v;
    double rr0 = rr;
    for (int it = 0; it < opts.max_cg && rr > opts.cg_tol * opts.cg_tol * rr0;
         it++) {
      apply_H(p, Ap);
      double pAp = 0;
      for (int k = 0; k < g.size(); k++) pAp += p[k] * Ap[k];
      if (pAp <= 0) break;  // should not happen: energy is convex
      double alpha = rr / pAp;
      for (int k = 0; k < g.size(); k++) {
        step[k] += alpha * p[k];
        r[k] -= alpha * Ap[k];
      }
      double rr2 = 0;
      for (double v : r) rr2 += v * v;
      for (int k = 0; k < g.size(); k++) p[k] = r[k] + (rr2 / rr) * p[k];
      rr = rr2;
    }

    // backtracking on the gradient norm; reject steps leaving the liquid set
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ls++, alpha *= 0.5) {
      HeightField trial = h;
      for (int j = 1; j + 1 < g.n2; j++)
        for (int i = 1; i + 1 < g.n1; i++)
          trial.at(i, j) = h.at(i, j) + alpha * step[g.idx(i, j)];
      if (!detail::cells_liquid(trial, m, opts.margin)) continue;
      double gn_trial = detail::norm2(detail::energy_gradient(trial, tension));
      if (gn_trial < gn * (1.0 - 0.25 * alpha) || gn_trial < tol) {
        h = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw ConvergenceError("minimize_surface_tension: line-search starvation");
  }
  throw ConvergenceError("minimize_surface_tension: Newton did not converge");
}

/// Discrete energy sum_cells sigma(grad h) dx1 dx2; used by the gradient
/// consistency checks. Values come from the anchored path-integrated sigma.
inline double discrete_energy(const HeightField& h,
                              const SlopeMapTension& tension) {
  double area = h.geom.spacing.x * h.geom.spacing.y;
  double e = 0;
  for (int cj = 0; cj + 1 < h.geom.n2; cj++)
    for (int ci = 0; ci + 1 < h.geom.n1; ci++) {
      Vec2 s = detail::cell_slope(h, ci, cj);
      e += tension.value(Slope{s.x, s.y}) * area;
    }
  return e;
}

// ---------------------------------------------------------------------------
// Implicit Burgers construction. Along characteristics of
// z_{x1}/z + w_{x2}/w = 0 the value z is constant, which yields the implicit
// family  x2 - g(z) x1 = C(z)  with  g(z) = -z P_z / (w P_w).
// Each grid node is solved by complex Newton continued from its neighbour.

struct AnalyticFn {
  std::function<cplx(cplx)> f;
  std::function<cplx(cplx)> df;
  std::string name = "C";
};

inline AnalyticFn const_fn(cplx c) {
  return {[c](cplx) { return c; }, [](cplx) { return cplx(0); }, "const"};
}

inline AnalyticFn affine_fn(cplx a, cplx b) {  // C(z) = a + b z
  return {[a, b](cplx z) { return a + b * z; }, [b](cplx) { return b; },
          "affine"};
}

namespace detail {

// g(z) = -z P_z / (w P_w) on the curve, and its z-derivative
struct CharSlope {
  const DimerModel* m;
  LaurentPoly Pz, Pw, Pzz, Pzw, Pww;

  explicit CharSlope(const DimerModel& model) : m(&model) {
    Pz = m->P.dz();
    Pw = m->P.dw();
    Pzz = Pz.dz();
    Pzw = Pz.dw();
    Pww = Pw.dw();
  }

  cplx g(cplx z, cplx w) const {
    return -z * Pz.eval(z, w) / (w * Pw.eval(z, w));
  }

  cplx dg(cplx z, cplx w) const {
    cplx pz = Pz.eval(z, w), pw = Pw.eval(z, w);
    cplx wp = -pz / pw;  // dw/dz on the curve
    cplx N = z * pz, D = w * pw;
    cplx Nz = pz + z * Pzz.eval(z, w) + z * Pzw.eval(z, w) * wp;
    cplx Dz = wp * pw + w * (Pzw.eval(z, w) + Pww.eval(z, w) * wp);
    return -(Nz * D - N * Dz) / (D * D);
  }
};

}  // namespace detail

struct BurgersOptions {
  double residual_tol = 1e-12;
  int max_newton = 40;
  double seed_tol = 1e-6;  // |Phi(seed)| allowed at the grid origin
};

/// Solve x2 - g(z) x1 = C(z) for z at every node, continuation from the
/// origin seed. Nodes where the continuation exits the upper half plane or
/// Newton diverges are masked.
inline ComplexField solve_burgers_implicit(const DimerModel& m,
                                           const AnalyticFn& C,
                                           const GridGeom& grid, cplx seed_z,
                                           const BurgersOptions& opts = {}) {
  detail::CharSlope cs(m);
  auto phi = [&](cplx z, Vec2 x) -> cplx {
    cplx w = solve_w(m, z);
    return x.y - cs.g(z, w) * x.x - C.f(z);
  };
  auto dphi = [&](cplx z, Vec2 x) -> cplx {
    cplx w = solve_w(m, z);
    return -cs.dg(z, w) * x.x - C.df(z);
  };
  auto newton = [&](cplx z0, Vec2 x) -> std::optional<cplx> {
    cplx z = z0;
    for (int it = 0; it < opts.max_newton; it++) {
      cplx r = phi(z, x);
      if (std::abs(r) < opts.residual_tol) return z;
      cplx d = dphi(z, x);
      if (std::abs(d) < 1e-14) return std::nullopt;  // fold
      cplx step = r / d;
      if (std::abs(step) > 10.0) return std::nullopt;
      z -= step;
      if (!(z.imag() > 0)) return std::nullopt;
    }
    return std::nullopt;
  };

  if (std::abs(phi(seed_z, grid.coord(0, 0))) > opts.seed_tol)
    throw DomainError(
        "solve_burgers_implicit: seed does not solve the relation at the "
        "grid origin");

  ComplexField zf(grid);
  std::vector<std::uint8_t> state(grid.size(), 0);  // 0 unseen, 1 ok, 2 failed
  auto origin = newton(seed_z, grid.coord(0, 0));
  if (!origin)
    throw ConvergenceError("solve_burgers_implicit: seed polish failed");
  zf.at(0, 0) = *origin;
  state[grid.idx(0, 0)] = 1;

  std::deque<std::pair<int, int>> queue{{0, 0}};
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; d++) {
      int ni = i + di[d], nj = j + dj[d];
      if (ni < 0 || nj < 0 || ni >= grid.n1 || nj >= grid.n2) continue;
      if (state[grid.idx(ni, nj)] != 0) continue;
      auto z = newton(zf.at(i, j), grid.coord(ni, nj));
      if (z) {
        zf.at(ni, nj) = *z;
        state[grid.idx(ni, nj)] = 1;
        queue.emplace_back(ni, nj);
      } else {
        state[grid.idx(ni, nj)] = 2;
      }
    }
  }

  bool consistent = true;
  for (int j = 0; j < grid.n2; j++)
    for (int i = 0; i < grid.n1; i++) {
      if (state[grid.idx(i, j)] != 1) {
        zf.flag(i, j) = kMasked;
        continue;
      }
      if (i + 1 < grid.n1 && state[grid.idx(i + 1, j)] == 1 &&
          std::fabs(std::arg(zf.at(i + 1, j) / zf.at(i, j))) >= kPi / 2)
        consistent = false;
      if (j + 1 < grid.n2 && state[grid.idx(i, j + 1)] == 1 &&
          std::fabs(std::arg(zf.at(i, j + 1) / zf.at(i, j))) >= kPi / 2)
        consistent = false;
    }
  zf.branch_consistent = consistent;
  return zf;
}

// ---------------------------------------------------------------------------

struct HeightFromZOptions {
  double curl_tol_factor = 1e-6;  // tolerance is factor * max(dx1, dx2)
};

/// Integrate the slope field (1/pi)(-arg w, arg z) to a height, midpoint rule
/// along row 0 and then up each column. Every fully-valid plaquette must
/// close to within the curl tolerance.
inline HeightField height_from_zfield(const DimerModel& m,
                                      const ComplexField& zf,
                                      const HeightFromZOptions& opts = {}) {
  if (!zf.branch_consistent)
    throw DomainError("height_from_zfield: z field is not branch consistent");
  const GridGeom& g = zf.geom;
  Field<double> r1(g), r2(g);
  for (int j = 0; j < g.n2; j++)
    for (int i = 0; i < g.n1; i++) {
      if (!zf.valid(i, j)) {
        r1.flag(i, j) = kMasked;
        r2.flag(i, j) = kMasked;
        continue;
      }
      Slope s = slope_from_z(m, zf.at(i, j));
      r1.at(i, j) = s.r1;
      r2.at(i, j) = s.r2;
    }

  double tol = opts.curl_tol_factor * std::max(g.spacing.x, g.spacing.y);
  double max_curl = 0;
  for (int j = 0; j + 1 < g.n2; j++)
    for (int i = 0; i + 1 < g.n1; i++) {
      if (!(r1.valid(i, j) && r1.valid(i + 1, j) && r1.valid(i, j + 1) &&
            r1.valid(i + 1, j + 1)))
        continue;
      double c = 0.5 * (r1.at(i, j) + r1.at(i + 1, j)) * g.spacing.x +
                 0.5 * (r2.at(i + 1, j) + r2.at(i + 1, j + 1)) * g.spacing.y -
                 0.5 * (r1.at(i, j + 1) + r1.at(i + 1, j + 1)) * g.spacing.x -
                 0.5 * (r2.at(i, j) + r2.at(i, j + 1)) * g.spacing.y;
      max_curl = std::max(max_curl, std::fabs(c));
    }
  if (max_curl >= tol)
    throw CurlError("height_from_zfield: slope field is not a gradient "
                    "(max plaquette curl " +
                    std::to_string(max_curl) + ")");

  HeightField h(g);
  Field<std::uint8_t> have(g, 0);
  if (!zf.valid(0, 0))
    throw DomainError("height_from_zfield: origin node is masked");
  h.at(0, 0) = 0.0;
  have.at(0, 0) = 1;
  for (int i = 1; i < g.n1; i++) {
    if (!have.at(i - 1, 0) || !r1.valid(i, 0)) break;
    h.at(i, 0) =
        h.at(i - 1, 0) + 0.5 * (r1.at(i - 1, 0) + r1.at(i, 0)) * g.spacing.x;
    have.at(i, 0) = 1;
  }
  for (int i = 0; i < g.n1; i++)
    for (int j = 1; j < g.n2; j++) {
      if (!have.at(i, j - 1) || !r2.valid(i, j)) break;
      h.at(i, j) =
          h.at(i, j - 1) + 0.5 * (r2.at(i, j - 1) + r2.at(i, j)) * g.spacing.y;
      have.at(i, j) = 1;
    }
  for (int j = 0; j < g.n2; j++)
    for (int i = 0; i < g.n1; i++)
      if (!have.at(i, j)) h.flag(i, j) = kMasked;
  return h;
}

/// Central-difference Burgers residual Delta = z w_{x2} + w z_{x1}.
inline Field<cplx> burgers_residual(const ComplexField& zf,
                                    const DimerModel& m) {
  Field<cplx> out(zf.geom);
  for (int j = 0; j < zf.geom.n2; j++)
    for (int i = 0; i < zf.geom.n1; i++) {
      if (!zf.stencil_ok(i, j)) {
        out.flag(i, j) = kMasked;
        continue;
      }
      cplx z = zf.at(i, j);
      out.at(i, j) = z * zf.dx2(i, j) + solve_w(m, z) * zf.dx1(i, j);
    }
  return out;
}

/// Node-wise check that z_{x2}/z_{x1} is non-real and matches
/// w P_w / (z P_z) on Burgers solutions. (The chain rule gives the ratio as
/// -z'(w) w/z with z'(w) = -P_w/P_z, so the two minus signs cancel.)
struct SlopeRatioReport {
  int checked = 0;
  int nonreal_violations = 0;
  int mismatch_violations = 0;
  double max_mismatch = 0;
  double min_imag_ratio = std::numeric_limits<double>::infinity();
  bool pass() const {
    return nonreal_violations == 0 && mismatch_violations == 0;
  }
};

inline SlopeRatioReport check_slope_ratio_nonreal(const ComplexField& zf,
                                                  const DimerModel& m) {
  LaurentPoly Pz = m.P.dz(), Pw = m.P.dw();
  SlopeRatioReport rep;
  const GridGeom& g = zf.geom;
  // fourth-order stencils; the 1e-6 match needs better than O(dx^2)
  auto d4 = [&](int i, int j, int di, int dj, double dd) -> cplx {
    return (-zf.at(i + 2 * di, j + 2 * dj) + 8.0 * zf.at(i + di, j + dj) -
            8.0 * zf.at(i - di, j - dj) + zf.at(i - 2 * di, j - 2 * dj)) /
           (12.0 * dd);
  };
  for (int j = 2; j + 2 < g.n2; j++)
    for (int i = 2; i + 2 < g.n1; i++) {
      bool ok = true;
      for (int a = -2; a <= 2 && ok; a++)
        for (int b = -2; b <= 2 && ok; b++)
          if (!zf.valid(i + a, j + b)) ok = false;
      if (!ok) continue;
      cplx zx1 = d4(i, j, 1, 0, g.spacing.x);
      if (std::abs(zx1) <= 1e-10) continue;
      cplx z = zf.at(i, j), w = solve_w(m, z);
      cplx ratio = d4(i, j, 0, 1, g.spacing.y) / zx1;
      cplx pred = (w * Pw.eval(z, w)) / (z * Pz.eval(z, w));
      rep.checked++;
      rep.min_imag_ratio = std::min(rep.min_imag_ratio,
                                    std::fabs(ratio.imag()));
      if (std::fabs(ratio.imag()) <= 1e-8) rep.nonreal_violations++;
      double mis = std::abs(ratio - pred);
      rep.max_mismatch = std::max(rep.max_mismatch, mis);
      if (mis >= 1e-6) rep.mismatch_violations++;
    }
  return rep;
}

}  // namespace akpz
