#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "akpz/common.hpp"
#include "akpz/dimer.hpp"
#include "akpz/fd.hpp"

namespace akpz {

// ---------------------------------------------------------------------------
// Ronkin function: torus average of log|P| at radii (e^{B1}, e^{B2}).
//
// Trapezoidal rule on the n x n angle grid. The integrand has isolated,
// integrable log singularities where the spectral curve meets the torus;
// cells near them are refined dyadically (midpoint subcells), and the
// refined/unrefined estimates are blended so the quadrature value stays a
// smooth function of B.

struct RonkinOptions {
  int n = 512;                  // nodes per angle
  double refine_factor = 8.0;   // refine cells with |P| < factor * G * h
  int refine_levels = 3;
  int subdiv = 4;               // midpoint subcells per side and level
  double near_zero_abort = 1e-10;
  bool check_imaginary = true;  // assert the odd part integrates to ~0
};

struct RonkinEvaluation {
  Vec2 B;
  double value = 0;
  int quadrature_order = 0;
  double min_abs_P = 0;         // smallest |P| seen on the base grid
  double imaginary_residual = 0;
};

namespace detail {

inline double ronkin_cell_refine(const LaurentPoly& P, Vec2 B, double tc,
                                 double pc, double hh, int depth,
                                 const RonkinOptions& o, double G) {
  const int m = o.subdiv;
  const double hs = hh / m;
  const double e1 = std::exp(B.x), e2 = std::exp(B.y);
  double acc = 0;
  for (int a = 0; a < m; a++) {
    for (int b = 0; b < m; b++) {
      double t = tc - hh / 2 + (a + 0.5) * hs;
      double p = pc - hh / 2 + (b + 0.5) * hs;
      double ap = std::abs(P.eval(std::polar(e1, t), std::polar(e2, p)));
      double want = std::max(o.refine_factor * G * hs, o.near_zero_abort);
      if (depth < o.refine_levels && ap < want) {
        acc += ronkin_cell_refine(P, B, t, p, hs, depth + 1, o, G);
      } else {
        if (ap < o.near_zero_abort)
          throw NearZeroError(
              "ronkin: quadrature node on a zero of P after maximal "
              "refinement");
        acc += std::log(ap);
      }
    }
  }
  return acc / (m * m);
}

}  // namespace detail

inline RonkinEvaluation ronkin_eval(const DimerModel& m, Vec2 B,
                                    const RonkinOptions& opts = {}) {
  const int n = opts.n;
  const double h = 2 * kPi / n;
  const double e1 = std::exp(B.x), e2 = std::exp(B.y);

  // per-term power tables; evaluation is then a handful of mult-adds per node
  const auto& coeffs = m.ronkin_P.coefficients();
  const size_t T = coeffs.size();
  std::vector<std::vector<cplx>> zpow(T, std::vector<cplx>(n));
  std::vector<std::vector<cplx>> wpow(T, std::vector<cplx>(n));
  std::vector<double> cs(T);
  {
    size_t t = 0;
    for (const auto& [e, c] : coeffs) {
      for (int j = 0; j < n; j++) {
        // symmetric angles theta_j in (-pi, pi] keep conjugate nodes exact
        double ang = h * (j <= n / 2 ? j : j - n);
        zpow[t][j] = LaurentPoly::ipow(std::polar(e1, ang), e.first);
        wpow[t][j] = LaurentPoly::ipow(std::polar(e2, ang), e.second);
      }
      cs[t++] = c;
    }
  }

  const double G = m.ronkin_P.angular_gradient_bound(B);
  const double thr = opts.refine_factor * G * h;
  double sum = 0, arg_sum = 0, min_ap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; j++) {
    double row = 0, arg_row = 0;
    for (int k = 0; k < n; k++) {
      cplx P = 0;
      for (size_t t = 0; t < T; t++) P += cs[t] * zpow[t][j] * wpow[t][k];
      double ap = std::abs(P);
      min_ap = std::min(min_ap, ap);
      if (ap < std::max(thr, opts.near_zero_abort)) {
        double ang_t = h * (j <= n / 2 ? j : j - n);
        double ang_p = h * (k <= n / 2 ? k : k - n);
        double fine = detail::ronkin_cell_refine(m.ronkin_P, B, ang_t, ang_p,
                                                 h, 1, opts, G);
        if (thr <= 0 || ap <= 0.5 * thr) {
          row += fine;
        } else {
          double s = 2.0 - 2.0 * ap / thr;  // ramp 1 -> 0 on [thr/2, thr]
          row += s * fine + (1 - s) * std::log(ap);
        }
      } else {
        row += std::log(ap);
      }
      if (opts.check_imaginary && P.imag() != 0.0) {
        // nodes on the odd-symmetry axis are mathematically real and carry
        // no imaginary contribution; at angles 0 and pi the roundoff of
        // sin(pi) would otherwise leak a stray +/- pi
        bool self_conjugate = (j == 0 || 2 * j == n) && (k == 0 || 2 * k == n);
        if (!self_conjugate) arg_row += std::arg(P);
      }
    }
    sum += row;
    arg_sum += arg_row;
  }

  RonkinEvaluation out;
  out.B = B;
  out.quadrature_order = n;
  out.value = sum / (double(n) * n);
  out.min_abs_P = min_ap;
  out.imaginary_residual = std::fabs(arg_sum) / (double(n) * n);
  if (opts.check_imaginary && out.imaginary_residual >= 1e-8)
    throw Error("ronkin: imaginary part failed to cancel");
  return out;
}

inline double ronkin(const DimerModel& m, Vec2 B,
                     const RonkinOptions& opts = {}) {
  return ronkin_eval(m, B, opts).value;
}

// ---------------------------------------------------------------------------
// Surface tension sigma(rho) = sup_B [rho . B - R(B)], concave maximization
// by damped Newton with finite-difference gradients of the Ronkin function.

struct SigmaOptions {
  RonkinOptions quad;
  double margin = 0.02;       // liquid margin enforced on rho
  double grad_step = 1e-3;    // FD step in B for grad/Hess of R
  int grad_n = 0;             // quadrature order for FD passes (0: same as n)
  double slope_tol = 1e-4;    // accept B* when |rho - grad R(B*)| below this
  int max_iterations = 40;
  bool warm_start = true;     // start from (log|z|, log|w|) via the slope map
};

struct SigmaResult {
  double value = 0;
  Vec2 B_star;
  int iterations = 0;
};

/// Surface tension at a liquid slope; std::nullopt marks slopes outside the
/// margin-delta liquid interior (never an infinity).
inline std::optional<SigmaResult> sigma(const DimerModel& m, const Slope& rho,
                                        const SigmaOptions& opts = {}) {
  if (!is_liquid(m, rho, opts.margin)) return std::nullopt;

  RonkinOptions grad_quad = opts.quad;
  grad_quad.check_imaginary = false;
  if (opts.grad_n > 0) grad_quad.n = opts.grad_n;
  auto R_grad = [&](Vec2 B) { return ronkin(m, B, grad_quad); };

  Vec2 B{0, 0};
  if (opts.warm_start) {
    cplx z = z_from_slope(m, rho, {.margin = opts.margin});
    cplx w = solve_w(m, z);
    B = Vec2{std::log(std::abs(z)), std::log(std::abs(w))} * m.magnetic_sign;
  }

  Vec2 target = rho.vec();
  int it = 0;
  for (; it <= opts.max_iterations; it++) {
    Vec2 g = target - fd_gradient(R_grad, B, opts.grad_step);
    // near the maximizer the plain-FD truncation bias dominates; polish
    // with the extrapolated gradient before testing convergence
    if (g.norm() < 20 * opts.slope_tol)
      g = target - fd_gradient_richardson(R_grad, B, opts.grad_step);
    if (g.norm() < opts.slope_tol) break;
    if (it == opts.max_iterations)
      throw ConvergenceError("sigma: Legendre maximization did not converge");
    Mat2 H = fd_hessian(R_grad, B, opts.grad_step);  // convex, so H is PSD
    Vec2 step;
    if (std::fabs(H.det()) > 1e-10 * (1 + H.frobenius())) {
      step = H.solve(g);
    } else {
      // outside the amoeba R is affine and the Hessian degenerates;
      // a plain ascent step walks back toward the maximizer
      step = g;
    }
    // R grows linearly at infinity; keep steps sane
    double damp = 1.0;
    while (step.norm() * damp > 2.0) damp *= 0.5;
    B = B + step * damp;
  }

  SigmaResult out;
  out.B_star = B;
  out.iterations = it;
  out.value = target.dot(B) - ronkin(m, B, opts.quad);
  return out;
}

/// Second derivative matrix of sigma and its eigenvalues.
struct SurfaceTensionMatrix {
  Mat2 matrix;                        // symmetrized
  std::array<double, 2> eigenvalues;  // ascending
};

/// Central finite differences of sigma with Richardson extrapolation
/// (steps h and h/2), symmetrized.
inline SurfaceTensionMatrix sigma_hessian(const DimerModel& m,
                                          const Slope& rho, double step = 1e-3,
                                          SigmaOptions opts = {}) {
  if (!is_liquid(m, rho, std::max(opts.margin, 2 * step)))
    throw DomainError("sigma_hessian: need margin > 2*step around rho");
  // the stencil rides on warm-started evaluations; gradient verification at
  // reduced order keeps the cost of 17 quadrature sweeps per call in check,
  // and the acceptance tolerance allows for that order's gradient bias
  SigmaOptions so = opts;
  if (so.grad_n == 0) so.grad_n = std::min(128, so.quad.n);
  so.slope_tol = std::max(so.slope_tol, 5e-4);
  so.quad.check_imaginary = false;
  auto f = [&](Vec2 x) {
    auto r = sigma(m, Slope{x.x, x.y}, so);
    if (!r) throw DomainError("sigma_hessian: stencil left the liquid region");
    return r->value;
  };
  Mat2 H = fd_hessian_richardson(f, rho.vec(), step).symmetrized();
  return {H, H.sym_eigenvalues()};
}

// ---------------------------------------------------------------------------
// Fast surface-tension derivatives through the slope map.
//
// Legendre duality gives grad sigma(rho) = B*(rho) = (log|z|, log|w|) and
// D^2 sigma = dB*/drho, so the Hessian of sigma is the Jacobian of the
// closed-form slope map. This provider backs the per-node Sigma(grad h)
// evaluations in the shape and evolution modules, where quadrature per node
// would be prohibitive; it is cross-checked against sigma_hessian in tests.

class SlopeMapTension {
 public:
  explicit SlopeMapTension(const DimerModel& m, double margin = 1e-6)
      : model_(&m), margin_(margin) {}

  Vec2 grad(const Slope& rho) const {
    cplx z = z_from_slope(*model_, rho, {.margin = margin_});
    cplx w = solve_w(*model_, z);
    return Vec2{std::log(std::abs(z)), std::log(std::abs(w))} *
           model_->magnetic_sign;
  }

  Mat2 hessian(const Slope& rho, double step = 1e-5) const {
    auto b1 = [&](Vec2 x) { return grad(Slope{x.x, x.y}).x; };
    auto b2 = [&](Vec2 x) { return grad(Slope{x.x, x.y}).y; };
    Vec2 g1 = fd_gradient_richardson(b1, rho.vec(), step);
    Vec2 g2 = fd_gradient_richardson(b2, rho.vec(), step);
    return Mat2{g1.x, 0.5 * (g1.y + g2.x), 0.5 * (g1.y + g2.x), g2.y};
  }

  /// sigma value by integrating B* along a segment from the anchor slope.
  /// The anchor constant is the quadrature value at the anchor, computed once.
  double value(const Slope& rho) const {
    ensure_anchor();
    Vec2 a = anchor_.vec(), b = rho.vec();
    Vec2 d = b - a;
    // 32-point Gauss-Legendre on [0,1]
    static const int N = 32;
    static std::array<double, N> gx, gw;
    static bool init = false;
    if (!init) {
      gauss_nodes(gx, gw);
      init = true;
    }
    double acc = 0;
    for (int i = 0; i < N; i++) {
      Vec2 p = a + d * gx[i];
      acc += gw[i] * grad(Slope{p.x, p.y}).dot(d);
    }
    return anchor_value_ + acc;
  }

  const DimerModel& model() const { return *model_; }

 private:
  void ensure_anchor() const {
    if (anchor_set_) return;
    // centroid of the polygon is comfortably liquid for both lattices
    double cx = 0, cy = 0;
    for (const auto& v : model_->polygon.vertices()) {
      cx += v[0];
      cy += v[1];
    }
    size_t n = model_->polygon.vertices().size();
    anchor_ = Slope{cx / n, cy / n};
    SigmaOptions so;
    so.quad.n = 512;
    anchor_value_ = sigma(*model_, anchor_, so)->value;
    anchor_set_ = true;
  }

  template <size_t N>
  static void gauss_nodes(std::array<double, N>& x, std::array<double, N>& w) {
    for (size_t i = 0; i < N; i++) {
      double t = std::cos(kPi * (i + 0.75) / (N + 0.5));
      double p1 = 0, dp = 0;
      for (int it = 0; it < 100; it++) {
        double a = 1, b = t;
        for (size_t k = 2; k <= N; k++) {
          double c = ((2 * k - 1) * t * b - (k - 1) * a) / k;
          a = b;
          b = c;
        }
        p1 = b;
        dp = N * (t * b - a) / (t * t - 1);
        double dt = p1 / dp;
        t -= dt;
        if (std::fabs(dt) < 1e-15) break;
      }
      x[i] = 0.5 * (1 - t);  // map to [0,1], descending t -> ascending x
      w[i] = 1.0 / ((1 - t * t) * dp * dp);
    }
  }

  const DimerModel* model_;
  double margin_;
  mutable bool anchor_set_ = false;
  mutable Slope anchor_;
  mutable double anchor_value_ = 0;
};

}  // namespace akpz
