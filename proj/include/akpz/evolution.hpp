#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "akpz/common.hpp"
#include "akpz/dimer.hpp"
#include "akpz/fd.hpp"
#include "akpz/grid.hpp"
#include "akpz/shapes.hpp"
#include "akpz/speed.hpp"
#include "akpz/surface_tension.hpp"

namespace akpz {

// ---------------------------------------------------------------------------
// Method of characteristics for  dh/dt = v(grad h):  slopes ride unchanged
// along straight lines x(t) = x0 - Dv(rho0) t, heights grow at the rate
// v(rho0) - rho0 . Dv(rho0).

struct CharacteristicBundle {
  GridGeom geom;
  Field<double> rho1, rho2;   // transported slopes at the foot points
  Field<double> speed;        // v(rho0)
  Field<double> v1, v2;       // Dv(rho0)
  Field<double> rate;         // v - rho . Dv
  double t_max = 0;           // first-crossing heuristic horizon
};

inline CharacteristicBundle characteristic_bundle(const HeightField& h0,
                                                  const SpeedFunction& v,
                                                  double dv_step = 1e-4) {
  CharacteristicBundle b{h0.geom,
                         Field<double>(h0.geom), Field<double>(h0.geom),
                         Field<double>(h0.geom), Field<double>(h0.geom),
                         Field<double>(h0.geom), Field<double>(h0.geom), 0};
  double max_rate = 0;
  auto vf = [&](Vec2 x) { return v(Slope{x.x, x.y}); };
  for (int j = 0; j < h0.geom.n2; j++) {
    for (int i = 0; i < h0.geom.n1; i++) {
      if (!h0.stencil_ok(i, j)) {
        for (auto* f : {&b.rho1, &b.rho2, &b.speed, &b.v1, &b.v2, &b.rate})
          f->flag(i, j) = kMasked;
        continue;
      }
      Vec2 rho = h0.gradient(i, j);
      Vec2 dv = fd_gradient_richardson(vf, rho, dv_step);
      double vv = vf(rho);
      b.rho1.at(i, j) = rho.x;
      b.rho2.at(i, j) = rho.y;
      b.speed.at(i, j) = vv;
      b.v1.at(i, j) = dv.x;
      b.v2.at(i, j) = dv.y;
      b.rate.at(i, j) = vv - rho.dot(dv);
      Mat2 d2v = fd_hessian_richardson(vf, rho, 10 * dv_step);
      Mat2 d2h = h0.hessian(i, j);
      max_rate = std::max(max_rate, (d2v * d2h).spectral_radius());
    }
  }
  b.t_max = max_rate > 0 ? 0.5 / max_rate
                         : std::numeric_limits<double>::infinity();
  return b;
}

/// Preimage of y under the forward map x -> x - t Dv(rho0(x)), by fixed-point
/// iteration on the bicubic velocity field. nullopt when the iteration needs
/// data outside the valid grid.
inline std::optional<Vec2> characteristic_foot(const CharacteristicBundle& b,
                                               Vec2 y, double t) {
  Vec2 x = y;
  for (int it = 0; it < 80; it++) {
    auto u1 = bicubic(b.v1, x), u2 = bicubic(b.v2, x);
    if (!u1 || !u2) return std::nullopt;
    Vec2 xn{y.x + t * *u1, y.y + t * *u2};
    if ((xn - x).norm() < 1e-13 * (1.0 + xn.norm())) return xn;
    x = xn;
  }
  return std::nullopt;
}

struct CharOptions {
  double dv_step = 1e-4;
  bool check_crossing = true;
};

/// Height at time t by characteristic transport, resampled onto the grid of
/// h0 (bicubic). Nodes whose preimage leaves the data are masked.
inline HeightField evolve_characteristics(const HeightField& h0,
                                          const SpeedFunction& v, double t,
                                          const CharOptions& opts = {}) {
  CharacteristicBundle b = characteristic_bundle(h0, v, opts.dv_step);
  if (t < 0 || !(t < b.t_max))
    throw CrossingError("evolve_characteristics: t outside [0, t_max)");

  if (opts.check_crossing && t > 0) {
    // forward-map Jacobian I - t dV/dx must keep positive determinant
    const GridGeom& g = h0.geom;
    for (int j = 2; j + 2 < g.n2; j++)
      for (int i = 2; i + 2 < g.n1; i++) {
        bool ok = b.v1.valid(i - 1, j) && b.v1.valid(i + 1, j) &&
                  b.v1.valid(i, j - 1) && b.v1.valid(i, j + 1);
        if (!ok) continue;
        double a11 = (b.v1.at(i + 1, j) - b.v1.at(i - 1, j)) / (2 * g.spacing.x);
        double a12 = (b.v1.at(i, j + 1) - b.v1.at(i, j - 1)) / (2 * g.spacing.y);
        double a21 = (b.v2.at(i + 1, j) - b.v2.at(i - 1, j)) / (2 * g.spacing.x);
        double a22 = (b.v2.at(i, j + 1) - b.v2.at(i, j - 1)) / (2 * g.spacing.y);
        Mat2 J{1 - t * a11, -t * a12, -t * a21, 1 - t * a22};
        if (J.det() <= 0)
          throw CrossingError("evolve_characteristics: characteristics cross "
                              "before the requested time");
      }
  }

  HeightField out(h0.geom);
  for (int j = 0; j < h0.geom.n2; j++)
    for (int i = 0; i < h0.geom.n1; i++) {
      Vec2 y = h0.geom.coord(i, j);
      auto x = characteristic_foot(b, y, t);
      if (!x) {
        out.flag(i, j) = kMasked;
        continue;
      }
      auto base = bicubic(static_cast<const Field<double>&>(h0), *x);
      auto rate = bicubic(b.rate, *x);
      if (!base || !rate) {
        out.flag(i, j) = kMasked;
        continue;
      }
      out.at(i, j) = *base + t * *rate;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Vanishing-viscosity solver: dh/dt = v(grad h) + nu Laplacian h, explicit
// two-stage (Heun) stepping, boundary ring advancing at its initial slope's
// speed (Dirichlet values consistent with short-time characteristic flow).

struct ViscousOptions {
  double margin = 0.005;  // slopes must stay this liquid
  double dv_step = 1e-4;
};

class ViscousEvolution {
 public:
  ViscousEvolution(const HeightField& h0, const SpeedFunction& v, double nu,
                   double dt, const ViscousOptions& opts = {})
      : h_(h0), h0_(h0), v_(&v), nu_(nu), dt_(dt), opts_(opts) {
    const GridGeom& g = h0.geom;
    double dx = std::min(g.spacing.x, g.spacing.y);
    if (v.is_z_composed()) {
      gate_ = v.model();
    } else {
      // slope-native speeds carry no lattice; gate liquidity by the polygon
      // containing the initial centre slope
      Vec2 rho = h0.gradient(g.n1 / 2, g.n2 / 2);
      gate_ = (rho.x + rho.y < 1.0) ? honeycomb() : square_grid();
    }
    // ring speeds from the nearest interior slope
    ring_speed_ = Field<double>(g);
    double max_dv = 0;
    auto vf = [&](Vec2 x) { return (*v_)(Slope{x.x, x.y}); };
    for (int j = 0; j < g.n2; j++)
      for (int i = 0; i < g.n1; i++) {
        int ii = std::min(std::max(i, 1), g.n1 - 2);
        int jj = std::min(std::max(j, 1), g.n2 - 2);
        Vec2 rho = h0.gradient(ii, jj);
        if (g.on_ring(i, j)) ring_speed_.at(i, j) = vf(rho);
        max_dv = std::max(max_dv,
                          fd_gradient(vf, rho, opts.dv_step).norm());
      }
    double bound = dx / (2 * max_dv);
    if (nu_ > 0) bound = std::min(bound, dx * dx / (4 * nu_));
    if (dt_ <= 0) dt_ = 0.45 * bound;
    if (dt_ > bound)
      throw CflError("evolve_viscous: dt exceeds the stability bound " +
                     std::to_string(bound));
  }

  double time() const { return t_; }
  double dt() const { return dt_; }
  const HeightField& field() const { return h_; }

  void advance_to(double T) {
    while (t_ < T - 1e-14) {
      double step = std::min(dt_, T - t_);
      do_step(step);
    }
  }

 private:
  void rhs(const HeightField& h, std::vector<double>& k) const {
    const GridGeom& g = h.geom;
    for (int j = 1; j + 1 < g.n2; j++)
      for (int i = 1; i + 1 < g.n1; i++) {
        Vec2 rho = h.gradient(i, j);
        if (!is_liquid(gate_, Slope{rho.x, rho.y}, opts_.margin))
          throw DomainError("evolve_viscous: slope left the liquid region");
        double lap =
            (h.at(i + 1, j) - 2 * h.at(i, j) + h.at(i - 1, j)) /
                (g.spacing.x * g.spacing.x) +
            (h.at(i, j + 1) - 2 * h.at(i, j) + h.at(i, j - 1)) /
                (g.spacing.y * g.spacing.y);
        k[g.idx(i, j)] = (*v_)(Slope{rho.x, rho.y}) + nu_ * lap;
      }
  }

  void set_ring(HeightField& h, double t) const {
    const GridGeom& g = h.geom;
    for (int j = 0; j < g.n2; j++)
      for (int i = 0; i < g.n1; i++)
        if (g.on_ring(i, j))
          h.at(i, j) = h0_.at(i, j) + t * ring_speed_.at(i, j);
  }

  void do_step(double step) {
    const GridGeom& g = h_.geom;
    std::vector<double> k1(g.size(), 0.0), k2(g.size(), 0.0);
    rhs(h_, k1);
    HeightField mid = h_;
    for (int j = 1; j + 1 < g.n2; j++)
      for (int i = 1; i + 1 < g.n1; i++)
        mid.at(i, j) = h_.at(i, j) + step * k1[g.idx(i, j)];
    set_ring(mid, t_ + step);
    rhs(mid, k2);
    for (int j = 1; j + 1 < g.n2; j++)
      for (int i = 1; i + 1 < g.n1; i++)
        h_.at(i, j) += 0.5 * step * (k1[g.idx(i, j)] + k2[g.idx(i, j)]);
    t_ += step;
    set_ring(h_, t_);
  }

  HeightField h_, h0_;
  const SpeedFunction* v_;
  double nu_, dt_, t_ = 0;
  ViscousOptions opts_;
  Field<double> ring_speed_;
  DimerModel gate_;
};

inline HeightField evolve_viscous(const HeightField& h0,
                                  const SpeedFunction& v, double nu, double dt,
                                  double T, const ViscousOptions& opts = {}) {
  ViscousEvolution ev(h0, v, nu, dt, opts);
  ev.advance_to(T);
  return ev.field();
}

// ---------------------------------------------------------------------------
// Probes for the preservation identities.

/// z field induced by the discrete slopes of h.
inline ComplexField zfield_from_height(const HeightField& h,
                                       const DimerModel& m,
                                       double margin = 1e-9) {
  ComplexField zf(h.geom);
  for (int j = 0; j < h.geom.n2; j++)
    for (int i = 0; i < h.geom.n1; i++) {
      if (!h.stencil_ok(i, j)) {
        zf.flag(i, j) = kMasked;
        continue;
      }
      Vec2 rho = h.gradient(i, j);
      zf.at(i, j) = z_from_slope(m, Slope{rho.x, rho.y}, {.margin = margin});
    }
  zf.branch_consistent = true;
  for (int j = 0; j < h.geom.n2; j++)
    for (int i = 0; i + 1 < h.geom.n1; i++)
      if (zf.valid(i, j) && zf.valid(i + 1, j) &&
          std::fabs(std::arg(zf.at(i + 1, j) / zf.at(i, j))) >= kPi / 2)
        zf.branch_consistent = false;
  return zf;
}

/// R(x) = sum_lk D2v_lk A_lk with A = D2h Sigma D2h; zero along preserved
/// Euler-Lagrange flows.
inline double R_probe(const HeightField& h, const SpeedFunction& v,
                      const DimerModel& m, int i, int j,
                      double d2v_step = 1e-3) {
  if (!h.stencil_ok(i, j)) throw DomainError("R_probe: probe not interior");
  Vec2 rho = h.gradient(i, j);
  Mat2 Hh = h.hessian(i, j);
  SlopeMapTension tension(m);
  Mat2 S = tension.hessian(Slope{rho.x, rho.y});
  Mat2 A = Hh * S * Hh;
  Mat2 d2v = speed_hessian(v, Slope{rho.x, rho.y}, d2v_step);
  return frobenius_dot(d2v, A);
}

/// Right side of the Delta evolution identity
///   dDelta/dt = (a+b) Delta + w z (a_x1 + b_x2)
///             + 2 i pi (z_x2 - z_x1) Delta df/dz
///             - pi z w (Im z_x2 Re z_x1 - Re z_x2 Im z_x1) Lap f,
/// with a, b linear in Delta through (Delta/z) z'(w) dlog w/drho.
inline Field<cplx> delta_rate(const ComplexField& zf, const SpeedFunction& v,
                              const DimerModel& m) {
  if (!v.is_z_composed())
    throw DomainError("delta_rate: speed has no z-plane representation");
  const GridGeom& g = zf.geom;
  LaurentPoly Pz = m.P.dz(), Pw = m.P.dw();
  Field<cplx> delta = burgers_residual(zf, m);
  Field<double> a(g), b(g);
  Field<cplx> out(g);

  for (int j = 0; j < g.n2; j++)
    for (int i = 0; i < g.n1; i++) {
      if (!zf.stencil_ok(i, j) || !delta.valid(i, j)) {
        a.flag(i, j) = kMasked;
        b.flag(i, j) = kMasked;
        continue;
      }
      cplx z = zf.at(i, j), w = solve_w(m, z);
      cplx zprime_w = -Pw.eval(z, w) / Pz.eval(z, w);
      Slope rho = slope_from_z(m, z);
      auto logw_abs = [&](Vec2 r) {
        cplx zz = z_from_slope(m, Slope{r.x, r.y}, {.margin = 1e-9});
        return std::log(std::abs(solve_w(m, zz)));
      };
      Vec2 gw = fd_gradient(logw_abs, rho.vec(), 1e-5);
      cplx Lw1(gw.x, -kPi);  // dlog w / drho1: arg w = -pi rho1 exactly
      cplx Lw2(gw.y, 0.0);
      double hf = std::min(1e-4, z.imag() / 8);
      double fre = (v.f(z + hf) - v.f(z - hf)) / (2 * hf);
      double fim = (v.f(z + cplx(0, hf)) - v.f(z - cplx(0, hf))) / (2 * hf);
      cplx core = (delta.at(i, j) / z) * zprime_w;
      a.at(i, j) = fre * (core * Lw1).real() + fim * (core * Lw1).imag();
      b.at(i, j) = fre * (core * Lw2).real() + fim * (core * Lw2).imag();
    }

  for (int j = 0; j < g.n2; j++)
    for (int i = 0; i < g.n1; i++) {
      bool ok = a.valid(i, j) && i >= 1 && j >= 1 && i + 1 < g.n1 &&
                j + 1 < g.n2 && a.valid(i - 1, j) && a.valid(i + 1, j) &&
                b.valid(i, j - 1) && b.valid(i, j + 1);
      if (!ok) {
        out.flag(i, j) = kMasked;
        continue;
      }
      cplx z = zf.at(i, j), w = solve_w(m, z);
      cplx zx1 = zf.dx1(i, j), zx2 = zf.dx2(i, j);
      double hf = std::min(1e-4, z.imag() / 8);
      double fre = (v.f(z + hf) - v.f(z - hf)) / (2 * hf);
      double fim = (v.f(z + cplx(0, hf)) - v.f(z - cplx(0, hf))) / (2 * hf);
      cplx df_dz = 0.5 * cplx(fre, -fim);
      double lapf = laplacian_f(v, z, hf);
      double ax1 = (a.at(i + 1, j) - a.at(i - 1, j)) / (2 * g.spacing.x);
      double bx2 = (b.at(i, j + 1) - b.at(i, j - 1)) / (2 * g.spacing.y);
      cplx D = delta.at(i, j);
      out.at(i, j) =
          (a.at(i, j) + b.at(i, j)) * D + w * z * (ax1 + bx2) +
          cplx(0, 2 * kPi) * (zx2 - zx1) * D * df_dz -
          kPi * z * w *
              (zx2.imag() * zx1.real() - zx2.real() * zx1.imag()) * lapf;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Orchestration: evolve a shape, record residual maxima and probe values.

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> max_el;
  std::vector<double> max_delta;
  std::vector<double> r_probe;
  std::vector<cplx> delta_rate_probe;
  std::vector<cplx> fd_delta_rate_probe;  // NaN when not computed
  double t_max = 0;
  bool t_max_binding = false;
  int probe_i = 0, probe_j = 0;
};

struct PreservationConfig {
  std::string model = "honeycomb";
  std::string speed = "im-z";
  std::string shape = "burgers";  // "burgers" or "affine:<r1,r2>"
  cplx C_const{0, 1};
  GridGeom window;   // report window; computation pads it internally
  double T = -1;     // <= 0: 0.8 * t_max
  std::string solver = "char";
  double nu = -1;    // < 0: 4 dx^2
  double dt = -1;    // <= 0: auto
  int output_times = 5;
  double margin = 0.02;
};

/// Default report windows where the constant-C Burgers family is comfortably
/// liquid.
inline GridGeom default_window(const std::string& model, int n = 65) {
  GridGeom g;
  g.n1 = g.n2 = n;
  if (model == "honeycomb") {
    g.origin = {0.85, -0.25};
  } else {
    g.origin = {-1.35, 0.35};
  }
  g.spacing = {0.5 / (n - 1), 0.5 / (n - 1)};
  return g;
}

/// Deterministic seed search for the implicit family at a grid origin.
inline cplx find_burgers_seed(const DimerModel& m, const AnalyticFn& C,
                              Vec2 x0) {
  detail::CharSlope cs(m);
  auto phi = [&](cplx z) {
    cplx w = solve_w(m, z);
    return x0.y - cs.g(z, w) * x0.x - C.f(z);
  };
  auto dphi = [&](cplx z) {
    cplx w = solve_w(m, z);
    return -cs.dg(z, w) * x0.x - C.df(z);
  };
  const cplx starts[] = {{0, 1},     {0.5, 1},  {-0.5, 1}, {0, 2},
                         {1, 1},     {-1, 1},   {0, 0.5},  {0.5, 0.5},
                         {-0.5, 0.5}, {1.5, 0.5}, {-1.5, 0.5}, {0, 3}};
  for (cplx z : starts) {
    bool ok = true;
    for (int it = 0; it < 60; it++) {
      cplx r = phi(z);
      if (std::abs(r) < 1e-13) break;
      cplx d = dphi(z);
      if (std::abs(d) < 1e-14) {
        ok = false;
        break;
      }
      z -= r / d;
      if (!(z.imag() > 0)) {
        ok = false;
        break;
      }
      if (it == 59) ok = false;
    }
    if (ok && z.imag() > 0 && std::abs(phi(z)) < 1e-12) return z;
  }
  throw ConvergenceError("find_burgers_seed: no admissible seed found");
}

struct ExperimentResult {
  EvolutionTrace trace_char;
  EvolutionTrace trace_viscous;
  double solver_difference = 0;  // max |char - viscous| over the window at T
  double T = 0;
  HeightField initial;            // on the padded grid
  HeightField final_char;
  HeightField final_viscous;
  GridGeom window;
};

namespace detail {

inline void window_bounds(const GridGeom& padded, const GridGeom& window,
                          int& i0, int& i1, int& j0, int& j1) {
  i0 = int(std::lround((window.origin.x - padded.origin.x) / padded.spacing.x));
  j0 = int(std::lround((window.origin.y - padded.origin.y) / padded.spacing.y));
  i1 = i0 + window.n1 - 1;
  j1 = j0 + window.n2 - 1;
}

inline void record_time(EvolutionTrace& tr, const HeightField& h,
                        const SpeedFunction& v, const DimerModel& m,
                        const GridGeom& window, double t, double margin) {
  const GridGeom& g = h.geom;
  int i0, i1, j0, j1;
  window_bounds(g, window, i0, i1, j0, j1);
  ResidualField rf = el_residual(h, m, {.margin = margin});
  ComplexField zf = zfield_from_height(h, m);
  Field<cplx> delta = burgers_residual(zf, m);
  double mel = 0, mdelta = 0;
  for (int j = j0; j <= j1; j++)
    for (int i = i0; i <= i1; i++) {
      if (rf.el.valid(i, j)) mel = std::max(mel, std::fabs(rf.el.at(i, j)));
      if (delta.valid(i, j))
        mdelta = std::max(mdelta, std::abs(delta.at(i, j)));
    }
  int pi = (i0 + i1) / 2, pj = (j0 + j1) / 2;
  tr.times.push_back(t);
  tr.max_el.push_back(mel);
  tr.max_delta.push_back(mdelta);
  tr.r_probe.push_back(R_probe(h, v, m, pi, pj));
  cplx rate_probe(NAN, NAN);
  if (v.is_z_composed()) {
    Field<cplx> rate = delta_rate(zf, v, m);
    if (rate.valid(pi, pj)) rate_probe = rate.at(pi, pj);
  }
  tr.delta_rate_probe.push_back(rate_probe);
  tr.probe_i = pi;
  tr.probe_j = pj;
}

}  // namespace detail

inline ExperimentResult run_preservation_experiment(
    const PreservationConfig& cfg) {
  DimerModel m = model_by_name(cfg.model);
  GridGeom window = cfg.window.n1 > 0 ? cfg.window : default_window(cfg.model);
  SpeedFunction v = speed_preset(cfg.speed, m);

  // build the initial shape on the window first to size the padding
  auto build = [&](const GridGeom& g) -> HeightField {
    if (cfg.shape == "burgers") {
      AnalyticFn C = const_fn(cfg.C_const);
      cplx seed = find_burgers_seed(m, C, g.coord(0, 0));
      ComplexField zf = solve_burgers_implicit(m, C, g, seed);
      return height_from_zfield(m, zf);
    }
    double r1, r2;
    if (std::sscanf(cfg.shape.c_str(), "affine:%lf,%lf", &r1, &r2) != 2)
      throw DomainError("unknown shape recipe '" + cfg.shape + "'");
    HeightField h(g);
    for (int j = 0; j < g.n2; j++)
      for (int i = 0; i < g.n1; i++) {
        Vec2 x = g.coord(i, j);
        h.at(i, j) = r1 * x.x + r2 * x.y;
      }
    return h;
  };

  HeightField probe_field = build(window);
  CharacteristicBundle probe_bundle = characteristic_bundle(probe_field, v);
  double T = cfg.T > 0 ? std::min(cfg.T, 0.8 * probe_bundle.t_max)
                       : 0.8 * probe_bundle.t_max;
  bool binding = !(cfg.T > 0) || cfg.T > 0.8 * probe_bundle.t_max;

  double max_v = 0;
  for (int k = 0; k < window.size(); k++)
    if (probe_bundle.v1.flags[k] != kMasked)
      max_v = std::max(max_v, std::hypot(probe_bundle.v1.values[k],
                                         probe_bundle.v2.values[k]));
  int pad = int(std::ceil(1.2 * T * max_v / window.spacing.x)) + 4;

  GridGeom padded = window;
  padded.n1 = window.n1 + 2 * pad;
  padded.n2 = window.n2 + 2 * pad;
  padded.origin = {window.origin.x - pad * window.spacing.x,
                   window.origin.y - pad * window.spacing.y};
  HeightField h0 = build(padded);

  ExperimentResult res;
  res.T = T;
  res.window = window;
  res.initial = h0;

  std::vector<double> times(std::max(2, cfg.output_times));
  for (size_t k = 0; k < times.size(); k++)
    times[k] = T * double(k) / double(times.size() - 1);

  bool want_char = cfg.solver == "char" || cfg.solver == "both";
  bool want_visc = cfg.solver == "viscous" || cfg.solver == "both";

  if (want_char) {
    res.trace_char.t_max = probe_bundle.t_max;
    res.trace_char.t_max_binding = binding;
    for (double t : times) {
      HeightField ht = evolve_characteristics(h0, v, t);
      detail::record_time(res.trace_char, ht, v, m, window, t, cfg.margin);
      // finite-difference time derivative of Delta at the probe
      double dtt = std::max(1e-6, 1e-3 * (T > 0 ? T : 1.0));
      if (t + dtt < probe_bundle.t_max) {
        HeightField hp = evolve_characteristics(h0, v, t + dtt);
        ComplexField zt = zfield_from_height(ht, m);
        ComplexField zp = zfield_from_height(hp, m);
        Field<cplx> dt0 = burgers_residual(zt, m);
        Field<cplx> dt1 = burgers_residual(zp, m);
        int pi = res.trace_char.probe_i, pj = res.trace_char.probe_j;
        res.trace_char.fd_delta_rate_probe.push_back(
            dt0.valid(pi, pj) && dt1.valid(pi, pj)
                ? (dt1.at(pi, pj) - dt0.at(pi, pj)) / dtt
                : cplx(NAN, NAN));
      } else {
        res.trace_char.fd_delta_rate_probe.push_back(cplx(NAN, NAN));
      }
      if (t == times.back()) res.final_char = ht;
    }
  }

  if (want_visc) {
    double dx = padded.spacing.x;
    double nu = cfg.nu >= 0 ? cfg.nu : 4 * dx * dx;
    ViscousEvolution ev(h0, v, nu, cfg.dt, {.margin = cfg.margin / 4});
    res.trace_viscous.t_max = probe_bundle.t_max;
    res.trace_viscous.t_max_binding = binding;
    for (double t : times) {
      ev.advance_to(t);
      detail::record_time(res.trace_viscous, ev.field(), v, m, window, t,
                          cfg.margin);
      res.trace_viscous.fd_delta_rate_probe.push_back(cplx(NAN, NAN));
      if (t == times.back()) res.final_viscous = ev.field();
    }
  }

  if (want_char && want_visc) {
    int i0, i1, j0, j1;
    detail::window_bounds(padded, window, i0, i1, j0, j1);
    double diff = 0;
    for (int j = j0; j <= j1; j++)
      for (int i = i0; i <= i1; i++)
        if (res.final_char.valid(i, j) && res.final_viscous.valid(i, j))
          diff = std::max(diff, std::fabs(res.final_char.at(i, j) -
                                          res.final_viscous.at(i, j)));
    res.solver_difference = diff;
  }
  return res;
}

}  // namespace akpz
