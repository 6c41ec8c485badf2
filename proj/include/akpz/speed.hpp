#pragma once

#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "akpz/common.hpp"
#include "akpz/dimer.hpp"
#include "akpz/fd.hpp"

namespace akpz {

/// Growth speed v(rho): either given directly on slopes, or as f(z(rho))
/// through a model's slope map.
class SpeedFunction {
 public:
  static SpeedFunction slope_native(std::function<double(const Slope&)> v,
                                    std::string name = "native") {
    SpeedFunction s;
    s.native_ = std::move(v);
    s.name_ = std::move(name);
    return s;
  }

  /// f is a black box on the upper half plane. When claimed_harmonic is set,
  /// the claim is still checked numerically on a 5x5 sample box.
  static SpeedFunction z_composed(std::function<double(cplx)> f,
                                  DimerModel model, bool claimed_harmonic,
                                  std::string name = "z-composed") {
    SpeedFunction s;
    s.f_ = std::move(f);
    s.model_ = std::make_shared<DimerModel>(std::move(model));
    s.claimed_harmonic_ = claimed_harmonic;
    s.name_ = std::move(name);
    if (claimed_harmonic) s.verify_harmonic_claim();
    return s;
  }

  bool is_z_composed() const { return static_cast<bool>(f_); }
  bool claimed_harmonic() const { return claimed_harmonic_; }
  const DimerModel& model() const { return *model_; }
  const std::string& name() const { return name_; }

  double f(cplx z) const { return f_(z); }

  double operator()(const Slope& rho) const {
    if (native_) return native_(rho);
    return f_(z_from_slope(*model_, rho, {.margin = 1e-9}));
  }

 private:
  void verify_harmonic_claim() const {
    for (int i = 0; i < 5; i++) {
      for (int j = 0; j < 5; j++) {
        cplx z(-1.0 + 0.5 * i, 0.5 + 0.25 * j);
        double lap = five_point_laplacian(f_, z, 1e-4);
        double scale = std::max(1.0, std::fabs(f_(z)));
        if (std::fabs(lap) > 1e-6 * scale)
          throw DomainError("SpeedFunction: speed declared harmonic but "
                            "its Laplacian is nonzero");
      }
    }
  }

  static double five_point_laplacian(const std::function<double(cplx)>& f,
                                     cplx z, double h) {
    return (f(z + h) + f(z - h) + f(z + cplx(0, h)) + f(z - cplx(0, h)) -
            4.0 * f(z)) /
           (h * h);
  }

  std::function<double(const Slope&)> native_;
  std::function<double(cplx)> f_;
  std::shared_ptr<DimerModel> model_;
  bool claimed_harmonic_ = false;
  std::string name_;

  friend double laplacian_f(const SpeedFunction&, cplx, double);
};

inline double speed_eval(const SpeedFunction& v, const Slope& rho) {
  return v(rho);
}

/// Five-point finite-difference Laplacian of the z-plane speed at z.
inline double laplacian_f(const SpeedFunction& v, cplx z, double step) {
  if (!v.is_z_composed())
    throw DomainError("laplacian_f: speed has no z-plane representation");
  if (!(z.imag() > 0) || step >= z.imag() / 4)
    throw DomainError("laplacian_f: need z in H and step < Im z / 4");
  return SpeedFunction::five_point_laplacian(v.f_, z, step);
}

/// Symmetrized central-difference Hessian of v on slopes, Richardson
/// extrapolated. z-composed speeds are differentiated through rho, i.e.
/// finite differences of v(z_from_slope(.)).
inline Mat2 speed_hessian(const SpeedFunction& v, const Slope& rho,
                          double step = 1e-3) {
  auto f = [&](Vec2 x) { return v(Slope{x.x, x.y}); };
  return fd_hessian_richardson(f, rho.vec(), step).symmetrized();
}

enum class AkpzLabel { AKPZ, ISOTROPIC, DEGENERATE };

inline const char* to_string(AkpzLabel l) {
  switch (l) {
    case AkpzLabel::AKPZ: return "AKPZ";
    case AkpzLabel::ISOTROPIC: return "ISOTROPIC";
    default: return "DEGENERATE";
  }
}

struct AkpzClassification {
  Slope rho;
  double v = 0;
  Mat2 hessian;
  double det = 0;
  double tau = 0;  // degeneracy band actually used
  AkpzLabel label = AkpzLabel::DEGENERATE;
};

/// Sign classification of det D^2 v with a tolerance band: finite differences
/// cannot certify det = 0, so |det| <= tau reads as DEGENERATE.
/// tau <= 0 selects the default band 1e-6 * max(1, |D^2 v|_F^2).
inline AkpzClassification akpz_classify(const SpeedFunction& v,
                                        const Slope& rho, double tau = -1,
                                        double step = 1e-3) {
  AkpzClassification c;
  c.rho = rho;
  c.v = v(rho);
  c.hessian = speed_hessian(v, rho, step);
  c.det = c.hessian.det();
  double fro = c.hessian.frobenius();
  c.tau = tau > 0 ? tau : 1e-6 * std::max(1.0, fro * fro);
  c.label = c.det > c.tau    ? AkpzLabel::ISOTROPIC
            : c.det < -c.tau ? AkpzLabel::AKPZ
                             : AkpzLabel::DEGENERATE;
  return c;
}

/// Classification at every lattice point (i/res, j/res) in the margin-delta
/// liquid interior of the model's polygon, in lexicographic slope order.
inline std::vector<AkpzClassification> akpz_map(const SpeedFunction& v,
                                                const DimerModel& m,
                                                int resolution, double delta,
                                                double tau = -1) {
  std::vector<AkpzClassification> rows;
  int lo = 0, hi = 0;
  for (const auto& vert : m.polygon.vertices()) {
    lo = std::min({lo, vert[0], vert[1]});
    hi = std::max({hi, vert[0], vert[1]});
  }
  for (int i = lo * resolution; i <= hi * resolution; i++) {
    for (int j = lo * resolution; j <= hi * resolution; j++) {
      Slope rho{double(i) / resolution, double(j) / resolution};
      if (!is_liquid(m, rho, delta)) continue;
      rows.push_back(akpz_classify(v, rho, tau));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Named speed presets used by the CLI and the experiments.

inline SpeedFunction speed_preset(const std::string& name,
                                  const DimerModel& model) {
  auto im_z = [](cplx z) { return z.imag(); };
  if (name == "im-z")
    return SpeedFunction::z_composed(im_z, model, true, name);
  if (name == "cft-domino")
    return SpeedFunction::z_composed([](cplx z) { return z.imag() / kPi; },
                                     model, true, name);
  if (name == "re-z")
    return SpeedFunction::z_composed([](cplx z) { return z.real(); }, model,
                                     true, name);
  if (name == "im-log-z")
    return SpeedFunction::z_composed([](cplx z) { return std::arg(z); }, model,
                                     true, name);
  if (name == "re-z2")
    return SpeedFunction::z_composed([](cplx z) { return (z * z).real(); },
                                     model, true, name);
  if (name == "mod2-z")
    return SpeedFunction::z_composed([](cplx z) { return std::norm(z); },
                                     model, false, name);
  if (name.rfind("quadratic:", 0) == 0) {
    std::string body = name.substr(10);
    double a, b, c;
    if (std::sscanf(body.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
      throw DomainError("speed preset: expected quadratic:<a,b,c>");
    return SpeedFunction::slope_native(
        [a, b, c](const Slope& r) {
          return a * r.r1 * r.r1 + b * r.r1 * r.r2 + c * r.r2 * r.r2;
        },
        name);
  }
  throw DomainError("unknown speed preset '" + name + "'");
}

}  // namespace akpz
