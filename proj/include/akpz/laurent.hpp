#pragma once

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "akpz/common.hpp"

namespace akpz {

/// Real-coefficient Laurent polynomial P(z,w) = sum c_{ab} z^a w^b.
/// Exponents may be negative; evaluation requires z,w != 0.
class LaurentPoly {
 public:
  LaurentPoly() = default;
  explicit LaurentPoly(std::map<std::pair<int, int>, double> coeffs)
      : coeffs_(std::move(coeffs)) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();)
      it = (it->second == 0.0) ? coeffs_.erase(it) : std::next(it);
  }

  const std::map<std::pair<int, int>, double>& coefficients() const {
    return coeffs_;
  }

  cplx eval(cplx z, cplx w) const {
    if (z == 0.0 || w == 0.0)
      throw DomainError("LaurentPoly::eval: z and w must be nonzero");
    cplx acc = 0;
    for (const auto& [e, c] : coeffs_) acc += c * ipow(z, e.first) * ipow(w, e.second);
    return acc;
  }

  LaurentPoly dz() const {
    std::map<std::pair<int, int>, double> d;
    for (const auto& [e, c] : coeffs_)
      if (e.first != 0) d[{e.first - 1, e.second}] += c * e.first;
    return LaurentPoly(std::move(d));
  }

  LaurentPoly dw() const {
    std::map<std::pair<int, int>, double> d;
    for (const auto& [e, c] : coeffs_)
      if (e.second != 0) d[{e.first, e.second - 1}] += c * e.second;
    return LaurentPoly(std::move(d));
  }

  /// Multiply by z^s w^t so that all exponents are >= 0, then collect the
  /// result as a polynomial in w with z-polynomial coefficients.
  /// Returns coefficient list indexed by w-degree.
  std::vector<std::map<int, double>> as_poly_in_w() const {
    int s = 0, t = 0;
    for (const auto& [e, c] : coeffs_) {
      s = std::min(s, e.first);
      t = std::min(t, e.second);
    }
    int maxw = 0;
    for (const auto& [e, c] : coeffs_) maxw = std::max(maxw, e.second - t);
    std::vector<std::map<int, double>> out(maxw + 1);
    for (const auto& [e, c] : coeffs_) out[e.second - t][e.first - s] += c;
    return out;
  }

  // upper bound for |d/dtheta P| on the torus |z|=e^{B1}, |w|=e^{B2}
  double angular_gradient_bound(Vec2 B) const {
    double g = 0;
    for (const auto& [e, c] : coeffs_)
      g += std::fabs(c) * (std::abs(e.first) + std::abs(e.second)) *
           std::exp(e.first * B.x + e.second * B.y);
    return g;
  }

  static cplx ipow(cplx base, int e) {
    if (e == 0) return 1.0;
    cplx b = e > 0 ? base : 1.0 / base;
    int n = e > 0 ? e : -e;
    cplx acc = 1.0;
    while (n) {
      if (n & 1) acc *= b;
      b *= b;
      n >>= 1;
    }
    return acc;
  }

 private:
  std::map<std::pair<int, int>, double> coeffs_;
};

}  // namespace akpz
