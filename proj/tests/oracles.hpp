// Test-only oracles, independent of the library's computation paths.
#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace oracles {

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

template <size_t N>
struct Gauss {
  std::array<double, N> x{}, w{};  // nodes/weights on [-1, 1]
  Gauss() {
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
      x[i] = t;
      w[i] = 2.0 / ((1 - t * t) * dp * dp);
    }
  }
};

}  // namespace detail

/// Lobachevsky function Lambda(x) = -int_0^x log|2 sin t| dt.
/// The log(2t) part integrates in closed form; the remainder is smooth.
inline double lobachevsky(double x) {
  if (x == 0) return 0;
  double sign = x < 0 ? -1 : 1;
  x = std::fabs(x);
  static const detail::Gauss<64> G;
  double head = -x * (std::log(2 * x) - 1.0);
  double tail = 0;
  for (size_t i = 0; i < 64; i++) {
    double t = 0.5 * x * (G.x[i] + 1.0);
    double g = (t < 1e-8) ? -t * t / 6.0 : std::log(std::fabs(std::sin(t)) / t);
    tail += G.w[i] * g;
  }
  tail *= 0.5 * x;
  return sign * (head - tail);
}

/// Closed-form honeycomb surface tension (lozenge tilings).
inline double sigma_honeycomb(double r1, double r2) {
  double r3 = 1 - r1 - r2;
  return -(lobachevsky(kPi * r1) + lobachevsky(kPi * r2) +
           lobachevsky(kPi * r3)) /
         kPi;
}

/// Its exact Hessian: s11 = pi (cot pi r1 + cot pi r3), s12 = pi cot pi r3.
inline std::array<double, 3> sigma_honeycomb_hessian(double r1, double r2) {
  double r3 = 1 - r1 - r2;
  auto cot = [](double t) { return std::cos(t) / std::sin(t); };
  double c1 = cot(kPi * r1), c2 = cot(kPi * r2), c3 = cot(kPi * r3);
  return {kPi * (c1 + c3), kPi * c3, kPi * (c2 + c3)};
}

/// Square-grid Ronkin value at B = (0,0), frozen from a 4096/8192 midpoint
/// quadrature with Richardson extrapolation (matches 2*Catalan/pi).
inline constexpr double kSquareRonkinOrigin = 0.583121808061642;

}  // namespace oracles
