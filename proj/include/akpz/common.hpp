#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace akpz {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors. Every failure mode surfaces as a typed exception so callers can
// distinguish bad input from numerical breakdown.

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

// quadrature node too close to a zero of P after maximal refinement
struct NearZeroError : Error {
  using Error::Error;
};

struct CurlError : Error {
  using Error::Error;
};

struct CrossingError : Error {
  using Error::Error;
};

struct CflError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small fixed-size linear algebra. 2x2 is all this project ever needs.

struct Vec2 {
  double x = 0, y = 0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// symmetric storage is not enforced; callers symmetrize where it matters
struct Mat2 {
  double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

  static Mat2 identity() { return {1, 0, 0, 1}; }

  double det() const { return a11 * a22 - a12 * a21; }
  double trace() const { return a11 + a22; }
  double frobenius() const {
    return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
  }

  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  Mat2 symmetrized() const {
    double off = 0.5 * (a12 + a21);
    return {a11, off, off, a22};
  }

  Vec2 apply(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }

  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }

  Mat2 operator+(const Mat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
  }

  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }

  // eigenvalues of the symmetrized matrix, ascending
  std::array<double, 2> sym_eigenvalues() const {
    double m = 0.5 * (a11 + a22);
    double off = 0.5 * (a12 + a21);
    double d = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + off * off);
    return {m - d, m + d};
  }

  Vec2 solve(const Vec2& rhs) const {
    double d = det();
    if (std::fabs(d) < 1e-300) throw ConvergenceError("singular 2x2 solve");
    return {(a22 * rhs.x - a12 * rhs.y) / d, (a11 * rhs.y - a21 * rhs.x) / d};
  }

  // largest |eigenvalue| of a general 2x2 (used for time-horizon estimates)
  double spectral_radius() const {
    double tr = trace(), de = det();
    cplx disc = std::sqrt(cplx(tr * tr - 4 * de, 0));
    return std::max(std::abs((tr + disc) / 2.0), std::abs((tr - disc) / 2.0));
  }
};

// Frobenius inner product <A,B> = sum_ij A_ij B_ij
inline double frobenius_dot(const Mat2& a, const Mat2& b) {
  return a.a11 * b.a11 + a.a12 * b.a12 + a.a21 * b.a21 + a.a22 * b.a22;
}

}  // namespace akpz
