#pragma once

#include <functional>

#include "akpz/common.hpp"

namespace akpz {

// Central-difference derivatives of scalar functions on R^2, with optional
// Richardson extrapolation (steps h and h/2) to cancel the O(h^2) term.

template <class F>
Vec2 fd_gradient(F&& f, Vec2 x, double h) {
  return {(f(Vec2{x.x + h, x.y}) - f(Vec2{x.x - h, x.y})) / (2 * h),
          (f(Vec2{x.x, x.y + h}) - f(Vec2{x.x, x.y - h})) / (2 * h)};
}

template <class F>
Vec2 fd_gradient_richardson(F&& f, Vec2 x, double h) {
  Vec2 g1 = fd_gradient(f, x, h);
  Vec2 g2 = fd_gradient(f, x, h / 2);
  return (g2 * 4.0 - g1) / 3.0;
}

template <class F>
Mat2 fd_hessian(F&& f, Vec2 x, double h) {
  double c = f(x);
  double pp = f(Vec2{x.x + h, x.y + h}), pm = f(Vec2{x.x + h, x.y - h});
  double mp = f(Vec2{x.x - h, x.y + h}), mm = f(Vec2{x.x - h, x.y - h});
  double px = f(Vec2{x.x + h, x.y}), mx = f(Vec2{x.x - h, x.y});
  double py = f(Vec2{x.x, x.y + h}), my = f(Vec2{x.x, x.y - h});
  double d11 = (px - 2 * c + mx) / (h * h);
  double d22 = (py - 2 * c + my) / (h * h);
  double d12 = (pp - pm - mp + mm) / (4 * h * h);
  return {d11, d12, d12, d22};
}

template <class F>
Mat2 fd_hessian_richardson(F&& f, Vec2 x, double h) {
  Mat2 h1 = fd_hessian(f, x, h);
  Mat2 h2 = fd_hessian(f, x, h / 2);
  return (h2 * 4.0 + h1 * -1.0) * (1.0 / 3.0);
}

}  // namespace akpz
