#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "akpz/surface_tension.hpp"
#include "oracles.hpp"

using namespace akpz;
using Catch::Approx;

namespace {

Slope random_liquid(const DimerModel& m, std::mt19937& rng, double margin) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Slope rho{u(rng), u(rng)};
    if (is_liquid(m, rho, margin)) return rho;
  }
}

}  // namespace

TEST_CASE("ronkin asymptotics on the honeycomb") {
  DimerModel hc = honeycomb();
  RonkinOptions o;
  o.n = 256;

  // dominant monomial z: R(t,t) = t + o(1)
  CHECK(ronkin(hc, {6, 6}, o) == Approx(6.0).margin(0.02));
  // P -> -1: R -> 0
  CHECK(ronkin(hc, {-10, -10}, o) == Approx(0.0).margin(1e-6));
}

TEST_CASE("square-grid ronkin at the origin matches the frozen oracle") {
  DimerModel sq = square_grid();
  RonkinOptions o;
  o.n = 512;
  RonkinEvaluation ev = ronkin_eval(sq, {0, 0}, o);
  // a zero of P sits exactly on a quadrature node here
  CHECK(ev.min_abs_P < 1e-12);
  CHECK(ev.value == Approx(oracles::kSquareRonkinOrigin).margin(1e-5));
  CHECK(ev.imaginary_residual < 1e-8);
}

TEST_CASE("ronkin aborts when refinement cannot escape a zero") {
  DimerModel degenerate;
  degenerate.name = "degenerate";
  degenerate.polygon = NewtonPolygon({{0, 0}, {1, 0}, {0, 1}});
  degenerate.P = LaurentPoly({{{0, 0}, 1e-12}});
  degenerate.ronkin_P = degenerate.P;
  CHECK_THROWS_AS(ronkin(degenerate, {0, 0}), NearZeroError);
}

TEST_CASE("sigma against the lozenge closed form") {
  DimerModel hc = honeycomb();
  SigmaOptions so;
  so.quad.n = 512;

  auto r = sigma(hc, {1.0 / 3, 1.0 / 3}, so);
  REQUIRE(r.has_value());
  double exact = oracles::sigma_honeycomb(1.0 / 3, 1.0 / 3);
  CHECK(std::fabs(r->value - exact) < 1e-3 * std::fabs(exact));
  // symmetric point maximizer is B* = 0
  CHECK(r->B_star.norm() < 1e-3);

  // a few asymmetric slopes
  for (Slope rho : {Slope{0.2, 0.45}, Slope{0.55, 0.1}, Slope{0.12, 0.12}}) {
    auto s = sigma(hc, rho, so);
    REQUIRE(s.has_value());
    double ex = oracles::sigma_honeycomb(rho.r1, rho.r2);
    CHECK(std::fabs(s->value - ex) < 1e-3 * std::fabs(ex));
  }
}

TEST_CASE("sigma symmetry under swapping the slope components") {
  DimerModel hc = honeycomb();
  SigmaOptions so;
  so.quad.n = 256;
  auto a = sigma(hc, {0.2, 0.5}, so);
  auto b = sigma(hc, {0.5, 0.2}, so);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->value == Approx(b->value).margin(1e-9));
}

TEST_CASE("square-grid sigma is minimal at the symmetric slope") {
  DimerModel sq = square_grid();
  SigmaOptions so;
  so.quad.n = 128;
  double center = sigma(sq, {0.5, 0.5}, so)->value;
  for (double a = 0.15; a < 0.9; a += 0.1)
    for (double b = 0.15; b < 0.9; b += 0.1) {
      Slope rho{a, b};
      if (!is_liquid(sq, rho, 0.1)) continue;
      CHECK(center <= sigma(sq, rho, so)->value + 1e-9);
    }
}

TEST_CASE("sigma returns the outside-liquid marker, not infinities") {
  DimerModel hc = honeycomb();
  CHECK_FALSE(sigma(hc, {0.9, 0.9}).has_value());
  CHECK_FALSE(sigma(hc, {0.5, 1e-9}).has_value());
}

TEST_CASE("sigma maximization failure surfaces as an error") {
  DimerModel hc = honeycomb();
  SigmaOptions so;
  so.quad.n = 64;
  so.warm_start = false;
  so.max_iterations = 0;
  CHECK_THROWS_AS(sigma(hc, {0.2, 0.45}, so), ConvergenceError);
}

TEST_CASE("sigma_hessian at the symmetric honeycomb slope") {
  DimerModel hc = honeycomb();
  auto S = sigma_hessian(hc, {1.0 / 3, 1.0 / 3});
  auto ex = oracles::sigma_honeycomb_hessian(1.0 / 3, 1.0 / 3);

  CHECK(S.eigenvalues[0] > 0);
  CHECK(S.eigenvalues[1] > 0);
  CHECK(std::fabs(S.matrix.a11 - S.matrix.a22) < 5e-3 * S.matrix.a11);
  // default step keeps a percent-level quadrature-noise floor
  CHECK(S.matrix.a11 == Approx(ex[0]).epsilon(5e-3));

  // wider stencil: matches the closed-form second derivative to 1e-4
  auto S2 = sigma_hessian(hc, {1.0 / 3, 1.0 / 3}, 0.02);
  CHECK(std::fabs(S2.matrix.a11 - ex[0]) < 1e-4 * ex[0]);
  CHECK(std::fabs(S2.matrix.a12 - ex[1]) < 1e-3 * ex[0]);
}

TEST_CASE("square-grid Hessian symmetries at the centre") {
  DimerModel sq = square_grid();
  auto S = sigma_hessian(sq, {0.5, 0.5}, 0.02);
  CHECK(S.eigenvalues[0] > 0);
  // z <-> -z symmetry kills the off-diagonal term; regression band
  CHECK(std::fabs(S.matrix.a12) < 5e-4 * S.matrix.a11);
  CHECK(std::fabs(S.matrix.a11 - S.matrix.a22) < 1e-3 * S.matrix.a11);
}

TEST_CASE("convexity at random liquid slopes") {
  std::mt19937 rng(99);
  SigmaOptions so;
  so.quad.n = 256;
  for (auto model : {honeycomb(), square_grid()}) {
    for (int k = 0; k < 8; k++) {
      Slope rho = random_liquid(model, rng, 0.05);
      auto S = sigma_hessian(model, rho, 1e-3, so);
      INFO(model.name << " rho=(" << rho.r1 << "," << rho.r2 << ")");
      CHECK(S.eigenvalues[0] > 0);
    }
  }
}

TEST_CASE("Legendre duality: grad sigma = B*, grad R(B*) = rho") {
  std::mt19937 rng(1234);
  SigmaOptions so;
  so.quad.n = 512;
  for (auto model : {honeycomb(), square_grid()}) {
    for (int k = 0; k < 3; k++) {
      Slope rho = random_liquid(model, rng, 0.08);
      auto r = sigma(model, rho, so);
      REQUIRE(r.has_value());

      auto sig = [&](Vec2 x) { return sigma(model, Slope{x.x, x.y}, so)->value; };
      Vec2 gs = fd_gradient_richardson(sig, rho.vec(), 3e-3);
      CHECK(std::fabs(gs.x - r->B_star.x) < 1e-5);
      CHECK(std::fabs(gs.y - r->B_star.y) < 1e-5);

      RonkinOptions ro = so.quad;
      ro.check_imaginary = false;
      auto R = [&](Vec2 B) { return ronkin(model, B, ro); };
      Vec2 gr = fd_gradient_richardson(R, r->B_star, 1e-3);
      CHECK(std::fabs(gr.x - rho.r1) < 1e-5);
      CHECK(std::fabs(gr.y - rho.r2) < 1e-5);
    }
  }
}

TEST_CASE("Ronkin slope identity from a neutral start") {
  std::mt19937 rng(555);
  SigmaOptions so;
  so.quad.n = 512;
  so.warm_start = false;
  so.slope_tol = 2e-5;
  for (auto model : {honeycomb(), square_grid()}) {
    for (int k = 0; k < 2; k++) {
      Slope rho = random_liquid(model, rng, 0.08);
      auto r = sigma(model, rho, so);
      REQUIRE(r.has_value());
      cplx z = z_from_slope(model, rho);
      cplx w = solve_w(model, z);
      Vec2 bridge = Vec2{std::log(std::abs(z)), std::log(std::abs(w))} *
                    model.magnetic_sign;
      CHECK(std::fabs(r->B_star.x - bridge.x) < 1e-5);
      CHECK(std::fabs(r->B_star.y - bridge.y) < 1e-5);
    }
  }
}

TEST_CASE("fast slope-map tension agrees with the quadrature route") {
  std::mt19937 rng(31337);
  SigmaOptions so;
  so.quad.n = 512;
  for (auto model : {honeycomb(), square_grid()}) {
    SlopeMapTension fast(model);
    for (int k = 0; k < 3; k++) {
      Slope rho = random_liquid(model, rng, 0.08);
      auto slow = sigma(model, rho, so);
      REQUIRE(slow.has_value());
      CHECK(std::fabs(fast.value(rho) - slow->value) <
            1e-5 * std::max(1.0, std::fabs(slow->value)));
      Vec2 B = fast.grad(rho);
      CHECK(std::fabs(B.x - slow->B_star.x) < 1e-6);
      CHECK(std::fabs(B.y - slow->B_star.y) < 1e-6);

      Mat2 Sf = fast.hessian(rho);
      auto Sq = sigma_hessian(model, rho, 0.02, so);
      CHECK(std::fabs(Sf.a11 - Sq.matrix.a11) < 3e-3 * std::fabs(Sf.a11));
      CHECK(std::fabs(Sf.a22 - Sq.matrix.a22) < 3e-3 * std::fabs(Sf.a22));
    }
  }
  // and against the honeycomb closed form
  SlopeMapTension fast(honeycomb());
  auto ex = oracles::sigma_honeycomb_hessian(0.3, 0.25);
  Mat2 S = fast.hessian({0.3, 0.25});
  CHECK(S.a11 == Approx(ex[0]).epsilon(1e-8));
  CHECK(S.a12 == Approx(ex[1]).epsilon(1e-8));
  CHECK(S.a22 == Approx(ex[2]).epsilon(1e-8));
}

TEST_CASE("ronkin evaluation metadata") {
  DimerModel hc = honeycomb();
  RonkinOptions o;
  o.n = 128;
  RonkinEvaluation ev = ronkin_eval(hc, {0.1, -0.2}, o);
  CHECK(ev.quadrature_order == 128);
  CHECK(ev.imaginary_residual < 1e-8);
  CHECK(ev.min_abs_P >= 0);
}
