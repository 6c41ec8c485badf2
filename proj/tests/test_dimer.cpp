#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "akpz/dimer.hpp"

using namespace akpz;
using Catch::Approx;

namespace {

cplx rel_err(cplx a, cplx b) { return (a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("eval_P on the two lattices") {
  DimerModel hc = honeycomb(), sq = square_grid();

  CHECK(std::abs(eval_P(hc, cplx(0, 1), cplx(1, -1))) == Approx(0).margin(1e-15));
  CHECK(std::abs(eval_P(sq, cplx(0, 1), cplx(0, -1))) == Approx(0).margin(1e-15));
  CHECK(eval_P(hc, cplx(0.3, 0), cplx(0.3, 0)).real() == Approx(-0.4));
  CHECK(eval_P(hc, cplx(0.3, 0), cplx(0.3, 0)).imag() == Approx(0).margin(1e-15));

  CHECK_THROWS_AS(eval_P(hc, cplx(0, 0), cplx(1, 0)), DomainError);
  CHECK_THROWS_AS(eval_P(sq, cplx(1, 0), cplx(0, 0)), DomainError);
}

TEST_CASE("solve_w lands on the spectral curve") {
  DimerModel hc = honeycomb(), sq = square_grid();

  cplx z = std::polar(1.0, kPi / 3);
  CHECK(std::abs(solve_w(hc, z) - std::polar(1.0, -kPi / 3)) < 1e-15);
  CHECK(std::abs(solve_w(sq, cplx(0, 1)) - cplx(0, -1)) < 1e-15);
  CHECK(std::abs(solve_w(hc, cplx(0.5, 0.5)) - cplx(0.5, -0.5)) < 1e-15);

  // z = 1 is the pole of w = (z+1)/(z-1)
  CHECK_THROWS_AS(solve_w(sq, cplx(1, 0)), DomainError);
}

TEST_CASE("slope_from_z anchors") {
  DimerModel hc = honeycomb(), sq = square_grid();

  Slope s = slope_from_z(hc, std::polar(1.0, kPi / 3));
  CHECK(s.r1 == Approx(1.0 / 3).margin(1e-14));
  CHECK(s.r2 == Approx(1.0 / 3).margin(1e-14));

  s = slope_from_z(hc, cplx(0, 1));
  CHECK(s.r1 == Approx(0.25).margin(1e-14));
  CHECK(s.r2 == Approx(0.5).margin(1e-14));

  s = slope_from_z(sq, cplx(0, 1));
  CHECK(s.r1 == Approx(0.5).margin(1e-14));
  CHECK(s.r2 == Approx(0.5).margin(1e-14));

  CHECK_THROWS_AS(slope_from_z(hc, cplx(0.5, 0)), DomainError);
  CHECK_THROWS_AS(slope_from_z(hc, cplx(0.5, -1)), DomainError);
}

TEST_CASE("z_from_slope anchors and errors") {
  DimerModel hc = honeycomb(), sq = square_grid();

  CHECK(std::abs(z_from_slope(hc, {1.0 / 3, 1.0 / 3}) -
                 std::polar(1.0, kPi / 3)) < 1e-12);
  CHECK(std::abs(z_from_slope(sq, {0.5, 0.5}) - cplx(0, 1)) < 1e-12);
  CHECK(std::abs(z_from_slope(hc, {0.25, 0.5}) - cplx(0, 1)) < 1e-12);

  CHECK_THROWS_AS(z_from_slope(hc, {0.9, 0.9}), DomainError);
  CHECK_THROWS_AS(z_from_slope(hc, {0.0, 0.0}), DomainError);
}

TEST_CASE("is_liquid") {
  DimerModel hc = honeycomb(), sq = square_grid();
  CHECK(is_liquid(hc, {1.0 / 3, 1.0 / 3}, 0.01));
  CHECK_FALSE(is_liquid(hc, {0, 0}, 1e-9));
  CHECK_FALSE(is_liquid(sq, {0.5, 1.0 - 1e-9}, 0.01));
  // integer-coordinate exclusion is separate from the boundary margin
  CHECK_FALSE(is_liquid(sq, {1.0 - 1e-9, 0.5}, 0.01));
}

TEST_CASE("round trip z -> slope -> z, curve membership, range") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> re(-3.0, 3.0), im(1e-3, 3.0);

  for (auto model : {honeycomb(), square_grid()}) {
    LaurentPoly Pz = model.P.dz(), Pw = model.P.dw();
    int kept = 0;
    while (kept < 1000) {
      cplx z(re(rng), im(rng));
      Slope rho = slope_from_z(model, z);
      if (!is_liquid(model, rho, 0.02)) continue;
      kept++;

      // range: strictly inside the polygon
      CHECK(model.polygon.boundary_distance(rho) > 0);

      // curve membership
      cplx w = solve_w(model, z);
      CHECK(std::abs(eval_P(model, z, w)) < 1e-12);

      // non-degeneracy of the curve: p1/p2 neither zero nor infinite
      cplx ratio = Pz.eval(z, w) / Pw.eval(z, w);
      CHECK(std::abs(ratio) > 1e-8);
      CHECK(std::abs(ratio) < 1e8);

      // round trip
      cplx back = z_from_slope(model, rho);
      CHECK(std::abs(rel_err(back, z)) < 1e-8);
    }
  }
}

TEST_CASE("generic Newton inverse agrees with the closed forms") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> re(-2.0, 2.0), im(1e-2, 2.5);
  for (auto model : {honeycomb(), square_grid()}) {
    int kept = 0;
    while (kept < 50) {
      cplx z(re(rng), im(rng));
      Slope rho = slope_from_z(model, z);
      if (!is_liquid(model, rho, 0.05)) continue;
      kept++;
      cplx a = z_from_slope(model, rho);
      cplx b = z_from_slope(model, rho, {.force_newton = true});
      CHECK(std::abs(a - b) < 1e-9 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("branch offset shifts the slope sheet") {
  DimerModel hc = honeycomb();
  hc.branch_offset = {1, 0};
  Slope s = slope_from_z(hc, cplx(0, 1));
  CHECK(s.r1 == Approx(2.25).margin(1e-14));
  CHECK(std::abs(z_from_slope(hc, s, {.margin = -10.0}) - cplx(0, 1)) < 1e-12);
}
