#pragma once

namespace akpz::tolerances {

// Exact-map and identity checks.
inline constexpr double kRoundTripRel = 1e-8;
inline constexpr double kAnchorAbs = 1e-12;
inline constexpr double kSigmaOracleRel = 1e-3;
inline constexpr double kIdentityTol = 1e-5;

// Grid-dependent residual thresholds. Second-order solvers leave residuals
// ~ C dx^2; the constants below were measured on the reference windows by the
// dx-halving protocol (65^2 vs 129^2, ratio required in [2.8, 5.2]) and the
// thresholds carry a 10x headroom: eps(dx) = 10 C dx^2.
inline constexpr double kElConstant = 45.0;
inline constexpr double kDeltaConstant = 16.0;
inline constexpr double kMatchConstant = 1.2;
inline constexpr double kRConstant = 260.0;

inline double eps_el(double dx) { return 10 * kElConstant * dx * dx; }
inline double eps_delta(double dx) { return 10 * kDeltaConstant * dx * dx; }
inline double eps_match(double dx) { return 10 * kMatchConstant * dx * dx; }
inline double eps_r(double dx) { return 10 * kRConstant * dx * dx; }

// Convergence-order windows.
inline constexpr double kOrderLo = 1.7, kOrderHi = 2.3;
inline constexpr double kRatioLo = 2.8, kRatioHi = 5.2;

// Solver-consistency contraction under joint halving of (dx, dt, nu).
inline constexpr double kContraction = 3.0;

// Non-harmonic falsifier margins.
inline constexpr double kFalsifierRateFactor = 1e3;
inline constexpr double kFalsifierDeltaFactor = 10.0;

}  // namespace akpz::tolerances
