#pragma once

#include <cstdint>

namespace confsym::defaults {

// Central table of numeric defaults. Reports echo these values, and the
// README documents the same table; keep the two in sync.

inline constexpr double fd_step = 1e-5;   // central differences, 1st order
inline constexpr double fd_step2 = 1e-4;  // central differences, 2nd order

inline constexpr int quad_order = 8;            // Gauss-Legendre points/panel
inline constexpr int quad_panels = 256;         // starting panel count
inline constexpr int quad_max_panels = 4096;    // refinement cap
inline constexpr double quad_refine_tol = 1e-10;

inline constexpr double rk4_dt = 1e-3;
inline constexpr double divergence_threshold = 1e12;

inline constexpr double omega_floor = 1e-8;   // degenerate 2-form sample cutoff
inline constexpr double rank_rel_tol = 1e-6;  // singular-value cutoff, relative

inline constexpr std::uint64_t seed = 20250810;

}  // namespace confsym::defaults
