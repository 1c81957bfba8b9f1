// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_CONSTANTS_HPP
#define TRIBEAM_CONSTANTS_HPP

namespace tribeam {

// Speed of light. The solver itself works in normalized units (c = 1,
// lengths in cells); these constants convert at the interface layer only.
inline constexpr double c_m_per_s = 2.99792458e8;
inline constexpr double c_nm_per_s = 2.99792458e17;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// 3D Courant stability bound for a cubic Yee lattice, 1/sqrt(3).
inline constexpr double courant_limit_3d = 0.57735026918962576;

} // namespace tribeam

#endif
