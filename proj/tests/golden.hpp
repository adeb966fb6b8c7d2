#pragma once
// Frozen oracle values. Shooting values at 8192 RK4 steps; constrained minima
// at M = 2048 angle intervals.

namespace golden {

inline constexpr double kRStar = 4.562636613666;
inline constexpr double kEStar = 10.603754511536;

inline constexpr double kArcEnergy03 = 10.116662315683;
inline constexpr double kArcTC03 = -4.373030104911;
inline constexpr double kLoopEnergy03 = 11.043688480001;
inline constexpr double kLoopTC03 = 4.721316802325;

inline constexpr double kLoopEnergy01 = 10.754646474637;
inline constexpr double kArcEnergy01 = 10.447751980138;

// m(0.1, r_*/2) and m(0, r_*)
inline constexpr double kMHalf01 = 13.9623503484;
inline constexpr double kMStar0 = 10.6037533515;

// Second-variation eigenvalue of the upper loop at ell = 0.1, N = 256.
inline constexpr double kLoopEigen01 = -0.029172134885;

} // namespace golden
