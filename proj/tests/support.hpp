#pragma once
#include <cmath>

#include "eflow/curve.hpp"

namespace testing_support {

using eflow::DiscreteCurve;
using eflow::kPi;
using eflow::PointList;
using eflow::Vec2;

// Upper semicircle of radius `rad` from (0,0) to (2 rad, 0), traversed left to right.
inline DiscreteCurve semicircle(int N, double rad = 1.0) {
    PointList p;
    for (int i = 0; i <= N; ++i) {
        const double a = kPi * (1.0 - static_cast<double>(i) / N);
        p.emplace_back(rad + rad * std::cos(a), rad * std::sin(a));
    }
    p.front() = Vec2(0.0, 0.0);
    p.back() = Vec2(2.0 * rad, 0.0);
    return DiscreteCurve(std::move(p));
}

// One full sine period over [0, ell]: crosses the x-axis in the middle.
inline DiscreteCurve sine_wave(int N, double ell = 1.0, double amp = 0.2) {
    PointList p;
    for (int i = 0; i <= N; ++i) {
        const double x = ell * i / N;
        p.emplace_back(x, amp * std::sin(2.0 * kPi * x / ell));
    }
    p.back().y() = 0.0;
    return DiscreteCurve(std::move(p));
}

// Closed round circle through the origin, centre (0, rad).
inline DiscreteCurve circle(int N, double rad = 1.0) {
    PointList p;
    for (int i = 0; i <= N; ++i) {
        const double a = -kPi / 2 + 2.0 * kPi * i / N;
        p.emplace_back(rad * std::cos(a), rad + rad * std::sin(a));
    }
    p.front() = Vec2(0.0, 0.0);
    p.back() = Vec2(0.0, 0.0);
    return DiscreteCurve(std::move(p));
}

} // namespace testing_support

namespace testing_support {

// The report leaves the two end half-cells without curvature. Adds them back
// with the linearly extrapolated end curvature (trapezoidal end cells), which
// matters for curves whose ends are not straight.
struct EndCorrected {
    double B = 0.0;
    double TC = 0.0;
};

inline EndCorrected with_end_cells(const DiscreteCurve &c) {
    const auto k = eflow::curvatures(c);
    const auto h = c.edge_lengths();
    const auto rep = eflow::report(c);
    const std::size_t n = k.size();
    const double k0 = 2.0 * k[0] - k[1];
    const double kn = 2.0 * k[n - 1] - k[n - 2];
    return {rep.B + 0.5 * (k0 * k0 * h.front() + kn * kn * h.back()), rep.TC + 0.5 * (k0 * h.front() + kn * h.back())};
}

} // namespace testing_support
