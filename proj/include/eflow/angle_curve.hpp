#pragma once
// Tangent-angle representation of a curve with prescribed total curvature:
//   theta(u) = c + r u + phi(u),  u in [0, 1],  phi(0) = phi(1) = 0,
// sampled at M + 1 equally spaced nodes, with total length `length`.
// Energy and closure integrals use piecewise-linear theta and the
// trapezoidal rule.

#include <Eigen/Core>

#include <vector>

#include "eflow/curve.hpp"

namespace eflow {

struct AngleCurve {
    double c = 0.0;
    std::vector<double> phi; // M + 1 samples, ends exactly zero
    double r = 0.0;
    double length = 1.0;

    int intervals() const { return static_cast<int>(phi.size()) - 1; }
    double theta(int j) const;

    // Flat profile with M intervals.
    static AngleCurve flat(int intervals, double c, double r, double length);
};

// Throws InvalidArgument when the invariants are violated.
void validate(const AngleCurve &ac);

// (1/L) int theta'^2 du + L
double energy_angle(const AngleCurve &ac);

// int theta'^2 du (the shape factor; E = S/L + L).
double angle_dirichlet(const AngleCurve &ac);

// End point: L * (int cos theta du, int sin theta du).
Vec2 closure(const AngleCurve &ac);

// Gradient of energy_angle in the order (c, phi_1..phi_{M-1}, length).
Eigen::VectorXd energy_angle_gradient(const AngleCurve &ac);

// Polyline through the trapezoidal partial sums of the closure integral.
DiscreteCurve to_curve(const AngleCurve &ac);

// Mirror image across the x-axis (c, phi, r negated).
AngleCurve mirrored(const AngleCurve &ac);

// Samples a tangent-angle profile given at equally spaced arclength nodes
// onto M intervals with total curvature replaced by `r`.
AngleCurve from_profile(const std::vector<double> &theta, double length, double r, int intervals);

} // namespace eflow
