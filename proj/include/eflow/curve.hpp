#pragma once
// Pinned open planar polylines and the geometric functionals evaluated on them:
// length, bending energy, penalized energy E = B + lambda L, total signed
// curvature, and half-plane location relative to the x-axis.

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

#include "eflow/errors.hpp"

namespace eflow {

using Vec2 = Eigen::Vector2d;
using PointList = std::vector<Vec2>;

inline constexpr double kPi = 3.14159265358979323846;

// Minimum number of edges of a DiscreteCurve.
inline constexpr int kMinEdges = 8;

class DiscreteCurve {
  public:
    DiscreteCurve() = default;
    // Throws InvalidArgument for fewer than kMinEdges + 1 points or non-finite
    // coordinates. Immersedness is checked by the operations that need it.
    explicit DiscreteCurve(PointList points);

    // A straight segment from `a` to `b` with `edges` equal edges.
    static DiscreteCurve segment(const Vec2 &a, const Vec2 &b, int edges);

    const PointList &points() const { return points_; }
    PointList &mutable_points() { return points_; }

    // Number of edges.
    int edges() const { return static_cast<int>(points_.size()) - 1; }
    int size() const { return static_cast<int>(points_.size()); }
    const Vec2 &operator[](int i) const { return points_[i]; }
    const Vec2 &front() const { return points_.front(); }
    const Vec2 &back() const { return points_.back(); }

    std::vector<double> edge_lengths() const;
    bool is_immersed(double minEdge = 0.0) const;
    // Throws ImmersionError when some edge is not longer than `minEdge`.
    void require_immersed(double minEdge = 0.0) const;

  private:
    PointList points_;
};

struct GeometricReport {
    double L = 0.0;
    double B = 0.0;
    double E = 0.0;
    double TC = 0.0;
    double yMin = 0.0;
    double yMax = 0.0;
};

enum class Location { StrictUpper, StrictLower, Mixed };

struct HalfPlaneLocation {
    Location tag = Location::Mixed;
    // min |y| over interior nodes, negative for StrictLower and zero for Mixed.
    double margin = 0.0;
};

std::string to_string(Location loc);
Location location_from_string(const std::string &s);

// Angle of each edge, unwrapped edge to edge onto the nearest branch.
std::vector<double> tangent_angles(const DiscreteCurve &curve);

// Signed turning angle at each interior node (size = edges - 1).
std::vector<double> turning_angles(const DiscreteCurve &curve);

// Signed curvature at interior nodes: turning angle over the dual edge length.
std::vector<double> curvatures(const DiscreteCurve &curve);

GeometricReport report(const DiscreteCurve &curve, double lambda = 1.0);

// Multiplies every point by rho > 0.
DiscreteCurve rescale(const DiscreteCurve &curve, double rho);

// Mirror image across the x-axis.
DiscreteCurve reflect(const DiscreteCurve &curve);

// Requires both endpoints on the x-axis (|y| < 1e-12).
HalfPlaneLocation half_plane_location(const DiscreteCurve &curve);

// Linear extrapolation of the interior curvature to each endpoint; returns the
// larger magnitude.
double end_curvature_residual(const DiscreteCurve &curve);

struct ResampleOptions {
    // Relative tolerance on equal edge lengths of the result.
    double tolerance = 1e-6;
};

// Resamples onto `edges` equal-length edges along a natural cubic spline
// through the nodes (parametrized by cumulative chord length). Endpoints are
// kept exactly.
DiscreteCurve resample_uniform(const DiscreteCurve &curve, int edges,
                               const ResampleOptions &opts = {});

// max h_i / min h_i
double edge_ratio(const DiscreteCurve &curve);

// Symmetric Hausdorff distance between the node sets of each polyline and the
// other polyline (vertex-to-polyline in both directions).
double hausdorff_distance(const DiscreteCurve &a, const DiscreteCurve &b);

// Largest node displacement between two curves with the same node count.
double max_displacement(const DiscreteCurve &a, const DiscreteCurve &b);

} // namespace eflow
