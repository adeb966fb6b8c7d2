#include "eflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eflow/spline.hpp"

namespace eflow {

namespace {

double cross(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

double turning(const Vec2 &a, const Vec2 &b) { return std::atan2(cross(a, b), a.dot(b)); }

double point_segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (a + t * ab - p).norm();
}

double directed_hausdorff(const DiscreteCurve &from, const DiscreteCurve &to) {
    const auto &q = to.points();
    double worst = 0.0;
    for (const Vec2 &p : from.points()) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < q.size(); ++j) {
            best = std::min(best, point_segment_distance(p, q[j], q[j + 1]));
            if (best <= worst) break;
        }
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

DiscreteCurve::DiscreteCurve(PointList points) : points_(std::move(points)) {
    if (static_cast<int>(points_.size()) < kMinEdges + 1)
        throw InvalidArgument("DiscreteCurve: need at least " + std::to_string(kMinEdges + 1) +
                              " points, got " + std::to_string(points_.size()));
    for (const Vec2 &p : points_)
        if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
            throw InvalidArgument("DiscreteCurve: non-finite coordinate");
}

DiscreteCurve DiscreteCurve::segment(const Vec2 &a, const Vec2 &b, int edges) {
    PointList pts(edges + 1);
    for (int i = 0; i <= edges; ++i) {
        const double t = static_cast<double>(i) / edges;
        pts[i] = (1.0 - t) * a + t * b;
    }
    pts.back() = b;
    return DiscreteCurve(std::move(pts));
}

std::vector<double> DiscreteCurve::edge_lengths() const {
    std::vector<double> h(points_.size() - 1);
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) h[i] = (points_[i + 1] - points_[i]).norm();
    return h;
}

bool DiscreteCurve::is_immersed(double minEdge) const {
    for (std::size_t i = 0; i + 1 < points_.size(); ++i)
        if (!((points_[i + 1] - points_[i]).norm() > minEdge)) return false;
    return true;
}

void DiscreteCurve::require_immersed(double minEdge) const {
    for (std::size_t i = 0; i + 1 < points_.size(); ++i)
        if (!((points_[i + 1] - points_[i]).norm() > minEdge))
            throw ImmersionError("edge " + std::to_string(i) + " is degenerate");
}

std::string to_string(Location loc) {
    switch (loc) {
    case Location::StrictUpper: return "upper";
    case Location::StrictLower: return "lower";
    case Location::Mixed: return "mixed";
    }
    return "mixed";
}

Location location_from_string(const std::string &s) {
    if (s == "upper") return Location::StrictUpper;
    if (s == "lower") return Location::StrictLower;
    if (s == "mixed") return Location::Mixed;
    throw InvalidArgument("unknown location tag: " + s);
}

std::vector<double> tangent_angles(const DiscreteCurve &curve) {
    curve.require_immersed();
    const auto &p = curve.points();
    const int n = curve.edges();
    std::vector<double> theta(n);
    Vec2 prev = p[1] - p[0];
    theta[0] = std::atan2(prev.y(), prev.x());
    for (int i = 1; i < n; ++i) {
        const Vec2 e = p[i + 1] - p[i];
        theta[i] = theta[i - 1] + turning(prev, e);
        prev = e;
    }
    return theta;
}

std::vector<double> turning_angles(const DiscreteCurve &curve) {
    curve.require_immersed();
    const auto &p = curve.points();
    const int n = curve.edges();
    std::vector<double> psi(n - 1);
    for (int i = 1; i < n; ++i) psi[i - 1] = turning(p[i] - p[i - 1], p[i + 1] - p[i]);
    return psi;
}

std::vector<double> curvatures(const DiscreteCurve &curve) {
    const auto psi = turning_angles(curve);
    const auto h = curve.edge_lengths();
    std::vector<double> k(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) k[i] = 2.0 * psi[i] / (h[i] + h[i + 1]);
    return k;
}

GeometricReport report(const DiscreteCurve &curve, double lambda) {
    const auto psi = turning_angles(curve);
    const auto h = curve.edge_lengths();
    GeometricReport r;
    for (double hi : h) r.L += hi;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        r.TC += psi[i];
        r.B += 2.0 * psi[i] * psi[i] / (h[i] + h[i + 1]);
    }
    r.E = r.B + lambda * r.L;
    const auto &p = curve.points();
    r.yMin = std::numeric_limits<double>::infinity();
    r.yMax = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < curve.edges(); ++i) {
        r.yMin = std::min(r.yMin, p[i].y());
        r.yMax = std::max(r.yMax, p[i].y());
    }
    return r;
}

DiscreteCurve rescale(const DiscreteCurve &curve, double rho) {
    if (!(rho > 0.0)) throw InvalidArgument("rescale: factor must be positive");
    PointList pts = curve.points();
    for (Vec2 &p : pts) p *= rho;
    return DiscreteCurve(std::move(pts));
}

DiscreteCurve reflect(const DiscreteCurve &curve) {
    PointList pts = curve.points();
    for (Vec2 &p : pts) p.y() = -p.y();
    return DiscreteCurve(std::move(pts));
}

HalfPlaneLocation half_plane_location(const DiscreteCurve &curve) {
    if (std::abs(curve.front().y()) >= 1e-12 || std::abs(curve.back().y()) >= 1e-12)
        throw PreconditionError("half_plane_location: endpoints must lie on the x-axis");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double minAbs = lo;
    for (int i = 1; i < curve.edges(); ++i) {
        const double y = curve[i].y();
        lo = std::min(lo, y);
        hi = std::max(hi, y);
        minAbs = std::min(minAbs, std::abs(y));
    }
    if (lo > 0.0) return {Location::StrictUpper, minAbs};
    if (hi < 0.0) return {Location::StrictLower, -minAbs};
    return {Location::Mixed, 0.0};
}

double end_curvature_residual(const DiscreteCurve &curve) {
    const auto k = curvatures(curve);
    const auto h = curve.edge_lengths();
    const int m = static_cast<int>(k.size());
    // node i sits at arclength s_i; k[0] is node 1.
    const double s1 = h[0], s2 = h[0] + h[1];
    const double k0 = k[0] - (k[1] - k[0]) * s1 / (s2 - s1);
    const double t1 = h[m], t2 = h[m] + h[m - 1];
    const double kn = k[m - 1] - (k[m - 2] - k[m - 1]) * t1 / (t2 - t1);
    return std::max(std::abs(k0), std::abs(kn));
}

DiscreteCurve resample_uniform(const DiscreteCurve &curve, int edges, const ResampleOptions &opts) {
    if (edges < kMinEdges) throw InvalidArgument("resample_uniform: need at least 8 edges");
    curve.require_immersed();
    const auto &p = curve.points();
    const int n = curve.size();

    std::vector<double> t(n, 0.0), xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        if (i > 0) t[i] = t[i - 1] + (p[i] - p[i - 1]).norm();
        xs[i] = p[i].x();
        ys[i] = p[i].y();
    }
    const NaturalSpline sx(t, xs), sy(t, ys);
    const double tEnd = t.back();
    auto at = [&](double s) { return Vec2(sx(s), sy(s)); };
    auto dat = [&](double s) { return Vec2(sx.derivative(s), sy.derivative(s)); };

    // Next parameter after `t0` whose point is at chord distance `h` from q.
    auto chord_step = [&](const Vec2 &q, double t0, double h) {
        double s = t0 + h / std::max(dat(t0).norm(), 1e-3);
        for (int it = 0; it < 50; ++it) {
            const Vec2 d = at(s) - q;
            const double r = d.norm();
            const double f = r - h;
            if (std::abs(f) <= 1e-15 * std::max(h, 1.0)) return s;
            const double df = r > 0.0 ? d.dot(dat(s)) / r : 1.0;
            double next = s - f / (df > 1e-3 ? df : 1e-3);
            if (!(next > t0)) next = 0.5 * (s + t0);
            s = next;
        }
        return s;
    };

    // Chord marching with spacing h; returns the residual at the far end.
    PointList out(edges + 1);
    auto march = [&](double h) {
        out[0] = p.front();
        double s = 0.0;
        for (int j = 1; j < edges; ++j) {
            s = chord_step(out[j - 1], s, h);
            out[j] = at(s);
        }
        const double extra = (p.back() - out[edges - 1]).norm();
        // Positive when the last chord is too long.
        return s < tEnd ? extra - h : -(extra + h);
    };

    // Secant iteration on the spacing, falling back to bisection.
    double h0 = tEnd / edges;
    double lo = 0.5 * h0, hi = 1.5 * h0;
    double flo = march(lo), fhi = march(hi);
    if (!(flo > 0.0 && fhi < 0.0)) {
        lo = 0.05 * h0;
        hi = 2.0 * h0;
        flo = march(lo);
        fhi = march(hi);
    }
    double h = h0;
    for (int it = 0; it < 200; ++it) {
        double trial = hi - fhi * (hi - lo) / (fhi - flo);
        if (!(trial > lo && trial < hi)) trial = 0.5 * (lo + hi);
        h = trial;
        const double f = march(h);
        if (std::abs(f) <= 1e-3 * opts.tolerance * h) break;
        if (f > 0.0) {
            lo = h;
            flo = f;
        } else {
            hi = h;
            fhi = f;
        }
        if (hi - lo <= 1e-16 * h0) break;
    }
    march(h);
    out[edges] = p.back();
    return DiscreteCurve(std::move(out));
}

double edge_ratio(const DiscreteCurve &curve) {
    const auto h = curve.edge_lengths();
    const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
    return *hi / *lo;
}

double hausdorff_distance(const DiscreteCurve &a, const DiscreteCurve &b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double max_displacement(const DiscreteCurve &a, const DiscreteCurve &b) {
    if (a.size() != b.size()) throw InvalidArgument("max_displacement: node counts differ");
    double d = 0.0;
    for (int i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).norm());
    return d;
}

} // namespace eflow
