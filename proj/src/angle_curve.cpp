#include "eflow/angle_curve.hpp"

#include <cmath>

namespace eflow {

double AngleCurve::theta(int j) const {
    return c + r * static_cast<double>(j) / intervals() + phi[j];
}

AngleCurve AngleCurve::flat(int intervals, double c, double r, double length) {
    AngleCurve ac;
    ac.c = c;
    ac.r = r;
    ac.length = length;
    ac.phi.assign(intervals + 1, 0.0);
    return ac;
}

void validate(const AngleCurve &ac) {
    if (ac.phi.size() < 3) throw InvalidArgument("AngleCurve: need at least two intervals");
    if (ac.phi.front() != 0.0 || ac.phi.back() != 0.0)
        throw InvalidArgument("AngleCurve: profile must vanish at both ends");
    if (!(ac.length > 0.0)) throw InvalidArgument("AngleCurve: length must be positive");
}

double angle_dirichlet(const AngleCurve &ac) {
    const int m = ac.intervals();
    double s = 0.0;
    double prev = ac.theta(0);
    for (int j = 1; j <= m; ++j) {
        const double t = ac.theta(j);
        s += (t - prev) * (t - prev);
        prev = t;
    }
    return s * m;
}

double energy_angle(const AngleCurve &ac) { return angle_dirichlet(ac) / ac.length + ac.length; }

Vec2 closure(const AngleCurve &ac) {
    const int m = ac.intervals();
    Vec2 sum(0.0, 0.0);
    for (int j = 0; j <= m; ++j) {
        const double w = (j == 0 || j == m) ? 0.5 : 1.0;
        const double t = ac.theta(j);
        sum += w * Vec2(std::cos(t), std::sin(t));
    }
    return ac.length * sum / m;
}

Eigen::VectorXd energy_angle_gradient(const AngleCurve &ac) {
    const int m = ac.intervals();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    for (int j = 1; j < m; ++j)
        g[j] = 2.0 * m * (2.0 * ac.theta(j) - ac.theta(j - 1) - ac.theta(j + 1)) / ac.length;
    g[m] = 1.0 - angle_dirichlet(ac) / (ac.length * ac.length);
    return g;
}

DiscreteCurve to_curve(const AngleCurve &ac) {
    const int m = ac.intervals();
    const double h = ac.length / m;
    PointList pts(m + 1);
    pts[0] = Vec2(0.0, 0.0);
    Vec2 prevDir(std::cos(ac.theta(0)), std::sin(ac.theta(0)));
    for (int j = 1; j <= m; ++j) {
        const Vec2 dir(std::cos(ac.theta(j)), std::sin(ac.theta(j)));
        pts[j] = pts[j - 1] + 0.5 * h * (prevDir + dir);
        prevDir = dir;
    }
    return DiscreteCurve(std::move(pts));
}

AngleCurve mirrored(const AngleCurve &ac) {
    AngleCurve out = ac;
    out.c = -ac.c;
    out.r = -ac.r;
    for (double &p : out.phi) p = -p;
    return out;
}

AngleCurve from_profile(const std::vector<double> &theta, double length, double r, int intervals) {
    const int n = static_cast<int>(theta.size()) - 1;
    auto sample = [&](double u) {
        const double x = u * n;
        const int i = std::min(static_cast<int>(x), n - 1);
        const double f = x - i;
        return (1.0 - f) * theta[i] + f * theta[i + 1];
    };
    const double t0 = theta.front(), tc = theta.back() - theta.front();
    AngleCurve ac = AngleCurve::flat(intervals, t0, r, length);
    for (int j = 1; j < intervals; ++j) {
        const double u = static_cast<double>(j) / intervals;
        ac.phi[j] = sample(u) - t0 - tc * u;
    }
    return ac;
}

} // namespace eflow
