#include "eflow/discrete_energy.hpp"

#include <cmath>

namespace eflow {

namespace {

using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Hessian of atan2(v.y, v.x) with respect to v.
Mat2 angle_hessian(const Vec2 &v) {
    const double n4 = v.squaredNorm() * v.squaredNorm();
    Mat2 h;
    h << 2.0 * v.x() * v.y(), v.y() * v.y() - v.x() * v.x(), v.y() * v.y() - v.x() * v.x(),
        -2.0 * v.x() * v.y();
    return h / n4;
}

struct Stencil {
    double value;
    Vec6 grad;
    Mat6 hess;
};

// Bending term 2 psi^2 / (|a| + |b|) at node i, differentiated with respect to
// (p_{i-1}, p_i, p_{i+1}).
template <bool WithHessian>
Stencil bending_stencil(const Vec2 &pm, const Vec2 &p0, const Vec2 &pp) {
    const Vec2 a = p0 - pm, b = pp - p0;
    const double la = a.norm(), lb = b.norm();
    const double psi = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    const double S = la + lb;

    Stencil out;
    out.value = 2.0 * psi * psi / S;

    Vec4 dpsi, dS;
    dpsi << a.y() / (la * la), -a.x() / (la * la), -b.y() / (lb * lb), b.x() / (lb * lb);
    dS << a / la, b / lb;
    const Vec4 g = (4.0 * psi / S) * dpsi - (2.0 * psi * psi / (S * S)) * dS;

    // d(a,b)/d(pm,p0,pp)
    Eigen::Matrix<double, 4, 6> J = Eigen::Matrix<double, 4, 6>::Zero();
    J.block<2, 2>(0, 0) = -Mat2::Identity();
    J.block<2, 2>(0, 2) = Mat2::Identity();
    J.block<2, 2>(2, 2) = -Mat2::Identity();
    J.block<2, 2>(2, 4) = Mat2::Identity();
    out.grad = J.transpose() * g;

    if constexpr (WithHessian) {
        Mat4 Hpsi = Mat4::Zero(), HS = Mat4::Zero();
        Hpsi.block<2, 2>(0, 0) = -angle_hessian(a);
        Hpsi.block<2, 2>(2, 2) = angle_hessian(b);
        const Vec2 ah = a / la, bh = b / lb;
        HS.block<2, 2>(0, 0) = (Mat2::Identity() - ah * ah.transpose()) / la;
        HS.block<2, 2>(2, 2) = (Mat2::Identity() - bh * bh.transpose()) / lb;
        const Mat4 H = (4.0 / S) * dpsi * dpsi.transpose() + (4.0 * psi / S) * Hpsi -
                       (4.0 * psi / (S * S)) * (dpsi * dS.transpose() + dS * dpsi.transpose()) +
                       (4.0 * psi * psi / (S * S * S)) * dS * dS.transpose() -
                       (2.0 * psi * psi / (S * S)) * HS;
        out.hess = J.transpose() * H * J;
    }
    return out;
}

} // namespace

double discrete_energy(const PointList &p, double lambda) {
    const int n = static_cast<int>(p.size()) - 1;
    double e = 0.0;
    double prevLen = (p[1] - p[0]).norm();
    e += lambda * prevLen;
    for (int i = 1; i < n; ++i) {
        const Vec2 a = p[i] - p[i - 1], b = p[i + 1] - p[i];
        const double lb = b.norm();
        const double psi = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
        e += 2.0 * psi * psi / (prevLen + lb) + lambda * lb;
        prevLen = lb;
    }
    return e;
}

Eigen::VectorXd discrete_energy_gradient(const PointList &p, double lambda) {
    const int n = static_cast<int>(p.size()) - 1;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * (n + 1));
    for (int i = 0; i < n; ++i) {
        const Vec2 e = p[i + 1] - p[i];
        const Vec2 d = lambda * e / e.norm();
        g.segment<2>(2 * i) -= d;
        g.segment<2>(2 * i + 2) += d;
    }
    for (int i = 1; i < n; ++i) {
        const Stencil s = bending_stencil<false>(p[i - 1], p[i], p[i + 1]);
        g.segment<6>(2 * (i - 1)) += s.grad;
    }
    return g;
}

Triplets discrete_energy_hessian(const PointList &p, double lambda) {
    const int n = static_cast<int>(p.size()) - 1;
    Triplets t;
    t.reserve(16 * n + 36 * n);
    for (int i = 0; i < n; ++i) {
        const Vec2 e = p[i + 1] - p[i];
        const double len = e.norm();
        const Vec2 eh = e / len;
        const Mat2 h = lambda * (Mat2::Identity() - eh * eh.transpose()) / len;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                t.emplace_back(2 * i + r, 2 * i + c, h(r, c));
                t.emplace_back(2 * i + 2 + r, 2 * i + 2 + c, h(r, c));
                t.emplace_back(2 * i + r, 2 * i + 2 + c, -h(r, c));
                t.emplace_back(2 * i + 2 + r, 2 * i + c, -h(r, c));
            }
    }
    for (int i = 1; i < n; ++i) {
        const Stencil s = bending_stencil<true>(p[i - 1], p[i], p[i + 1]);
        const int base = 2 * (i - 1);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) t.emplace_back(base + r, base + c, s.hess(r, c));
    }
    return t;
}

Eigen::MatrixXd discrete_energy_hessian_interior(const PointList &p, double lambda) {
    const int n = static_cast<int>(p.size()) - 1;
    const int m = 2 * (n - 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
    for (const auto &t : discrete_energy_hessian(p, lambda)) {
        const int r = t.row() - 2, c = t.col() - 2;
        if (r >= 0 && r < m && c >= 0 && c < m) H(r, c) += t.value();
    }
    return H;
}

std::vector<double> dual_weights(const PointList &p) {
    const int n = static_cast<int>(p.size()) - 1;
    std::vector<double> w(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double h = (p[i + 1] - p[i]).norm();
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

} // namespace eflow
