#include <doctest.h>

#include <Eigen/SparseCore>
#include <random>

#include "eflow/discrete_energy.hpp"
#include "support.hpp"

using namespace eflow;

namespace {

PointList wobbly(int N, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    PointList p = testing_support::semicircle(N).points();
    for (int i = 1; i < N; ++i) p[i] += Vec2(u(rng), u(rng));
    return p;
}

} // namespace

TEST_CASE("discrete energy matches the report") {
    const auto c = testing_support::sine_wave(120, 1.0, 0.2);
    const auto r = report(c, 1.7);
    CHECK(discrete_energy(c.points(), 1.7) == doctest::Approx(r.E).epsilon(1e-13));
    double w = 0.0;
    for (double x : dual_weights(c.points())) w += x;
    CHECK(w == doctest::Approx(r.L).epsilon(1e-13));
}

TEST_CASE("gradient against central differences") {
    for (std::uint32_t seed : {1u, 2u, 3u}) {
        PointList p = wobbly(24, seed);
        const Eigen::VectorXd g = discrete_energy_gradient(p, 1.3);
        const double h = 1e-6;
        double err = 0.0;
        for (int k = 0; k < g.size(); ++k) {
            PointList a = p, b = p;
            a[k / 2][k % 2] += h;
            b[k / 2][k % 2] -= h;
            const double fd = (discrete_energy(a, 1.3) - discrete_energy(b, 1.3)) / (2 * h);
            err = std::max(err, std::abs(fd - g[k]));
        }
        CHECK(err < 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("hessian against differences of the gradient") {
    PointList p = wobbly(16, 7);
    const int n = 2 * static_cast<int>(p.size());
    Eigen::SparseMatrix<double> H(n, n);
    const Triplets t = discrete_energy_hessian(p, 1.0);
    H.setFromTriplets(t.begin(), t.end());
    const Eigen::MatrixXd Hd = Eigen::MatrixXd(H);
    const double h = 1e-6;
    double err = 0.0;
    for (int k = 0; k < n; ++k) {
        PointList a = p, b = p;
        a[k / 2][k % 2] += h;
        b[k / 2][k % 2] -= h;
        const Eigen::VectorXd col = (discrete_energy_gradient(a, 1.0) - discrete_energy_gradient(b, 1.0)) / (2 * h);
        err = std::max(err, (col - Hd.col(k)).cwiseAbs().maxCoeff());
    }
    CHECK(err < 1e-5 * std::max(1.0, Hd.cwiseAbs().maxCoeff()));
    CHECK((Hd - Hd.transpose()).cwiseAbs().maxCoeff() < 1e-9 * Hd.cwiseAbs().maxCoeff());

    const Eigen::MatrixXd Hi = discrete_energy_hessian_interior(p, 1.0);
    CHECK(Hi.rows() == n - 4);
    CHECK((Hi - Hd.block(2, 2, n - 4, n - 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("segment is critical") {
    const auto seg = DiscreteCurve::segment({0, 0}, {0.3, 0}, 50);
    const Eigen::VectorXd g = discrete_energy_gradient(seg.points(), 1.0);
    CHECK(g.segment(2, g.size() - 4).cwiseAbs().maxCoeff() < 1e-12);
}
