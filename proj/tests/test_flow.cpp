#include <doctest.h>

#include <cmath>

#include "eflow/discrete_energy.hpp"
#include "eflow/flow.hpp"
#include "support.hpp"

using namespace eflow;

namespace {

FlowState advance(FlowState st, const FlowConfig &cfg, int steps, double *maxMove = nullptr,
                  double *maxRise = nullptr) {
    double tau = cfg.tau;
    for (int i = 0; i < steps; ++i) {
        int it = 0;
        FlowState next = step(st, tau, cfg, &it);
        if (maxMove) *maxMove = std::max(*maxMove, max_displacement(st.curve, next.curve));
        if (maxRise) *maxRise = std::max(*maxRise, next.report.E - st.report.E);
        st = std::move(next);
        if (it <= 4) tau = std::min(tau * cfg.tauGrowth, cfg.tauMax);
    }
    return st;
}

DiscreteCurve bumped(const DiscreteCurve &c, double amp) {
    PointList p = c.points();
    const int N = c.edges();
    for (int i = 1; i < N; ++i) {
        const double x = static_cast<double>(i) / N;
        p[i].y() += amp * std::sin(kPi * x) * std::sin(kPi * x);
    }
    return DiscreteCurve(p);
}

} // namespace

TEST_CASE("config validation") {
    FlowConfig c;
    CHECK_NOTHROW(c.validate());
    c.N = 32;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = FlowConfig{};
    c.tau = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = FlowConfig{};
    c.gradTol = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("segment is stationary") {
    FlowConfig cfg;
    const FlowState s0 = make_state(DiscreteCurve::segment({0, 0}, {0.3, 0}, 256), 0.0, 1.0);
    double move = 0.0;
    const FlowState s = advance(s0, cfg, 50, &move);
    CHECK(move <= 1e-10);
    CHECK(natural_bc_residual(s) == 0.0);
}

TEST_CASE("lower arc drifts only by the discretization gap") {
    const Catalogue cat = enumerate_low_energy(0.3);
    FlowConfig cfg;
    cfg.N = 1024;
    const FlowState s0 = make_state(resample_uniform(cat.arcMinus.curve, 1024), 0.0, 1.0);
    const FlowState s = advance(s0, cfg, 100);
    CHECK(hausdorff_distance(s0.curve, s.curve) <= 1e-5);
}

TEST_CASE("every accepted step lowers the energy and keeps the endpoints") {
    FlowConfig cfg;
    cfg.N = 128;
    const DiscreteCurve start = bumped(DiscreteCurve::segment({0, 0}, {1.0, 0}, 128), 0.3);
    double rise = -1.0;
    const FlowState s = advance(make_state(start, 0.0, 1.0), cfg, 60, nullptr, &rise);
    CHECK(rise <= 1e-12);
    CHECK(s.report.E < report(start).E);
    CHECK(s.curve.front() == Vec2(0, 0));
    CHECK(s.curve.back() == Vec2(1.0, 0));
}

TEST_CASE("small step follows the explicit velocity") {
    // One implicit step with small tau vs tau * (-grad E / w) at interior nodes.
    const DiscreteCurve c = bumped(DiscreteCurve::segment({0, 0}, {1.0, 0}, 128), 0.1);
    const auto w = dual_weights(c.points());
    const Eigen::VectorXd g = discrete_energy_gradient(c.points(), 1.0);
    FlowConfig cfg;
    cfg.N = 128;
    cfg.adaptive = false;
    cfg.innerTol = 1e-12;
    // tau well below h^4 so the step is not yet stiff
    double prevErr = 0.0;
    for (double tau : {1e-11, 5e-12}) {
        double h = tau;
        const FlowState s = step(make_state(c, 0.0, 1.0), h, cfg);
        REQUIRE(h == tau);
        double err = 0.0, scale = 0.0;
        for (int i = 1; i < 128; ++i) {
            const Vec2 n = (c[i + 1] - c[i - 1]).normalized();
            const Vec2 nrm(-n.y(), n.x());
            const Vec2 v = -Vec2(g[2 * i], g[2 * i + 1]) / w[i];
            const double predicted = tau * v.dot(nrm);
            const double actual = (s.curve[i] - c[i]).dot(nrm);
            err = std::max(err, std::abs(actual - predicted));
            scale = std::max(scale, std::abs(predicted));
        }
        CHECK(err <= 0.05 * scale);
        if (prevErr > 0.0) CHECK(err < prevErr);
        prevErr = err;
    }
}

TEST_CASE("run: perturbed upper arc returns to it") {
    const Catalogue cat = enumerate_low_energy(0.3);
    FlowConfig cfg;
    cfg.N = 256;
    const DiscreteCurve start = bumped(resample_uniform(cat.arcPlus.curve, 256), 0.02);
    const FlowResult r = run(start, cfg, &cat);
    REQUIRE(r.limitClass.has_value());
    CHECK(*r.limitClass == ElasticaClass::ArcPlus);
    CHECK(r.stop == StopReason::Stationary);
    CHECK(r.maxEnergyIncrease <= 1e-10);
    for (std::size_t i = 1; i < r.timeseries.size(); ++i)
        CHECK(r.timeseries[i].E <= r.timeseries[i - 1].E + 1e-10);
    CHECK_FALSE(r.t0Est.has_value());
    CHECK(r.snapshots.front().t == 0.0);
    CHECK(r.snapshots.back().t == r.final.t);
}

TEST_CASE("natural boundary condition at the lower-arc limit") {
    const Catalogue cat = enumerate_low_energy(0.3);
    FlowConfig cfg;
    cfg.N = 512;
    const FlowResult r = run(resample_uniform(cat.arcMinus.curve, 512), cfg, &cat);
    CHECK(natural_bc_residual(r.final) <= 1e-3);
    CHECK(r.limitClass == ElasticaClass::ArcMinus);
}

TEST_CASE("run preconditions and limits") {
    FlowConfig cfg;
    cfg.N = 64;
    PointList p = DiscreteCurve::segment({0, 0}, {1, 0}, 64).points();
    for (auto &q : p) q.x() += 0.5;
    CHECK_THROWS_AS(run(DiscreteCurve(p), cfg), PreconditionError);

    cfg.maxSteps = 3;
    const FlowResult r = run(bumped(DiscreteCurve::segment({0, 0}, {1, 0}, 64), 0.2), cfg);
    CHECK(r.stop == StopReason::StepLimit);
    CHECK(r.steps == 3);
    CHECK(r.timeseries.size() == 4);
}

TEST_CASE("detect_migration") {
    auto sample = [](double t, Location l) {
        FlowSample s;
        s.t = t;
        s.location = l;
        return s;
    };
    const std::vector<FlowSample> mig{sample(0, Location::StrictUpper), sample(1, Location::StrictUpper),
                                      sample(2, Location::Mixed), sample(3, Location::StrictLower),
                                      sample(4, Location::StrictLower)};
    const auto m = detect_migration(mig);
    REQUIRE(m.has_value());
    CHECK(m->t0 == 1.0);
    CHECK(m->t1 == 3.0);

    const std::vector<FlowSample> stay{sample(0, Location::StrictUpper), sample(1, Location::StrictUpper)};
    CHECK_FALSE(detect_migration(stay).has_value());
    const std::vector<FlowSample> back{sample(0, Location::StrictUpper), sample(1, Location::StrictLower),
                                       sample(2, Location::Mixed)};
    CHECK_FALSE(detect_migration(back).has_value());
}

TEST_CASE("classification threshold") {
    const Catalogue cat = enumerate_low_energy(0.3);
    double d = -1.0;
    CHECK(classify_limit(cat.loopMinus.curve, cat, 1e-2, &d) == ElasticaClass::LoopMinus);
    CHECK(d < 1e-12);
    CHECK_FALSE(classify_limit(bumped(cat.segment.curve, 0.1), cat).has_value());
}

TEST_CASE("lambda scaling of a single step") {
    // One step at lambda = 4 equals one lambda = 1 step on the doubled curve,
    // with time scaled by 16.
    const DiscreteCurve c = bumped(DiscreteCurve::segment({0, 0}, {0.5, 0}, 128), 0.05);
    FlowConfig a;
    a.N = 128;
    a.lambda = 4.0;
    a.innerTol = 1e-10;
    FlowConfig b = a;
    b.lambda = 1.0;
    b.innerTol = a.innerTol / 8.0;
    double ta = 1e-5, tb = 16e-5;
    const FlowState sa = step(make_state(c, 0.0, 4.0), ta, a);
    const FlowState sb = step(make_state(rescale(c, 2.0), 0.0, 1.0), tb, b);
    CHECK(max_displacement(rescale(sa.curve, 2.0), sb.curve) < 1e-9);
    CHECK(sa.report.E == doctest::Approx(2.0 * sb.report.E).epsilon(1e-10));
}
