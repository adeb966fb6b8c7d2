#include <doctest.h>

#include <cmath>
#include <vector>

#include "eflow/elastica.hpp"
#include "eflow/flow.hpp"
#include "golden.hpp"

using namespace eflow;

TEST_CASE("integration symmetries") {
    SUBCASE("a = 0 gives a straight segment") {
        const auto tr = integrate_elastica({0.4, 0.0, 0.3}, 256);
        for (double k : tr.k) CHECK(k == 0.0);
        CHECK(tr.curve.back().x() == doctest::Approx(0.3 * std::cos(0.4)).epsilon(1e-12));
        CHECK(tr.curve.back().y() == doctest::Approx(0.3 * std::sin(0.4)).epsilon(1e-12));
    }
    SUBCASE("(theta0, a) and (-theta0, -a) are mirror images") {
        const auto a = integrate_elastica({0.8, 0.5, 5.0}, 512);
        const auto b = integrate_elastica({-0.8, -0.5, 5.0}, 512);
        CHECK(max_displacement(reflect(a.curve), b.curve) < 1e-13);
        CHECK(report(a.curve).TC == doctest::Approx(-report(b.curve).TC).epsilon(1e-12));
    }
    SUBCASE("quadrature energy agrees with the polyline energy") {
        const auto tr = integrate_elastica({0.78, 0.5, 5.7}, 4096);
        const double e = profile_energy(tr);
        CHECK(std::abs(report(tr.curve).E - e) < 1e-4 * e);
    }
    CHECK_THROWS_AS(integrate_elastica({0.0, 1.0, 1.0}, 32), InvalidArgument);
    CHECK_THROWS_AS(integrate_elastica({0.0, 1.0, -1.0}, 256), InvalidArgument);
}

TEST_CASE("shooting from a segment seed") {
    const auto s = shoot_pinned(0.3, {0.01, 0.0, 0.31});
    CHECK(s.classTag == ElasticaClass::Segment);
    CHECK(s.energy == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("catalogue at ell = 0.3") {
    ShootOptions o;
    o.steps = 8192;
    const Catalogue cat = enumerate_low_energy(0.3, o);
    CHECK(std::abs(cat.segment.energy - 0.3) < 1e-10);
    CHECK(cat.segment.energy < cat.arcPlus.energy);
    CHECK(cat.arcPlus.energy < cat.loopPlus.energy);
    CHECK(std::abs(cat.arcPlus.energy - cat.arcMinus.energy) < 1e-8);
    CHECK(std::abs(cat.loopPlus.energy - cat.loopMinus.energy) < 1e-8);
    CHECK(cat.arcPlus.report.TC < 0.0);
    CHECK(cat.loopPlus.report.TC > 0.0);
    CHECK(cat.arcMinus.report.TC > 0.0);
    CHECK(cat.loopMinus.report.TC < 0.0);

    CHECK(cat.arcPlus.energy == doctest::Approx(golden::kArcEnergy03).epsilon(1e-8));
    CHECK(cat.loopPlus.energy == doctest::Approx(golden::kLoopEnergy03).epsilon(1e-8));
    CHECK(cat.loopPlus.report.TC == doctest::Approx(golden::kLoopTC03).epsilon(1e-6));

    for (const ElasticaSolution *s : cat.members()) {
        CHECK(s->residual <= 1e-9);
        CHECK(ode_residual(*s) <= 1e-4);
        CHECK(std::abs(s->k.front()) <= 1e-9);
        CHECK(std::abs(s->k.back()) <= 1e-9);
    }
    if (cat.shorterArcPlus) CHECK(cat.loopPlus.energy < cat.shorterArcPlus->energy);
}

TEST_CASE("catalogue members are stationary under the flow") {
    const Catalogue cat = enumerate_low_energy(0.3);
    FlowConfig cfg;
    cfg.N = 1024;
    for (const ElasticaSolution *s : {&cat.segment, &cat.arcMinus, &cat.loopPlus}) {
        FlowState st = make_state(resample_uniform(s->curve, cfg.N), 0.0, 1.0);
        const DiscreteCurve start = st.curve;
        double tau = cfg.tau;
        for (int i = 0; i < 100; ++i) {
            int it = 0;
            st = step(st, tau, cfg, &it);
            if (it <= 4) tau = std::min(tau * cfg.tauGrowth, cfg.tauMax);
        }
        CHECK(hausdorff_distance(start, st.curve) < 1e-5);
    }
}

TEST_CASE("half-fold figure-eight") {
    const FigureEightData fig = figure_eight();
    CHECK(fig.rStar > 0.0);
    CHECK(fig.rStar == doctest::Approx(golden::kRStar).epsilon(1e-9));
    CHECK(fig.eStar == doctest::Approx(golden::kEStar).epsilon(1e-9));
    CHECK(fig.curve.front().norm() < 1e-9);
    CHECK(fig.curve.back().norm() < 1e-9);
    CHECK(report(fig.curve).yMin >= -1e-9);
    // Left-right mirror about the vertical line through the apex.
    PointList m;
    for (const auto &p : fig.curve.points()) m.emplace_back(-p.x(), p.y());
    CHECK(hausdorff_distance(fig.curve, DiscreteCurve(m)) <= 1e-6);

    const FigureEightData fine = figure_eight({.steps = 16384});
    CHECK(std::abs(fine.eStar - fig.eStar) < 1e-8);
}

TEST_CASE("threshold and loop degeneration") {
    CHECK(threshold_ell() * threshold_ell() == doctest::Approx(0.32241).epsilon(1e-12));
    CHECK(recompute_threshold_ell() == doctest::Approx(threshold_ell()).epsilon(1e-3));

    const FigureEightData fig = figure_eight();
    const std::vector<double> ells{0.2, 0.1, 0.05, 0.02, 0.01};
    const auto rows = loop_convergence_sweep(ells, fig);
    REQUIRE(rows.size() == ells.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].dE <= rows[i - 1].dE);
        CHECK(rows[i].dTC <= rows[i - 1].dTC);
    }
    CHECK(rows.back().dE < 0.02 * fig.eStar);
    CHECK(rows.back().dTC < 0.02 * fig.rStar);
    for (const auto &r : rows) {
        CHECK(r.TC > 0.5 * fig.rStar);
        CHECK(r.TC < 2.0 * fig.rStar);
    }
    CHECK_THROWS_AS(enumerate_low_energy(0.7), PreconditionError);
}

TEST_CASE("class tag strings round-trip") {
    for (auto c : {ElasticaClass::Segment, ElasticaClass::ArcPlus, ElasticaClass::ArcMinus, ElasticaClass::LoopPlus,
                   ElasticaClass::LoopMinus, ElasticaClass::ShorterArc, ElasticaClass::Other})
        CHECK(elastica_class_from_string(to_string(c)) == c);
    CHECK_THROWS_AS(elastica_class_from_string("spiral"), InvalidArgument);
}
