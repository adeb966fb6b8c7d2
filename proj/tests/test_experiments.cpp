#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eflow/experiments.hpp"
#include "eflow/io.hpp"
#include "golden.hpp"

using namespace eflow;
namespace fs = std::filesystem;

namespace {

// Barrier constants frozen from a 10x10, M = 512 map.
BarrierRefs frozen_refs() {
    BarrierRefs r;
    r.rStar = golden::kRStar;
    r.eStar = golden::kEStar;
    r.mStar = 3.56666;
    r.c1 = 0.3333;
    r.c2 = 0.3333;
    r.ellAdmissible = 0.3889;
    return r;
}

ScenarioConfig base(double ell = 0.1) {
    ScenarioConfig c;
    c.ell = ell;
    return c;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("eflow_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("mode and verdict strings") {
    for (auto m : {PerturbMode::HessianDirection, PerturbMode::DownwardBump, PerturbMode::UpwardBump})
        CHECK(perturb_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(perturb_mode_from_string("sideways"), InvalidArgument);
    CHECK(to_string(Verdict::Migrated) == "Migrated");
}

TEST_CASE("scenario validation") {
    ScenarioConfig c = base();
    CHECK_NOTHROW(c.validate());
    c.eps = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = base(-0.1);
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = base();
    c.lambda = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("prepared datum at ell = 0.1") {
    const InitialDatum d = build_initial_datum(0.1, 0.05, PerturbMode::HessianDirection, 1, 256, golden::kRStar);
    CHECK(d.checks.energyBelowLoop);
    CHECK(d.checks.tcWithinQuarterRStar);
    CHECK(d.checks.strictlyUpper);
    CHECK(d.checks.endCurvatureZero);
    CHECK(d.checks.endCurvatureResidual <= 1e-8);
    CHECK(d.halvings == 0);
    CHECK(d.eigenvalue == doctest::Approx(golden::kLoopEigen01).epsilon(1e-6));
    CHECK(d.loopEnergy == doctest::Approx(golden::kLoopEnergy01).epsilon(1e-4));
    CHECK(d.curve.front() == Vec2(0, 0));
    CHECK(d.curve.back() == Vec2(0.1, 0));
}

TEST_CASE("zero perturbation is the loop itself") {
    const InitialDatum d = build_initial_datum(0.1, 0.0, PerturbMode::HessianDirection, 1, 256, golden::kRStar, false);
    CHECK(max_displacement(d.curve, d.loop) == 0.0);
    CHECK_FALSE(d.checks.energyBelowLoop);
    CHECK_THROWS_AS(build_initial_datum(0.1, 0.0, PerturbMode::HessianDirection, 1, 256, golden::kRStar),
                    PreparationFailure);
}

TEST_CASE("energy margin is quadratic in eps along the unstable direction") {
    // margin = a eps^2 + b eps^3: the ratio for halved eps tends to 4, with
    // the deviation itself halving.
    std::vector<double> margins;
    for (double eps : {0.02, 0.01, 0.005}) {
        const InitialDatum d =
            build_initial_datum(0.1, eps, PerturbMode::HessianDirection, 1, 256, golden::kRStar, false);
        margins.push_back(d.loopEnergy - d.energy);
        CHECK(margins.back() > 0.0);
    }
    const double r1 = margins[0] / margins[1], r2 = margins[1] / margins[2];
    CHECK(std::abs(r2 - 4.0) < 0.6 * std::abs(r1 - 4.0));
    CHECK(r2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("bump data do not lower the loop energy") {
    for (auto mode : {PerturbMode::DownwardBump, PerturbMode::UpwardBump}) {
        const InitialDatum d = build_initial_datum(0.1, 0.05, mode, 1, 256, golden::kRStar, false);
        CHECK_FALSE(d.checks.energyBelowLoop);
        CHECK(d.checks.strictlyUpper);
        CHECK(d.checks.endCurvatureZero);
    }
    CHECK_THROWS_AS(build_initial_datum(0.1, 0.05, PerturbMode::DownwardBump, 1, 256, golden::kRStar),
                    PreparationFailure);
    CHECK_THROWS_AS(build_initial_datum(0.7, 0.05, PerturbMode::HessianDirection, 1, 256, golden::kRStar),
                    PreconditionError);
}

TEST_CASE("migration at ell = 0.1") {
    const ExperimentReport rep = run_theorem_experiment(base(), frozen_refs());
    CHECK(rep.prepared);
    CHECK(rep.initialEnergyOk);
    CHECK(rep.initialTCOk);
    CHECK(rep.ellWithinAdmissible);
    CHECK(rep.verdict == Verdict::Migrated);
    CHECK_FALSE(rep.barrierAnomaly);
    CHECK(rep.notes.empty());
    REQUIRE(rep.flow.has_value());
    const FlowResult &f = *rep.flow;
    REQUIRE(f.t0Est.has_value());
    REQUIRE(f.t1Est.has_value());
    CHECK(*f.t0Est < *f.t1Est);
    CHECK(f.limitClass == ElasticaClass::ArcMinus);
    CHECK(f.maxEnergyIncrease <= 1e-10);
    // Verdict from the stored timeseries alone.
    CHECK(f.timeseries.front().location == Location::StrictUpper);
    CHECK(f.timeseries.back().location == Location::StrictLower);
    for (const auto &r : f.remeshes) CHECK(r.energyAfter <= r.energyBefore + kRemeshSlack);
    for (std::size_t i = 1; i < f.timeseries.size(); ++i)
        CHECK(f.timeseries[i].E <= f.timeseries[i - 1].E + 1e-10);
}

TEST_CASE("limit class is stable under refinement") {
    ScenarioConfig c = base();
    c.flow.N = 512;
    const ExperimentReport rep = run_theorem_experiment(c, frozen_refs());
    CHECK(rep.verdict == Verdict::Migrated);
    REQUIRE(rep.flow.has_value());
    CHECK(rep.flow->limitClass == ElasticaClass::ArcMinus);
}

TEST_CASE("upward bump control stays upper") {
    ScenarioConfig c = base();
    c.mode = PerturbMode::UpwardBump;
    const ExperimentReport rep = run_theorem_experiment(c, frozen_refs());
    CHECK(rep.verdict == Verdict::StayedUpper);
    CHECK_FALSE(rep.prepared);
    REQUIRE(rep.flow.has_value());
    CHECK_FALSE(rep.flow->t1Est.has_value());
}

TEST_CASE("lambda rescaling") {
    const ExperimentReport one = run_theorem_experiment(base(0.1), frozen_refs());
    ScenarioConfig c = base(0.05);
    c.lambda = 4.0;
    c.eps = 0.025;
    c.flow.tau /= 16.0;
    c.flow.tauMax /= 16.0;
    c.flow.tMax /= 16.0;
    c.flow.gradTol *= 8.0;
    c.flow.innerTol *= 8.0;
    const ExperimentReport four = run_theorem_experiment(c, frozen_refs());
    CHECK(four.verdict == one.verdict);
    REQUIRE(one.flow.has_value());
    REQUIRE(four.flow.has_value());
    const auto &a = one.flow->timeseries, &b = four.flow->timeseries;
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(b[i].E - 2.0 * a[i].E));
        worst = std::max(worst, std::abs(b[i].TC - a[i].TC));
        worst = std::max(worst, std::abs(16.0 * b[i].t - a[i].t));
        CHECK(b[i].location == a[i].location);
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("determinism and rendering") {
    const fs::path d1 = scratch_dir("render1"), d2 = scratch_dir("render2");
    ScenarioConfig c = base();
    c.outputDir = d1.string();
    const ExperimentReport a = run_theorem_experiment(c, frozen_refs());
    const auto files = render_report(a);
    c.outputDir = d2.string();
    const ExperimentReport b = run_theorem_experiment(c, frozen_refs());
    render_report(b);

    int svgs = 0;
    for (const auto &f : files) {
        const fs::path p(f);
        if (p.extension() == ".svg") {
            ++svgs;
            CHECK(slurp(p).find("stroke-dasharray") != std::string::npos);
        }
        if (p.filename() == "summary.json") continue; // records the output directory
        CHECK(slurp(p) == slurp(d2 / p.filename()));
    }
    CHECK(svgs >= 4);
    CHECK(fs::exists(d1 / "timeseries.csv"));

    // The summary differs only in the directory.
    nlohmann::json s1 = read_json((d1 / "summary.json").string()), s2 = read_json((d2 / "summary.json").string());
    s1["config"].erase("outputDir");
    s2["config"].erase("outputDir");
    CHECK(s1 == s2);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("empty report renders a summary only") {
    ExperimentReport rep;
    rep.config = base();
    const fs::path d = scratch_dir("empty");
    rep.config.outputDir = d.string();
    const auto files = render_report(rep);
    REQUIRE(files.size() == 1);
    CHECK(fs::path(files[0]).filename() == "summary.json");
    fs::remove_all(d);
    rep.config.outputDir.clear();
    CHECK_THROWS_AS(render_report(rep), InvalidArgument);
}

TEST_CASE("sweep over small ell") {
    const SweepResult res = sweep_ell({0.05, 0.1}, base(), frozen_refs());
    REQUIRE(res.rows.size() == 2);
    for (const auto &r : res.rows) {
        CHECK(r.verdict == Verdict::Migrated);
        CHECK(r.verdict != Verdict::ConvergedToSegment);
    }
    CHECK(res.largestMigrating == doctest::Approx(0.1));
    CHECK(res.admissibleBound == doctest::Approx(0.3889));
    // Out-of-range rows are recorded, not fatal.
    const SweepResult bad = sweep_ell({0.9}, base(), frozen_refs());
    REQUIRE(bad.rows.size() == 1);
    CHECK(bad.rows[0].verdict == Verdict::Unresolved);
    CHECK_FALSE(bad.rows[0].note.empty());
}

TEST_CASE("barrier references on a short grid") {
    const BarrierRefs r = barrier_refs(figure_eight(), {0.1}, 256);
    CHECK(r.mStar == doctest::Approx(3.5667).epsilon(1e-3));
    CHECK(r.c1 == doctest::Approx(0.1));
    CHECK(r.c2 == doctest::Approx(0.1));
}
