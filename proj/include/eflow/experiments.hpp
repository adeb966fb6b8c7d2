#pragma once
// End-to-end migration scenario: perturb the upper loop into a well-prepared
// datum, check it against the barrier constants, run the flow, and judge the
// outcome.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eflow/barrier.hpp"
#include "eflow/elastica.hpp"
#include "eflow/flow.hpp"

namespace eflow {

enum class PerturbMode { HessianDirection, DownwardBump, UpwardBump };

std::string to_string(PerturbMode m);
PerturbMode perturb_mode_from_string(const std::string &s); // "hessian", "bump", "bump-up"

enum class Verdict { Migrated, StayedUpper, ConvergedToSegment, Unresolved };

std::string to_string(Verdict v);

// Constants consumed by the scenario. Computed by barrier_refs() or read from
// a constants file.
struct BarrierRefs {
    double rStar = 0.0;
    double eStar = 0.0;
    double mStar = 0.0;
    double c1 = 0.0;            // largest probed ell with m(ell, r_*/2) >= eStar + mStar/2
    double c2 = 0.0;            // largest probed ell whose loop is within (mStar/2, r_*/4) of the figure-eight
    double ellAdmissible = 0.0; // from a full barrier map, 0 if unknown
};

// mStar from two cells at ell = 0, c1 from the r_*/2 column on `ellGrid`,
// c2 from the upper loops on the same grid.
BarrierRefs barrier_refs(const FigureEightData &fig, const std::vector<double> &ellGrid, int intervals = 512);

// Largest ell of the contiguous prefix of `ells` whose upper loop lies within
// mStar/2 of eStar in energy and r_*/4 of r_* in total curvature.
double loop_closeness_bound(const FigureEightData &fig, std::vector<double> ells, double mStar);

struct ScenarioConfig {
    double ell = 0.1;
    double lambda = 1.0;
    double eps = 0.05;
    PerturbMode mode = PerturbMode::HessianDirection;
    FlowConfig flow;
    std::uint64_t rngSeed = 1;
    std::string outputDir;

    void validate() const;
};

struct InitialChecks {
    bool energyBelowLoop = false;      // E[datum] < E[loop]
    bool tcWithinQuarterRStar = false; // TC[datum] >= TC[loop] - r_*/4
    bool strictlyUpper = false;
    double endCurvatureResidual = 0.0; // change of the end-curvature residual w.r.t. the loop
    bool endCurvatureZero = false;     // residual <= 1e-8
    bool all() const { return energyBelowLoop && tcWithinQuarterRStar && strictlyUpper && endCurvatureZero; }
};

struct InitialDatum {
    DiscreteCurve curve;
    DiscreteCurve loop; // discretized upper loop at the same resolution
    double eps = 0.0;   // after halving
    int halvings = 0;
    double loopEnergy = 0.0;
    double loopTC = 0.0;
    double energy = 0.0;
    double tc = 0.0;
    double eigenvalue = 0.0; // most negative second-variation eigenvalue (Hessian mode)
    InitialChecks checks;
};

// Works at lambda = 1. `enforceChecks = false` returns the datum at the given
// eps whatever the checks say (used for control runs); otherwise eps is
// halved up to 10 times and PreparationFailure is thrown if the checks still
// fail. The 3 nodes next to each end only rotate rigidly about the end point,
// so the discrete end curvature of the loop is kept.
InitialDatum build_initial_datum(double ell, double eps, PerturbMode mode, std::uint64_t rngSeed, int N,
                                 double rStar, bool enforceChecks = true);

struct ExperimentReport {
    ScenarioConfig config;
    InitialDatum datum;
    bool prepared = false;
    bool initialEnergyOk = false; // E[datum] < eStar + mStar/2
    bool initialTCOk = false;     // TC[datum] >= r_*/2
    bool ellWithinAdmissible = false;
    BarrierRefs refs;
    std::optional<FlowResult> flow; // times and energies in the caller's lambda units
    Verdict verdict = Verdict::Unresolved;
    bool barrierAnomaly = false;    // TC crossed r_*/2 below the barrier level
    std::vector<std::string> notes; // failures and anomalies
    double usableEll = 0.0;         // min(c1, c2)
};

// Runs at lambda = 1 on the rescaled problem and maps the flow result back.
ExperimentReport run_theorem_experiment(const ScenarioConfig &config, const BarrierRefs &refs);

struct SweepRow {
    double ell = 0.0;
    Verdict verdict = Verdict::Unresolved;
    std::optional<ElasticaClass> limitClass;
    std::optional<double> t0Est, t1Est;
    std::string note;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double largestMigrating = 0.0; // 0 if none
    double admissibleBound = 0.0;  // refs.ellAdmissible
};

SweepResult sweep_ell(const std::vector<double> &ells, const ScenarioConfig &templ, const BarrierRefs &refs);

// Writes timeseries.csv, summary.json and snapshot SVGs (initial, near t0,
// near t1, final) into config.outputDir. Returns the written paths.
std::vector<std::string> render_report(const ExperimentReport &report);

} // namespace eflow
