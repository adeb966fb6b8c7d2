#pragma once
// Constrained minimum m(ell, r) of E = B + L over curves from (0,0) to
// (ell,0) with total curvature r, and the energy-barrier constants built on it.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eflow/angle_curve.hpp"
#include "eflow/elastica.hpp"

namespace eflow {

struct MinimizeOptions {
    double tolerance = 1e-7;           // scaled Lagrangian gradient, max norm
    double constraintTolerance = 1e-9; // closure residual, max norm
    double penaltyStart = 10.0;
    double penaltyGrowth = 10.0;
    double penaltyMax = 1e6;
    int maxOuter = 60;
    int maxInner = 200;
    // Seeds are first solved with this many intervals (0: skip) and only the
    // `refineCandidates` lowest distinct minima are refined.
    int coarseIntervals = 128;
    int refineCandidates = 2;
};

struct ConstrainedMinimum {
    AngleCurve curve;
    double m = 0.0;
    double constraintResidual = 0.0;
    double stationarity = 0.0;
    Vec2 multipliers{0.0, 0.0};
    int seedIndex = -1;
    int convergedSeeds = 0;
};

// Augmented-Lagrangian minimization from every seed; returns the best
// converged result. Seeds are re-sampled to the first seed's resolution and
// get their `r` replaced by the target. If no coarse candidate refines
// successfully, every seed is retried at full resolution. Throws OptimizationFailure if no seed
// converges and LengthDegeneracy if the length collapses below 1e-6.
ConstrainedMinimum minimize_constrained(double ell, double r, std::span<const AngleCurve> seeds,
                                        const MinimizeOptions &opts = {});

// Reference shapes used to build seed banks.
struct SeedContext {
    std::optional<FigureEightData> figureEight;
    // Elastica solutions near the target ell (arcs, loops) reused as shapes.
    std::vector<ElasticaSolution> shapes;
    int randomSeeds = 4;
    std::uint64_t rngSeed = 12345;
};

// Segment/arc-, figure-eight-, elastica- and random-Fourier-shaped seeds at
// resolution `intervals`, mirrored for negative r.
std::vector<AngleCurve> seed_bank(double ell, double r, int intervals, const SeedContext &ctx);

struct BarrierGrid {
    std::vector<double> ell;
    std::vector<double> r;
    int intervals = 512;
};

// ell in [0, ellMax] with `ellPoints` points; r in [rMin, rMax] with
// `rPoints` points, plus 0, r_*/2 and r_* when inside the range.
BarrierGrid make_grid(double ellMax, int ellPoints, double rMin, double rMax, int rPoints,
                      double rStar, int intervals = 512);

struct BarrierCell {
    double ell = 0.0;
    double r = 0.0;
    double m = 0.0;
    bool converged = false;
};

struct BarrierMap {
    BarrierGrid grid;
    std::vector<BarrierCell> cells; // row-major in (ell, r)
    double rStar = 0.0;
    double eStar = 0.0;
    double mStar = 0.0;
    double c1 = 0.0;
    double ellAdmissible = 0.0;
    bool barrierVerified = false;      // m(ell, r_*/2) >= eStar + mStar/2 below c1
    bool minimalityVerified = false;   // m(0, r) >= m(0, r_*) on the r grid
    std::vector<double> loopEnergy;    // per ell, NaN where not computed

    const BarrierCell &at(std::size_t i, std::size_t j) const { return cells[i * grid.r.size() + j]; }
    // Index of r in the grid (exact match), or npos.
    std::size_t r_index(double r) const;
};

// Fills the map and the derived constants. Failed cells are kept with
// converged = false.
BarrierMap barrier_constants(const BarrierGrid &grid, const FigureEightData &fig,
                             const MinimizeOptions &opts = {});

// Largest grid ell (contiguous from the smallest positive one) with
// max_{r in [0, r_*]} m(ell, r) >= E[upper loop at ell]. Fills loopEnergy.
double admissible_ell_bound(BarrierMap &map);

struct DiscontinuityEvidence {
    double segmentValue = 0.0; // m(ell_small, 0)
    double ellSmall = 0.0;
    double originLowerEstimate = 0.0; // best value found in A_0 with r = 0
    double fenchelBound = 2.0 * kPi;
    double mHalf = 0.0; // m(0, r_*/2)
    double mStar = 0.0; // m(0, r_*)
};

DiscontinuityEvidence discontinuity_probe(const FigureEightData &fig, int intervals = 512,
                                          int randomSeeds = 12);

} // namespace eflow
