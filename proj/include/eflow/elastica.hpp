#pragma once
// Pinned elasticae for E = B + L (lambda normalized to one): solutions of
//   -2 k_ss - k^3 + k = 0,  k(0) = k(L) = 0,
// joining (0,0) to (ell,0), found by shooting on (theta0, k'(0), L).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eflow/curve.hpp"

namespace eflow {

enum class ElasticaClass { Segment, ArcPlus, ArcMinus, LoopPlus, LoopMinus, ShorterArc, Other };

std::string to_string(ElasticaClass c);
ElasticaClass elastica_class_from_string(const std::string &s);

struct ShootingState {
    double theta0 = 0.0; // initial tangent angle
    double a = 0.0;      // k'(0)
    double length = 1.0; // total length
};

struct ElasticaTrajectory {
    DiscreteCurve curve;         // steps + 1 equally spaced samples
    std::vector<double> k;       // curvature at the samples
    std::vector<double> theta;   // tangent angle at the samples
    double ds = 0.0;
};

// RK4 integration of theta' = k, x' = cos theta, y' = sin theta, k' = w,
// w' = (k - k^3)/2 from the origin with k(0) = 0. Throws DivergenceError on a
// non-finite state and InvalidArgument for steps < 64 or length <= 0.
ElasticaTrajectory integrate_elastica(const ShootingState &state, int steps);

// B + L by Simpson quadrature of the curvature profile.
double profile_energy(const ElasticaTrajectory &traj);

struct ElasticaSolution {
    ShootingState shooting;
    DiscreteCurve curve;
    GeometricReport report;  // polyline functionals of `curve`
    double energy = 0.0;     // quadrature energy of the curvature profile
    ElasticaClass classTag = ElasticaClass::Other;
    int lobes = 0;           // interior sign changes of k, plus one
    double residual = 0.0;   // max-norm of the boundary residual
    std::vector<double> k;
    std::vector<double> theta;
};

struct ShootOptions {
    int steps = 4096;
    double tolerance = 1e-10;
    int maxIterations = 100;
};

// Newton iteration on F = (x(L) - ell, y(L), k(L)) with a finite-difference
// Jacobian. Throws ShootingFailure without convergence.
ElasticaSolution shoot_pinned(double ell, const ShootingState &seed, const ShootOptions &opts = {});

// One half-period of the curvature oscillation started with k(0) = 0,
// k'(0) = a > 0 and theta(0) = 0.
struct Lobe {
    double a = 0.0;
    double length = 0.0;      // half-period
    double tc = 0.0;          // total turning
    double bending = 0.0;     // int k^2 ds
    Vec2 chord{0.0, 0.0};     // end point
    double signedChord = 0.0; // chord projected on the mid tangent (negative for loops)
};

Lobe integrate_lobe(double a);

// Landmarks of the one-lobe family in the amplitude a = |k'(0)|.
struct LobeFamily {
    double aStar = 0.0;     // closed lobe (figure-eight half), signed chord 0
    double aPeak = 0.0;     // largest signed chord
    double chordMax = 0.0;
    std::vector<Lobe> scan; // geometric grid in a
};

// Computed once and cached.
const LobeFamily &lobe_family();

// Seed that reproduces the lobe of amplitude `a` with its chord along +x;
// negative `a` gives the mirror image.
ShootingState lobe_seed(double a);

struct Catalogue {
    double ell = 0.0;
    ElasticaSolution segment;
    ElasticaSolution arcPlus, arcMinus;
    ElasticaSolution loopPlus, loopMinus;
    std::optional<ElasticaSolution> shorterArcPlus, shorterArcMinus;

    std::vector<const ElasticaSolution *> members() const;
};

// Five lowest-energy members for 0 < ell < ell_dagger (plus the shorter arcs
// when they exist). Throws EnumerationIncomplete if a member is missing.
Catalogue enumerate_low_energy(double ell, const ShootOptions &opts = {});

// Just the upper loop, skipping the rest of the catalogue.
ElasticaSolution upper_loop(double ell, const ShootOptions &opts = {});

struct FigureEightData {
    DiscreteCurve curve;
    double rStar = 0.0;
    double eStar = 0.0;
    ElasticaSolution solution;
};

// Half-fold figure-eight: closed lobe, horizontally symmetric, in the upper
// half-plane, with positive total curvature.
FigureEightData figure_eight(const ShootOptions &opts = {.steps = 8192});

// sqrt(0.32241)
double threshold_ell();

// Endpoint distance at which the shorter arc and the loop have equal energy.
double recompute_threshold_ell();

struct LoopSweepRow {
    double ell = 0.0;
    double E = 0.0;
    double TC = 0.0;
    double dE = 0.0;  // |E - eStar|
    double dTC = 0.0; // |TC - rStar|
};

std::vector<LoopSweepRow> loop_convergence_sweep(std::span<const double> ells,
                                                 const FigureEightData &fig,
                                                 const ShootOptions &opts = {});

// Central-difference residual max |-2k'' - k^3 + k| over interior samples.
double ode_residual(const ElasticaSolution &sol);

} // namespace eflow
