#pragma once
// Minimizing-movement discretization of the penalized elastic flow with
// pinned endpoints:
//   p^{n+1} = argmin_p  E(p) + 1/(2 tau) sum_i w_i |p_i - p_i^n|^2,
// w_i the dual arclength weights of p^n. Every accepted step decreases the
// discrete energy. Curvature at the ends is left free, so it only vanishes at
// stationarity.

#include <optional>
#include <string>
#include <vector>

#include "eflow/curve.hpp"
#include "eflow/elastica.hpp"
#include "eflow/errors.hpp"

namespace eflow {

// Largest energy increase a remesh may cause.
inline constexpr double kRemeshSlack = 1e-10;

struct FlowConfig {
    double tau = 1e-4;         // initial step
    double tauMax = 0.5;       // adaptive growth cap
    double tauGrowth = 1.25;   // after an easy inner solve
    bool adaptive = true;
    int N = 256;               // edges; the initial curve is resampled if it differs
    double tMax = 1e3;
    int maxSteps = 200000;
    double gradTol = 1e-6;     // stop when max displacement / tau falls below
    int remeshEvery = 50;      // edge-ratio check interval (0 disables)
    double remeshRatio = 4.0;  // remesh once max h / min h exceeds this
    double innerTol = 1e-7;    // max |grad| / w over interior nodes
    int innerMaxIter = 50;
    double lambda = 1.0;
    int snapshotEvery = 0;     // 0: only initial, location changes and final
    bool classify = true;

    void validate() const;
};

struct FlowState {
    DiscreteCurve curve;
    double t = 0.0;
    GeometricReport report;
    HalfPlaneLocation location;
};

FlowState make_state(DiscreteCurve curve, double t, double lambda);

struct FlowSample {
    double t = 0.0;
    double E = 0.0;
    double TC = 0.0;
    double yMin = 0.0;
    double yMax = 0.0;
    Location location = Location::Mixed;
};

struct RemeshEvent {
    int step = 0;
    double t = 0.0;
    double energyBefore = 0.0;
    double energyAfter = 0.0;
};

struct Snapshot {
    double t = 0.0;
    DiscreteCurve curve;
};

enum class StopReason { Stationary, TimeLimit, StepLimit };

std::string to_string(StopReason r);

struct FlowResult {
    std::vector<FlowSample> timeseries;
    std::vector<Snapshot> snapshots;
    std::vector<RemeshEvent> remeshes;
    FlowState final;
    std::optional<ElasticaClass> limitClass; // nullopt: unresolved
    double limitDistance = 0.0;              // Hausdorff distance to the closest catalogue member
    std::optional<double> t0Est, t1Est;
    int steps = 0;
    int rejectedSteps = 0;
    int deferredRemeshes = 0; // remeshes skipped because they would raise E
    double maxEnergyIncrease = 0.0; // over accepted steps, excluding remeshes
    StopReason stop = StopReason::TimeLimit;
};

// Thrown by run(); carries what was computed before the failure.
class FlowAborted : public Error {
  public:
    enum class Cause { Step, Degeneracy };
    FlowAborted(const std::string &what, Cause cause, FlowResult partial)
        : Error(what), cause(cause), partial(std::move(partial)) {}
    Cause cause;
    FlowResult partial;
};

// One accepted minimizing-movement step. `tau` is in/out: halved (at most 20
// times) until the inner solve converges. Throws StepFailure or
// DegeneracyError (edge below 1e-8).
FlowState step(const FlowState &state, double &tau, const FlowConfig &config, int *innerIterations = nullptr);

// Largest |k| extrapolated linearly to the two endpoints.
double natural_bc_residual(const FlowState &state);

// Classifies the limit against `catalogue` when given, else computes one for
// the endpoint distance (lambda taken into account).
FlowResult run(const DiscreteCurve &initial, const FlowConfig &config,
               const Catalogue *catalogue = nullptr);

struct MigrationTimes {
    double t0 = 0.0; // last time of the strictly-upper prefix
    double t1 = 0.0; // first time of the strictly-lower suffix
};

std::optional<MigrationTimes> detect_migration(const std::vector<FlowSample> &timeseries);

// Closest catalogue member by Hausdorff distance, if within `threshold`.
std::optional<ElasticaClass> classify_limit(const DiscreteCurve &curve, const Catalogue &catalogue,
                                            double threshold = 1e-2, double *distance = nullptr);

} // namespace eflow
