#include "eflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eflow/discrete_energy.hpp"
#include "eflow/newton.hpp"

namespace eflow {

namespace {

constexpr double kMinEdge = 1e-8;

double min_edge(const PointList &p) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) m = std::min(m, (p[i + 1] - p[i]).norm());
    return m;
}

// Interior nodes move along fixed unit normals: p_i = old_i + s_i n_i.
struct NormalChart {
    PointList base;
    std::vector<Vec2> normal;

    explicit NormalChart(const PointList &p) : base(p), normal(p.size(), Vec2::Zero()) {
        for (std::size_t i = 1; i + 1 < p.size(); ++i) {
            const Vec2 t = (p[i] - p[i - 1]).normalized() + (p[i + 1] - p[i]).normalized();
            normal[i] = t.norm() > 1e-12 ? Vec2(-t.y(), t.x()).normalized()
                                         : Vec2(-(p[i] - p[i - 1]).y(), (p[i] - p[i - 1]).x()).normalized();
        }
    }

    int size() const { return static_cast<int>(base.size()) - 2; }

    PointList points(const Eigen::VectorXd &s) const {
        PointList p = base;
        for (int i = 1; i + 1 < static_cast<int>(p.size()); ++i) p[i] += s[i - 1] * normal[i];
        return p;
    }
};

} // namespace

void FlowConfig::validate() const {
    if (!(tau > 0.0) || !(tauMax >= tau)) throw InvalidArgument("FlowConfig: need 0 < tau <= tauMax");
    if (N < 64) throw InvalidArgument("FlowConfig: N must be at least 64");
    if (!(gradTol > 0.0)) throw InvalidArgument("FlowConfig: gradTol must be positive");
    if (!(lambda > 0.0)) throw InvalidArgument("FlowConfig: lambda must be positive");
    if (!(tMax > 0.0) || maxSteps < 1) throw InvalidArgument("FlowConfig: empty horizon");
    if (!(innerTol > 0.0) || innerMaxIter < 1) throw InvalidArgument("FlowConfig: bad inner-solve controls");
    if (remeshEvery < 0 || !(remeshRatio > 1.0)) throw InvalidArgument("FlowConfig: bad remesh controls");
    if (!(tauGrowth >= 1.0)) throw InvalidArgument("FlowConfig: tauGrowth must be >= 1");
}

std::string to_string(StopReason r) {
    switch (r) {
    case StopReason::Stationary: return "stationary";
    case StopReason::TimeLimit: return "time-limit";
    case StopReason::StepLimit: return "step-limit";
    }
    return "?";
}

FlowState make_state(DiscreteCurve curve, double t, double lambda) {
    FlowState s;
    s.report = report(curve, lambda);
    s.location = half_plane_location(curve);
    s.curve = std::move(curve);
    s.t = t;
    return s;
}

FlowState step(const FlowState &state, double &tau, const FlowConfig &config, int *innerIterations) {
    const PointList &old = state.curve.points();
    const int n = static_cast<int>(old.size());
    const std::vector<double> w = dual_weights(old);
    const double lambda = config.lambda;
    const NormalChart chart(old);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(chart.size());

    for (int attempt = 0; attempt <= 20; ++attempt) {
        const double invTau = 1.0 / tau;
        NewtonProblem prob;
        prob.value = [&](const Eigen::VectorXd &x) {
            const PointList p = chart.points(x);
            if (!(min_edge(p) > kMinEdge)) return std::numeric_limits<double>::infinity();
            double prox = 0.0;
            for (int i = 1; i + 1 < n; ++i) prox += w[i] * x[i - 1] * x[i - 1];
            return discrete_energy(p, lambda) + 0.5 * invTau * prox;
        };
        prob.gradient = [&](const Eigen::VectorXd &x) {
            const Eigen::VectorXd g = discrete_energy_gradient(chart.points(x), lambda);
            Eigen::VectorXd out(x.size());
            for (int i = 1; i + 1 < n; ++i)
                out[i - 1] = chart.normal[i].dot(g.segment<2>(2 * i)) + invTau * w[i] * x[i - 1];
            return out;
        };
        prob.model = [&](const Eigen::VectorXd &x) {
            const Triplets all = discrete_energy_hessian(chart.points(x), lambda);
            Triplets lower;
            lower.reserve(all.size() / 2 + x.size());
            for (const auto &t : all) {
                const int i = t.row() / 2, j = t.col() / 2;
                if (i < 1 || j < 1 || i > n - 2 || j > n - 2 || i < j) continue;
                lower.emplace_back(i - 1, j - 1,
                                   chart.normal[i][t.row() % 2] * t.value() * chart.normal[j][t.col() % 2]);
            }
            for (int i = 1; i + 1 < n; ++i) lower.emplace_back(i - 1, i - 1, invTau * w[i]);
            NewtonModel m;
            m.K.resize(x.size(), x.size());
            m.K.setFromTriplets(lower.begin(), lower.end());
            return m;
        };
        prob.stationarity = [&](const Eigen::VectorXd &g) {
            double s = 0.0;
            for (int i = 1; i + 1 < n; ++i) s = std::max(s, std::abs(g[i - 1]) / w[i]);
            return s;
        };

        NewtonOptions nopts;
        nopts.tolerance = config.innerTol;
        nopts.maxIterations = config.innerMaxIter;
        nopts.acceptRoundoff = true;
        const NewtonResult nr = newton_minimize(prob, x0, nopts);
        if (nr.converged) {
            PointList p = chart.points(nr.x);
            if (!(min_edge(p) > kMinEdge)) throw DegeneracyError("flow step: edge collapsed below 1e-8");
            FlowState next = make_state(DiscreteCurve(std::move(p)), state.t + tau, lambda);
            if (next.report.E > state.report.E + 1e-12) {
                tau *= 0.5;
                continue;
            }
            if (innerIterations) *innerIterations = nr.iterations;
            return next;
        }
        tau *= 0.5;
    }
    throw StepFailure("flow step: inner solve failed after 20 step reductions");
}

double natural_bc_residual(const FlowState &state) { return end_curvature_residual(state.curve); }

std::optional<MigrationTimes> detect_migration(const std::vector<FlowSample> &ts) {
    if (ts.empty()) return std::nullopt;
    std::size_t upper = 0;
    while (upper < ts.size() && ts[upper].location == Location::StrictUpper) ++upper;
    std::size_t lower = ts.size();
    while (lower > 0 && ts[lower - 1].location == Location::StrictLower) --lower;
    if (upper == 0 || lower == ts.size() || upper > lower) return std::nullopt;
    MigrationTimes m{ts[upper - 1].t, ts[lower].t};
    if (!(m.t0 < m.t1)) return std::nullopt;
    return m;
}

std::optional<ElasticaClass> classify_limit(const DiscreteCurve &curve, const Catalogue &catalogue,
                                            double threshold, double *distance) {
    double best = std::numeric_limits<double>::infinity();
    std::optional<ElasticaClass> tag;
    for (const ElasticaSolution *s : catalogue.members()) {
        const double d = hausdorff_distance(curve, s->curve);
        if (d < best) {
            best = d;
            tag = s->classTag;
        }
    }
    if (distance) *distance = best;
    if (!(best < threshold)) return std::nullopt;
    return tag;
}

FlowResult run(const DiscreteCurve &initial, const FlowConfig &config, const Catalogue *catalogue) {
    config.validate();
    initial.require_immersed();
    if (initial.front().norm() > 1e-12 || std::abs(initial.back().y()) > 1e-12)
        throw PreconditionError("flow run: endpoints must be (0,0) and (ell,0)");

    DiscreteCurve start = initial.edges() == config.N ? initial : resample_uniform(initial, config.N);
    FlowResult res;
    FlowState state = make_state(std::move(start), 0.0, config.lambda);

    auto record = [&](const FlowState &s) {
        res.timeseries.push_back({s.t, s.report.E, s.report.TC, s.report.yMin, s.report.yMax, s.location.tag});
    };
    record(state);
    res.snapshots.push_back({state.t, state.curve});

    double tau = config.tau;
    try {
        while (true) {
            if (state.t >= config.tMax - 1e-14) {
                res.stop = StopReason::TimeLimit;
                break;
            }
            if (res.steps >= config.maxSteps) {
                res.stop = StopReason::StepLimit;
                break;
            }
            double h = std::min(tau, config.tMax - state.t);
            const double requested = h;
            int iters = 0;
            FlowState next = step(state, h, config, &iters);
            if (h < requested) ++res.rejectedSteps;
            const double moved = max_displacement(state.curve, next.curve);
            res.maxEnergyIncrease = std::max(res.maxEnergyIncrease, next.report.E - state.report.E);
            const Location before = state.location.tag;
            state = std::move(next);
            ++res.steps;
            record(state);

            if (config.remeshEvery > 0 && res.steps % config.remeshEvery == 0 &&
                edge_ratio(state.curve) > config.remeshRatio) {
                // Only remeshes that do not raise the energy are taken, so the
                // energy column stays monotone; others wait for the next check.
                FlowState fresh = make_state(resample_uniform(state.curve, config.N), state.t, config.lambda);
                if (fresh.report.E <= state.report.E + kRemeshSlack) {
                    res.remeshes.push_back({res.steps, state.t, state.report.E, fresh.report.E});
                    state = std::move(fresh);
                } else {
                    ++res.deferredRemeshes;
                }
            }
            if (state.location.tag != before ||
                (config.snapshotEvery > 0 && res.steps % config.snapshotEvery == 0))
                res.snapshots.push_back({state.t, state.curve});

            if (moved / h < config.gradTol) {
                res.stop = StopReason::Stationary;
                break;
            }
            if (config.adaptive) {
                tau = h;
                if (iters <= 4) tau = std::min(tau * config.tauGrowth, config.tauMax);
            }
        }
    } catch (const StepFailure &e) {
        res.final = state;
        throw FlowAborted(e.what(), FlowAborted::Cause::Step, std::move(res));
    } catch (const DegeneracyError &e) {
        res.final = state;
        throw FlowAborted(e.what(), FlowAborted::Cause::Degeneracy, std::move(res));
    }

    if (res.snapshots.back().t != state.t) res.snapshots.push_back({state.t, state.curve});
    res.final = state;
    if (auto m = detect_migration(res.timeseries)) {
        res.t0Est = m->t0;
        res.t1Est = m->t1;
    }

    if (config.classify) {
        // The catalogue lives at lambda = 1; compare in rescaled coordinates.
        const double s = std::sqrt(config.lambda);
        const DiscreteCurve scaled = rescale(state.curve, s);
        const double ell = scaled.back().x();
        std::optional<Catalogue> own;
        if (!catalogue && ell > 0.0 && ell < threshold_ell()) {
            try {
                own = enumerate_low_energy(ell);
            } catch (const Error &) {
            }
        }
        const Catalogue *cat = catalogue ? catalogue : (own ? &*own : nullptr);
        if (cat) res.limitClass = classify_limit(scaled, *cat, 1e-2, &res.limitDistance);
    }
    return res;
}

} // namespace eflow
