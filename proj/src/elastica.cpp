#include "eflow/elastica.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>

namespace eflow {

namespace {

// (theta, x, y, k, w, int k^2)
using State = std::array<double, 6>;

State rhs(const State &s) {
    const double k = s[3];
    return {k, std::cos(s[0]), std::sin(s[0]), s[4], 0.5 * (k - k * k * k), k * k};
}

State axpy(const State &s, double h, const State &d) {
    State out;
    for (int i = 0; i < 6; ++i) out[i] = s[i] + h * d[i];
    return out;
}

State rk4(const State &s, double h) {
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * h, k1));
    const State k3 = rhs(axpy(s, 0.5 * h, k2));
    const State k4 = rhs(axpy(s, h, k3));
    State out;
    for (int i = 0; i < 6; ++i) out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

bool finite(const State &s) {
    for (double v : s)
        if (!std::isfinite(v)) return false;
    return true;
}

State initial_state(const ShootingState &st) { return {st.theta0, 0.0, 0.0, 0.0, st.a, 0.0}; }

State integrate_end(const ShootingState &st, int steps) {
    State s = initial_state(st);
    const double h = st.length / steps;
    for (int i = 0; i < steps; ++i) s = rk4(s, h);
    return s;
}

Eigen::Vector3d boundary_residual(double ell, const ShootingState &st, int steps) {
    if (!(st.length > 0.0))
        return Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    const State s = integrate_end(st, steps);
    if (!finite(s)) return Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    return {s[1] - ell, s[2], s[3]};
}

double wrap_angle(double t) {
    t = std::remainder(t, 2.0 * kPi);
    return t <= -kPi ? t + 2.0 * kPi : t;
}

int count_lobes(const std::vector<double> &k) {
    double kmax = 0.0;
    for (double v : k) kmax = std::max(kmax, std::abs(v));
    if (kmax == 0.0) return 0;
    const double cut = 1e-6 * kmax;
    int sign = 0, changes = 0;
    for (double v : k) {
        if (std::abs(v) <= cut) continue;
        const int s = v > 0.0 ? 1 : -1;
        if (sign != 0 && s != sign) ++changes;
        sign = s;
    }
    return changes + 1;
}

ElasticaClass classify(const ElasticaSolution &sol) {
    double kmax = 0.0;
    for (double v : sol.k) kmax = std::max(kmax, std::abs(v));
    if (kmax < 1e-8) return ElasticaClass::Segment;
    if (sol.lobes != 1) return ElasticaClass::Other;
    const LobeFamily &fam = lobe_family();
    const double amp = std::abs(sol.shooting.a);
    const double tc = sol.theta.back() - sol.theta.front();
    const double rel = 1e-6 * fam.aStar;
    if (amp <= fam.aStar + rel) return tc > 0.0 ? ElasticaClass::LoopPlus : ElasticaClass::LoopMinus;
    if (amp <= fam.aPeak) return tc < 0.0 ? ElasticaClass::ArcPlus : ElasticaClass::ArcMinus;
    return ElasticaClass::ShorterArc;
}

template <class F> double find_root(F f, double lo, double hi) {
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
}

// Amplitude in (lo, hi) (bracketed on the cached scan) where signed chord = target.
std::optional<double> chord_root(double target, double lo, double hi) {
    const LobeFamily &fam = lobe_family();
    const auto &scan = fam.scan;
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
        const double a0 = std::max(scan[i].a, lo), a1 = std::min(scan[i + 1].a, hi);
        if (!(a1 > a0)) continue;
        const double f0 = (a0 == scan[i].a ? scan[i].signedChord : integrate_lobe(a0).signedChord) - target;
        const double f1 = (a1 == scan[i + 1].a ? scan[i + 1].signedChord : integrate_lobe(a1).signedChord) - target;
        if (f0 == 0.0) return a0;
        if ((f0 < 0.0) != (f1 < 0.0))
            return find_root([&](double a) { return integrate_lobe(a).signedChord - target; }, a0, a1);
    }
    return std::nullopt;
}

} // namespace

std::string to_string(ElasticaClass c) {
    switch (c) {
    case ElasticaClass::Segment: return "seg";
    case ElasticaClass::ArcPlus: return "arc+";
    case ElasticaClass::ArcMinus: return "arc-";
    case ElasticaClass::LoopPlus: return "loop+";
    case ElasticaClass::LoopMinus: return "loop-";
    case ElasticaClass::ShorterArc: return "shorter-arc";
    case ElasticaClass::Other: return "other";
    }
    return "other";
}

ElasticaClass elastica_class_from_string(const std::string &s) {
    for (auto c : {ElasticaClass::Segment, ElasticaClass::ArcPlus, ElasticaClass::ArcMinus,
                   ElasticaClass::LoopPlus, ElasticaClass::LoopMinus, ElasticaClass::ShorterArc,
                   ElasticaClass::Other})
        if (to_string(c) == s) return c;
    throw InvalidArgument("unknown elastica class: " + s);
}

ElasticaTrajectory integrate_elastica(const ShootingState &state, int steps) {
    if (steps < 64) throw InvalidArgument("integrate_elastica: need at least 64 steps");
    if (!(state.length > 0.0)) throw InvalidArgument("integrate_elastica: length must be positive");
    ElasticaTrajectory out;
    out.ds = state.length / steps;
    PointList pts(steps + 1);
    out.k.resize(steps + 1);
    out.theta.resize(steps + 1);
    State s = initial_state(state);
    for (int i = 0;; ++i) {
        if (!finite(s)) throw DivergenceError("integrate_elastica: non-finite state");
        pts[i] = Vec2(s[1], s[2]);
        out.k[i] = s[3];
        out.theta[i] = s[0];
        if (i == steps) break;
        s = rk4(s, out.ds);
    }
    out.curve = DiscreteCurve(std::move(pts));
    return out;
}

double profile_energy(const ElasticaTrajectory &traj) {
    const int n = static_cast<int>(traj.k.size()) - 1;
    auto f = [&](int i) { return traj.k[i] * traj.k[i]; };
    double b = 0.0;
    if (n % 2 == 0) {
        for (int i = 0; i < n; i += 2) b += f(i) + 4.0 * f(i + 1) + f(i + 2);
        b *= traj.ds / 3.0;
    } else {
        for (int i = 0; i < n; ++i) b += 0.5 * (f(i) + f(i + 1));
        b *= traj.ds;
    }
    return b + traj.ds * n;
}

ElasticaSolution shoot_pinned(double ell, const ShootingState &seed, const ShootOptions &opts) {
    if (!std::isfinite(seed.theta0) || !std::isfinite(seed.a) || !std::isfinite(seed.length))
        throw InvalidArgument("shoot_pinned: seed must be finite");
    Eigen::Vector3d z(seed.theta0, seed.a, seed.length);
    auto F = [&](const Eigen::Vector3d &v) {
        return boundary_residual(ell, {v[0], v[1], v[2]}, opts.steps);
    };

    Eigen::Vector3d f = F(z);
    bool converged = f.lpNorm<Eigen::Infinity>() <= opts.tolerance;
    for (int it = 0; it < opts.maxIterations && !converged; ++it) {
        if (!f.allFinite()) break;
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            const double d = 1e-6 * std::max(1.0, std::abs(z[j]));
            Eigen::Vector3d zp = z, zm = z;
            zp[j] += d;
            zm[j] -= d;
            J.col(j) = (F(zp) - F(zm)) / (2.0 * d);
        }
        if (!J.allFinite()) break;
        const Eigen::Vector3d step = J.completeOrthogonalDecomposition().solve(-f);
        double alpha = 1.0;
        bool moved = false;
        for (int k = 0; k < 40; ++k) {
            const Eigen::Vector3d zt = z + alpha * step;
            const Eigen::Vector3d ft = F(zt);
            if (ft.allFinite() && ft.norm() < f.norm()) {
                z = zt;
                f = ft;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
        converged = f.lpNorm<Eigen::Infinity>() <= opts.tolerance;
    }
    if (!converged)
        throw ShootingFailure("shoot_pinned: no convergence at ell=" + std::to_string(ell) +
                              " (residual " + std::to_string(f.norm()) + ")");

    ElasticaSolution sol;
    sol.shooting = {wrap_angle(z[0]), z[1], z[2]};
    ElasticaTrajectory traj = integrate_elastica(sol.shooting, opts.steps);
    traj.curve.mutable_points().back() = Vec2(ell, 0.0);
    sol.residual = f.lpNorm<Eigen::Infinity>();
    sol.energy = profile_energy(traj);
    sol.report = report(traj.curve, 1.0);
    sol.curve = std::move(traj.curve);
    sol.k = std::move(traj.k);
    sol.theta = std::move(traj.theta);
    sol.lobes = count_lobes(sol.k);
    sol.classTag = classify(sol);
    return sol;
}

Lobe integrate_lobe(double a) {
    if (!(a > 0.0)) throw InvalidArgument("integrate_lobe: amplitude must be positive");
    const double h = 0.004 / std::max(1.0, std::sqrt(2.0 * a));
    State s = {0.0, 0.0, 0.0, 0.0, a, 0.0};
    double length = 0.0;
    for (int i = 0; i < 10'000'000; ++i) {
        const State next = rk4(s, h);
        if (!finite(next)) throw DivergenceError("integrate_lobe: non-finite state");
        if (i > 0 && next[3] <= 0.0) {
            // Locate k = 0 inside the last step by bisection on its length.
            double lo = 0.0, hi = h;
            for (int b = 0; b < 60; ++b) {
                const double mid = 0.5 * (lo + hi);
                (rk4(s, mid)[3] > 0.0 ? lo : hi) = mid;
            }
            const double last = 0.5 * (lo + hi);
            s = rk4(s, last);
            length += last;
            break;
        }
        s = next;
        length += h;
    }
    Lobe out;
    out.a = a;
    out.length = length;
    out.tc = s[0];
    out.bending = s[5];
    out.chord = Vec2(s[1], s[2]);
    out.signedChord = out.chord.dot(Vec2(std::cos(0.5 * out.tc), std::sin(0.5 * out.tc)));
    return out;
}

const LobeFamily &lobe_family() {
    static const LobeFamily family = [] {
        LobeFamily fam;
        const int perDecade = 40;
        for (int i = 0; i <= 7 * perDecade; ++i) fam.scan.push_back(integrate_lobe(std::pow(10.0, -4.0 + static_cast<double>(i) / perDecade)));
        std::size_t star = 0, peak = 0;
        for (std::size_t i = 0; i + 1 < fam.scan.size(); ++i)
            if (fam.scan[i].signedChord < 0.0 && fam.scan[i + 1].signedChord >= 0.0) star = i;
        for (std::size_t i = 0; i < fam.scan.size(); ++i)
            if (fam.scan[i].signedChord > fam.scan[peak].signedChord) peak = i;
        fam.aStar = find_root([](double a) { return integrate_lobe(a).signedChord; }, fam.scan[star].a,
                              fam.scan[star + 1].a);
        const auto best = boost::math::tools::brent_find_minima(
            [](double a) { return -integrate_lobe(a).signedChord; }, fam.scan[peak - 1].a, fam.scan[peak + 1].a, 40);
        fam.aPeak = best.first;
        fam.chordMax = -best.second;
        return fam;
    }();
    return family;
}

ShootingState lobe_seed(double a) {
    const Lobe lobe = integrate_lobe(std::abs(a));
    const double theta0 = wrap_angle(-std::atan2(lobe.chord.y(), lobe.chord.x()));
    if (a > 0.0) return {theta0, lobe.a, lobe.length};
    return {-theta0, -lobe.a, lobe.length};
}

std::vector<const ElasticaSolution *> Catalogue::members() const {
    std::vector<const ElasticaSolution *> out{&segment, &arcPlus, &arcMinus, &loopPlus, &loopMinus};
    if (shorterArcPlus) out.push_back(&*shorterArcPlus);
    if (shorterArcMinus) out.push_back(&*shorterArcMinus);
    return out;
}

namespace {

ElasticaSolution shoot_expecting(double ell, const ShootingState &seed, ElasticaClass expected,
                                 const ShootOptions &opts) {
    ElasticaSolution sol = shoot_pinned(ell, seed, opts);
    if (sol.classTag != expected)
        throw EnumerationIncomplete("enumerate_low_energy: expected " + to_string(expected) + " at ell=" +
                                    std::to_string(ell) + ", found " + to_string(sol.classTag));
    return sol;
}

void require_range(double ell) {
    if (!(ell > 0.0 && ell < threshold_ell()))
        throw PreconditionError("ell must lie in (0, ell_dagger), got " + std::to_string(ell));
}

} // namespace

ElasticaSolution upper_loop(double ell, const ShootOptions &opts) {
    require_range(ell);
    const auto aLoop = chord_root(-ell, 0.0, lobe_family().aStar);
    if (!aLoop) throw EnumerationIncomplete("upper_loop: no loop at ell=" + std::to_string(ell));
    // Positive curvature + loop orientation = upper loop.
    return shoot_expecting(ell, lobe_seed(*aLoop), ElasticaClass::LoopPlus, opts);
}

Catalogue enumerate_low_energy(double ell, const ShootOptions &opts) {
    require_range(ell);
    const LobeFamily &fam = lobe_family();
    Catalogue cat;
    cat.ell = ell;
    cat.segment = shoot_expecting(ell, {0.0, 0.0, ell}, ElasticaClass::Segment, opts);

    const auto aLoop = chord_root(-ell, 0.0, fam.aStar);
    const auto aArc = chord_root(ell, fam.aStar, fam.aPeak);
    if (!aLoop || !aArc)
        throw EnumerationIncomplete("enumerate_low_energy: missing loop or arc at ell=" + std::to_string(ell));
    cat.loopPlus = shoot_expecting(ell, lobe_seed(*aLoop), ElasticaClass::LoopPlus, opts);
    cat.loopMinus = shoot_expecting(ell, lobe_seed(-*aLoop), ElasticaClass::LoopMinus, opts);
    // Positive curvature with the arc orientation lies below the axis.
    cat.arcMinus = shoot_expecting(ell, lobe_seed(*aArc), ElasticaClass::ArcMinus, opts);
    cat.arcPlus = shoot_expecting(ell, lobe_seed(-*aArc), ElasticaClass::ArcPlus, opts);

    if (const auto aShort = chord_root(ell, fam.aPeak, std::numeric_limits<double>::infinity())) {
        try {
            cat.shorterArcMinus = shoot_pinned(ell, lobe_seed(*aShort), opts);
            cat.shorterArcPlus = shoot_pinned(ell, lobe_seed(-*aShort), opts);
        } catch (const ShootingFailure &) {
            cat.shorterArcMinus.reset();
            cat.shorterArcPlus.reset();
        }
    }
    return cat;
}

FigureEightData figure_eight(const ShootOptions &opts) {
    const LobeFamily &fam = lobe_family();
    const Lobe lobe = integrate_lobe(fam.aStar);
    ElasticaSolution sol = shoot_pinned(0.0, {kPi - 0.5 * lobe.tc, fam.aStar, lobe.length}, opts);
    if (sol.shooting.a < 0.0)
        sol = shoot_pinned(0.0, {-sol.shooting.theta0, -sol.shooting.a, sol.shooting.length}, opts);

    // Symmetric placement: the midpoint tangent points along -x.
    const double tc = sol.theta.back() - sol.theta.front();
    sol.shooting.theta0 = kPi - 0.5 * tc;
    ElasticaTrajectory traj = integrate_elastica(sol.shooting, opts.steps);
    traj.curve.mutable_points().back() = Vec2(0.0, 0.0);
    sol.energy = profile_energy(traj);
    sol.report = report(traj.curve, 1.0);
    sol.curve = traj.curve;
    sol.k = std::move(traj.k);
    sol.theta = std::move(traj.theta);
    sol.lobes = count_lobes(sol.k);
    sol.classTag = ElasticaClass::LoopPlus;

    FigureEightData fig;
    fig.curve = std::move(traj.curve);
    fig.rStar = sol.theta.back() - sol.theta.front();
    fig.eStar = sol.energy;
    fig.solution = std::move(sol);
    return fig;
}

double threshold_ell() { return std::sqrt(0.32241); }

double recompute_threshold_ell() {
    const LobeFamily &fam = lobe_family();
    auto energyGap = [&](double ell) {
        const auto aShort = chord_root(ell, fam.aPeak, std::numeric_limits<double>::infinity());
        const auto aLoop = chord_root(-ell, 0.0, fam.aStar);
        if (!aShort || !aLoop) throw EnumerationIncomplete("recompute_threshold_ell: missing branch");
        const Lobe s = integrate_lobe(*aShort), l = integrate_lobe(*aLoop);
        return (s.bending + s.length) - (l.bending + l.length);
    };
    return find_root(energyGap, 0.3, 0.999 * fam.chordMax);
}

std::vector<LoopSweepRow> loop_convergence_sweep(std::span<const double> ells, const FigureEightData &fig,
                                                 const ShootOptions &opts) {
    std::vector<LoopSweepRow> rows;
    for (double ell : ells) {
        const ElasticaSolution loop = upper_loop(ell, opts);
        LoopSweepRow row;
        row.ell = ell;
        row.E = loop.energy;
        row.TC = loop.theta.back() - loop.theta.front();
        row.dE = std::abs(row.E - fig.eStar);
        row.dTC = std::abs(row.TC - fig.rStar);
        rows.push_back(row);
    }
    return rows;
}

double ode_residual(const ElasticaSolution &sol) {
    const auto &k = sol.k;
    const double ds = sol.shooting.length / (static_cast<double>(k.size()) - 1.0);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < k.size(); ++i) {
        const double kss = (k[i + 1] - 2.0 * k[i] + k[i - 1]) / (ds * ds);
        worst = std::max(worst, std::abs(-2.0 * kss - k[i] * k[i] * k[i] + k[i]));
    }
    return worst;
}

} // namespace eflow
