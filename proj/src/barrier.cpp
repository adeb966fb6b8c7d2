#include "eflow/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "eflow/newton.hpp"

namespace eflow {

namespace {

// Augmented Lagrangian
//   E - mu . g + rho/2 |g|^2,  g = (closure - (ell, 0)) / L,
// over x = (phi_1..phi_{M-1}, length[, c]). The base angle is frozen when
// ell = 0, where rotations leave the problem invariant.
class AugmentedLagrangian {
  public:
    AugmentedLagrangian(double ell, double r, int intervals, double frozenC)
        : ell_(ell), r_(r), m_(intervals), freeC_(ell > 0.0), frozenC_(frozenC) {}

    int size() const { return m_ + (freeC_ ? 1 : 0); }
    int lengthIndex() const { return m_ - 1; }
    int cIndex() const { return m_; }

    Eigen::VectorXd pack(const AngleCurve &ac) const {
        Eigen::VectorXd x(size());
        for (int j = 1; j < m_; ++j) x[j - 1] = ac.phi[j];
        x[lengthIndex()] = ac.length;
        if (freeC_) x[cIndex()] = ac.c;
        return x;
    }

    AngleCurve unpack(const Eigen::VectorXd &x) const {
        AngleCurve ac = AngleCurve::flat(m_, freeC_ ? x[cIndex()] : frozenC_, r_, x[lengthIndex()]);
        for (int j = 1; j < m_; ++j) ac.phi[j] = x[j - 1];
        return ac;
    }

    struct Terms {
        std::vector<double> theta;
        double S = 0.0, C = 0.0, Sn = 0.0, L = 0.0;
        Vec2 g{0.0, 0.0};
    };

    Terms terms(const Eigen::VectorXd &x) const {
        Terms t;
        const double c = freeC_ ? x[cIndex()] : frozenC_;
        t.L = x[lengthIndex()];
        t.theta.resize(m_ + 1);
        for (int j = 0; j <= m_; ++j) {
            const double phi = (j == 0 || j == m_) ? 0.0 : x[j - 1];
            t.theta[j] = c + r_ * static_cast<double>(j) / m_ + phi;
        }
        for (int j = 0; j < m_; ++j) {
            const double d = t.theta[j + 1] - t.theta[j];
            t.S += d * d;
        }
        t.S *= m_;
        for (int j = 0; j <= m_; ++j) {
            const double w = (j == 0 || j == m_) ? 0.5 : 1.0;
            t.C += w * std::cos(t.theta[j]);
            t.Sn += w * std::sin(t.theta[j]);
        }
        t.C /= m_;
        t.Sn /= m_;
        t.g = Vec2(t.C - ell_ / t.L, t.Sn);
        return t;
    }

    double energy(const Terms &t) const { return t.S / t.L + t.L; }

    double value(const Eigen::VectorXd &x) const {
        if (!(x[lengthIndex()] > 0.0)) return std::numeric_limits<double>::infinity();
        const Terms t = terms(x);
        return energy(t) - mu_.dot(t.g) + 0.5 * rho_ * t.g.squaredNorm();
    }

    // Gradients of E and of the two constraints.
    void gradients(const Terms &t, Eigen::VectorXd &gE, Eigen::VectorXd &g1, Eigen::VectorXd &g2) const {
        const int n = size();
        const double du = 1.0 / m_;
        gE = Eigen::VectorXd::Zero(n);
        g1 = Eigen::VectorXd::Zero(n);
        g2 = Eigen::VectorXd::Zero(n);
        for (int j = 1; j < m_; ++j) {
            const double dS = 2.0 * m_ * (2.0 * t.theta[j] - t.theta[j - 1] - t.theta[j + 1]);
            gE[j - 1] = dS / t.L;
            g1[j - 1] = -du * std::sin(t.theta[j]);
            g2[j - 1] = du * std::cos(t.theta[j]);
        }
        gE[lengthIndex()] = 1.0 - t.S / (t.L * t.L);
        g1[lengthIndex()] = ell_ / (t.L * t.L);
        if (freeC_) {
            g1[cIndex()] = -t.Sn;
            g2[cIndex()] = t.C;
        }
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd &x) const {
        const Terms t = terms(x);
        Eigen::VectorXd gE, g1, g2;
        gradients(t, gE, g1, g2);
        const Vec2 nu = rho_ * t.g - mu_;
        return gE + nu[0] * g1 + nu[1] * g2;
    }

    NewtonModel model(const Eigen::VectorXd &x) const {
        const Terms t = terms(x);
        Eigen::VectorXd gE, g1, g2;
        gradients(t, gE, g1, g2);
        const Vec2 nu = rho_ * t.g - mu_;
        const int n = size();
        const int li = lengthIndex();
        const double du = 1.0 / m_;
        const double L = t.L;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(8 * n);
        auto add = [&](int i, int j, double v) {
            // lower triangle only
            if (i >= j) trip.emplace_back(i, j, v);
            else trip.emplace_back(j, i, v);
        };
        for (int j = 1; j < m_; ++j) {
            const double s = std::sin(t.theta[j]), c = std::cos(t.theta[j]);
            const int i = j - 1;
            // E: (2M/L) tridiag(-1, 2, -1); constraints: diagonal in theta_j
            add(i, i, 4.0 * m_ / L - nu[0] * du * c - nu[1] * du * s);
            if (j + 1 < m_) add(i + 1, i, -2.0 * m_ / L);
            // phi-length
            add(li, i, -gE[i] / L);
            if (freeC_) add(cIndex(), i, -nu[0] * du * c - nu[1] * du * s);
        }
        add(li, li, 2.0 * t.S / (L * L * L) - nu[0] * 2.0 * ell_ / (L * L * L));
        if (freeC_) add(cIndex(), cIndex(), -nu[0] * t.C - nu[1] * t.Sn);
        // Penalty outer products through two auxiliary rows.
        const double sr = std::sqrt(rho_);
        for (int i = 0; i < n; ++i) {
            if (g1[i] != 0.0) trip.emplace_back(n, i, sr * g1[i]);
            if (g2[i] != 0.0) trip.emplace_back(n + 1, i, sr * g2[i]);
        }
        trip.emplace_back(n, n, -1.0);
        trip.emplace_back(n + 1, n + 1, -1.0);

        NewtonModel out;
        out.K.resize(n + 2, n + 2);
        out.K.setFromTriplets(trip.begin(), trip.end());
        out.aux = 2;
        return out;
    }

    // Max norm with the phi entries divided by the quadrature weight.
    double stationarity(const Eigen::VectorXd &g) const {
        double s = 0.0;
        for (int i = 0; i < size(); ++i) {
            const double v = i < m_ - 1 ? g[i] * m_ : g[i];
            s = std::max(s, std::abs(v));
        }
        return s;
    }

    Vec2 &mu() { return mu_; }
    double &rho() { return rho_; }

  private:
    double ell_, r_;
    int m_;
    bool freeC_;
    double frozenC_;
    Vec2 mu_{0.0, 0.0};
    double rho_ = 10.0;
};

struct SingleResult {
    AngleCurve curve;
    double m = 0.0;
    double residual = 0.0;
    double stationarity = 0.0;
    Vec2 mu{0.0, 0.0};
    bool converged = false;
    bool degenerate = false;
};

AngleCurve resampled(const AngleCurve &seed, int intervals) {
    if (seed.intervals() == intervals) return seed;
    std::vector<double> theta(seed.intervals() + 1);
    for (int j = 0; j <= seed.intervals(); ++j) theta[j] = seed.theta(j);
    return from_profile(theta, seed.length, seed.r, intervals);
}

SingleResult solve_single(double ell, double r, AngleCurve seed, const MinimizeOptions &opts,
                          const Vec2 &mu0 = Vec2::Zero()) {
    const int m = seed.intervals();
    seed.r = r;
    AugmentedLagrangian al(ell, r, m, seed.c);
    al.rho() = opts.penaltyStart;
    al.mu() = mu0;
    Eigen::VectorXd x = al.pack(seed);

    NewtonProblem problem;
    problem.value = [&](const Eigen::VectorXd &v) { return al.value(v); };
    problem.gradient = [&](const Eigen::VectorXd &v) { return al.gradient(v); };
    problem.model = [&](const Eigen::VectorXd &v) { return al.model(v); };
    problem.stationarity = [&](const Eigen::VectorXd &g) { return al.stationarity(g); };
    NewtonOptions nopts;
    nopts.tolerance = 0.1 * opts.tolerance;
    nopts.maxIterations = opts.maxInner;

    SingleResult out;
    double prevViolation = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int outer = 0; outer < opts.maxOuter; ++outer) {
        const NewtonResult nr = newton_minimize(problem, x, nopts);
        x = nr.x;
        if (x[al.lengthIndex()] < 1e-6) {
            // Collapsing the curve is cheaper than closing it at this penalty;
            // restart from the seed with a stiffer one.
            if (al.rho() >= opts.penaltyMax) {
                out.degenerate = true;
                return out;
            }
            al.rho() = std::min(al.rho() * opts.penaltyGrowth, opts.penaltyMax);
            al.mu() = Vec2::Zero();
            x = al.pack(seed);
            prevViolation = std::numeric_limits<double>::infinity();
            continue;
        }
        const auto t = al.terms(x);
        const double violation = t.L * t.g.lpNorm<Eigen::Infinity>();
        // First-order multiplier update; the inner gradient is then the
        // Lagrangian gradient.
        al.mu() -= al.rho() * t.g;
        const double stat = al.stationarity(al.gradient(x));
        out.residual = violation;
        out.stationarity = stat;
        if (nr.converged && violation <= opts.constraintTolerance && stat <= opts.tolerance) {
            out.converged = true;
            break;
        }
        if (al.rho() >= opts.penaltyMax && violation > 0.99 * prevViolation) {
            if (++stalled >= 3) break;
        } else {
            stalled = 0;
        }
        if (violation > 0.25 * prevViolation) al.rho() = std::min(al.rho() * opts.penaltyGrowth, opts.penaltyMax);
        prevViolation = violation;
    }
    out.curve = al.unpack(x);
    out.m = energy_angle(out.curve);
    out.mu = al.mu();
    return out;
}

} // namespace

ConstrainedMinimum minimize_constrained(double ell, double r, std::span<const AngleCurve> seeds,
                                        const MinimizeOptions &opts) {
    if (!(ell >= 0.0)) throw InvalidArgument("minimize_constrained: ell must be nonnegative");
    if (seeds.empty()) throw InvalidArgument("minimize_constrained: need at least one seed");
    const int m = seeds.front().intervals();

    ConstrainedMinimum best;
    best.m = std::numeric_limits<double>::infinity();
    bool degenerate = false;
    auto consider = [&](const SingleResult &res, int index) {
        if (res.degenerate) degenerate = true;
        if (!res.converged) return;
        ++best.convergedSeeds;
        if (res.m < best.m) {
            best.curve = res.curve;
            best.m = res.m;
            best.constraintResidual = res.residual;
            best.stationarity = res.stationarity;
            best.multipliers = res.mu;
            best.seedIndex = index;
        }
    };

    // Multi-start on a coarse grid, then refine the lowest distinct minima.
    struct Candidate {
        double m;
        int index;
        AngleCurve curve;
        Vec2 mu;
    };
    std::vector<Candidate> coarse;
    const bool twoLevel = opts.coarseIntervals > 0 && opts.coarseIntervals < m;
    if (twoLevel) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            AngleCurve seed = resampled(seeds[i], opts.coarseIntervals);
            validate(seed);
            const SingleResult res = solve_single(ell, r, std::move(seed), opts);
            if (res.degenerate) degenerate = true;
            if (res.converged) coarse.push_back({res.m, static_cast<int>(i), res.curve, res.mu});
        }
        std::sort(coarse.begin(), coarse.end(), [](const Candidate &a, const Candidate &b) { return a.m < b.m; });
        int refined = 0;
        double lastM = -std::numeric_limits<double>::infinity();
        for (const Candidate &c : coarse) {
            if (refined >= opts.refineCandidates) break;
            if (c.m - lastM <= 1e-6 * std::max(1.0, std::abs(c.m))) continue;
            lastM = c.m;
            ++refined;
            consider(solve_single(ell, r, resampled(c.curve, m), opts, c.mu), c.index);
        }
    }
    if (!twoLevel || best.convergedSeeds == 0) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            AngleCurve seed = resampled(seeds[i], m);
            validate(seed);
            consider(solve_single(ell, r, std::move(seed), opts), static_cast<int>(i));
        }
    }
    if (best.convergedSeeds == 0) {
        if (degenerate)
            throw LengthDegeneracy("minimize_constrained: length collapsed at (ell, r) = (" +
                                   std::to_string(ell) + ", " + std::to_string(r) + ")");
        throw OptimizationFailure("minimize_constrained: no seed converged at (ell, r) = (" +
                                  std::to_string(ell) + ", " + std::to_string(r) + ")");
    }
    return best;
}

std::vector<AngleCurve> seed_bank(double ell, double r, int intervals, const SeedContext &ctx) {
    const double ar = std::abs(r);
    std::vector<AngleCurve> seeds;

    // Circular arc with the chord along +x.
    {
        const double half = 0.5 * ar;
        const double sinc = half > 1e-12 ? std::sin(half) / half : 1.0;
        double length = 2.0;
        if (ell > 0.0 && sinc > 0.05) length = std::max(ell / sinc, 1e-3);
        else if (ell > 0.0) length = std::max(2.0, 3.0 * ell);
        if (ar < 1e-12 && ell > 0.0) length = ell;
        seeds.push_back(AngleCurve::flat(intervals, -half, ar, length));
    }

    auto add_profile = [&](const std::vector<double> &theta, double length, bool alignChord) {
        AngleCurve ac = from_profile(theta, length, ar, intervals);
        if (alignChord) {
            const Vec2 z = closure(ac);
            if (z.norm() > 1e-9) ac.c -= std::atan2(z.y(), z.x());
        }
        if (ell > 0.0) {
            const Vec2 z = closure(ac);
            if (z.x() > 1e-6) ac.length *= ell / z.x();
        }
        seeds.push_back(std::move(ac));
    };

    if (ctx.figureEight) {
        const auto &fig = *ctx.figureEight;
        add_profile(fig.solution.theta, fig.solution.shooting.length, ell > 0.0);
    }
    for (const auto &sol : ctx.shapes) {
        const double tc = sol.theta.back() - sol.theta.front();
        if (tc * (r >= 0.0 ? 1.0 : -1.0) < 0.0 && ar > 1e-12) {
            // Use the mirror image so the shape turns the right way.
            std::vector<double> flipped(sol.theta.size());
            for (std::size_t i = 0; i < flipped.size(); ++i) flipped[i] = -sol.theta[i];
            add_profile(flipped, sol.shooting.length, ell > 0.0);
        } else {
            add_profile(sol.theta, sol.shooting.length, ell > 0.0);
        }
    }

    std::mt19937_64 rng(ctx.rngSeed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < ctx.randomSeeds; ++s) {
        AngleCurve ac = AngleCurve::flat(intervals, -0.5 * ar, ar, std::max(2.0, 2.0 * ell));
        double coef[6];
        for (int mode = 0; mode < 6; ++mode) coef[mode] = normal(rng) * 1.5 / (mode + 1);
        for (int j = 1; j < intervals; ++j) {
            const double u = static_cast<double>(j) / intervals;
            double v = 0.0;
            for (int mode = 0; mode < 6; ++mode) v += coef[mode] * std::sin((mode + 1) * kPi * u);
            ac.phi[j] = v;
        }
        seeds.push_back(std::move(ac));
    }

    // Seeds are built for |r|; reflect for negative r.
    if (r < 0.0)
        for (auto &s : seeds) s = mirrored(s);
    for (auto &s : seeds) s.r = r;
    return seeds;
}

BarrierGrid make_grid(double ellMax, int ellPoints, double rMin, double rMax, int rPoints, double rStar,
                      int intervals) {
    if (ellPoints < 1 || rPoints < 1) throw InvalidArgument("make_grid: need at least one point per axis");
    BarrierGrid grid;
    grid.intervals = intervals;
    for (int i = 0; i < ellPoints; ++i)
        grid.ell.push_back(ellPoints == 1 ? 0.0 : ellMax * static_cast<double>(i) / (ellPoints - 1));
    for (int j = 0; j < rPoints; ++j)
        grid.r.push_back(rPoints == 1 ? rMin : rMin + (rMax - rMin) * static_cast<double>(j) / (rPoints - 1));
    for (double extra : {0.0, 0.5 * rStar, rStar}) {
        if (extra < rMin - 1e-12 || extra > rMax + 1e-12) continue;
        bool present = false;
        for (double &v : grid.r)
            if (std::abs(v - extra) <= 1e-9 * std::max(1.0, rStar)) {
                v = extra;
                present = true;
            }
        if (!present) grid.r.push_back(extra);
    }
    std::sort(grid.r.begin(), grid.r.end());
    return grid;
}

std::size_t BarrierMap::r_index(double r) const {
    for (std::size_t j = 0; j < grid.r.size(); ++j)
        if (grid.r[j] == r) return j;
    return static_cast<std::size_t>(-1);
}

namespace {

SeedContext context_for(double ell, const FigureEightData &fig) {
    SeedContext ctx;
    ctx.figureEight = fig;
    if (ell > 0.0 && ell < threshold_ell()) {
        try {
            const Catalogue cat = enumerate_low_energy(ell);
            ctx.shapes = {cat.arcPlus, cat.loopPlus};
        } catch (const Error &) {
        }
    }
    return ctx;
}

} // namespace

BarrierMap barrier_constants(const BarrierGrid &grid, const FigureEightData &fig, const MinimizeOptions &opts) {
    BarrierMap map;
    map.grid = grid;
    map.rStar = fig.rStar;
    map.eStar = fig.eStar;
    map.cells.resize(grid.ell.size() * grid.r.size());

    std::vector<std::optional<AngleCurve>> rowBest(grid.r.size());
    for (std::size_t i = 0; i < grid.ell.size(); ++i) {
        const double ell = grid.ell[i];
        const SeedContext ctx = context_for(ell, fig);
        std::optional<AngleCurve> previous;
        for (std::size_t j = 0; j < grid.r.size(); ++j) {
            const std::optional<AngleCurve> below = i > 0 ? rowBest[j] : std::nullopt;
            const double r = grid.r[j];
            BarrierCell &cell = map.cells[i * grid.r.size() + j];
            cell.ell = ell;
            cell.r = r;
            cell.m = std::numeric_limits<double>::quiet_NaN();
            std::vector<AngleCurve> seeds = seed_bank(ell, r, grid.intervals, ctx);
            // Continuation from the neighbouring cell in r.
            if (previous) {
                AngleCurve warm = *previous;
                warm.r = r;
                seeds.push_back(std::move(warm));
            }
            // ... and from the previous ell at the same r.
            if (below) seeds.push_back(*below);
            try {
                const ConstrainedMinimum res = minimize_constrained(ell, r, seeds, opts);
                cell.m = res.m;
                cell.converged = true;
                previous = res.curve;
                rowBest[j] = res.curve;
            } catch (const Error &) {
                cell.converged = false;
                rowBest[j].reset();
            }
        }
    }

    const std::size_t iZero = [&] {
        for (std::size_t i = 0; i < grid.ell.size(); ++i)
            if (grid.ell[i] == 0.0) return i;
        throw InvalidArgument("barrier_constants: ell grid must contain 0");
    }();
    const std::size_t jHalf = map.r_index(0.5 * fig.rStar);
    const std::size_t jStar = map.r_index(fig.rStar);
    if (jHalf == static_cast<std::size_t>(-1) || jStar == static_cast<std::size_t>(-1))
        throw InvalidArgument("barrier_constants: r grid must contain r_*/2 and r_*");
    const BarrierCell &half0 = map.at(iZero, jHalf);
    const BarrierCell &star0 = map.at(iZero, jStar);
    if (!half0.converged || !star0.converged)
        throw OptimizationFailure("barrier_constants: m(0, r_*/2) or m(0, r_*) failed");
    map.mStar = half0.m - star0.m;

    // c1: largest ell reached without a violation, scanning upward from 0.
    const double level = fig.eStar + 0.5 * map.mStar;
    map.c1 = 0.0;
    map.barrierVerified = true;
    for (std::size_t i = 0; i < grid.ell.size(); ++i) {
        const BarrierCell &cell = map.at(i, jHalf);
        if (!cell.converged || cell.m < level) break;
        map.c1 = grid.ell[i];
    }
    for (std::size_t i = 0; i < grid.ell.size(); ++i)
        if (grid.ell[i] < map.c1 && !(map.at(i, jHalf).m >= level)) map.barrierVerified = false;

    map.minimalityVerified = true;
    for (std::size_t j = 0; j < grid.r.size(); ++j) {
        const BarrierCell &cell = map.at(iZero, j);
        if (cell.converged && cell.m < star0.m - 1e-9) map.minimalityVerified = false;
    }
    map.loopEnergy.assign(grid.ell.size(), std::numeric_limits<double>::quiet_NaN());
    return map;
}

double admissible_ell_bound(BarrierMap &map) {
    const auto &grid = map.grid;
    map.loopEnergy.assign(grid.ell.size(), std::numeric_limits<double>::quiet_NaN());
    double bound = 0.0;
    for (std::size_t i = 0; i < grid.ell.size(); ++i) {
        const double ell = grid.ell[i];
        if (!(ell > 0.0)) continue;
        if (ell >= threshold_ell()) break;
        map.loopEnergy[i] = upper_loop(ell).energy;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < grid.r.size(); ++j) {
            const double r = grid.r[j];
            if (r < 0.0 || r > map.rStar) continue;
            const BarrierCell &cell = map.at(i, j);
            if (cell.converged) best = std::max(best, cell.m);
        }
        if (!(best >= map.loopEnergy[i])) break;
        bound = ell;
    }
    map.ellAdmissible = bound;
    return bound;
}

DiscontinuityEvidence discontinuity_probe(const FigureEightData &fig, int intervals, int randomSeeds) {
    DiscontinuityEvidence ev;
    ev.ellSmall = 0.01;
    {
        SeedContext ctx;
        ctx.randomSeeds = 2;
        const auto seeds = seed_bank(ev.ellSmall, 0.0, intervals, ctx);
        ev.segmentValue = minimize_constrained(ev.ellSmall, 0.0, seeds).m;
    }
    {
        SeedContext ctx;
        ctx.figureEight = fig;
        ctx.randomSeeds = randomSeeds;
        const auto seeds = seed_bank(0.0, 0.0, intervals, ctx);
        ev.originLowerEstimate = minimize_constrained(0.0, 0.0, seeds).m;
    }
    SeedContext ctx;
    ctx.figureEight = fig;
    ev.mHalf = minimize_constrained(0.0, 0.5 * fig.rStar, seed_bank(0.0, 0.5 * fig.rStar, intervals, ctx)).m;
    ev.mStar = minimize_constrained(0.0, fig.rStar, seed_bank(0.0, fig.rStar, intervals, ctx)).m;
    return ev;
}

} // namespace eflow
