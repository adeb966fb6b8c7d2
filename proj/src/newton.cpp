#include "eflow/newton.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace eflow {

namespace {

Eigen::SparseMatrix<double> shifted(const Eigen::SparseMatrix<double> &K, int primal, double sigma) {
    if (sigma == 0.0) return K;
    Eigen::SparseMatrix<double> I(K.rows(), K.cols());
    I.reserve(Eigen::VectorXi::Constant(K.cols(), 1));
    for (int i = 0; i < primal; ++i) I.insert(i, i) = sigma;
    return K + I;
}

} // namespace

NewtonResult newton_minimize(const NewtonProblem &problem, Eigen::VectorXd x0,
                             const NewtonOptions &opts) {
    auto measure = [&](const Eigen::VectorXd &g) {
        return problem.stationarity ? problem.stationarity(g) : g.lpNorm<Eigen::Infinity>();
    };

    NewtonResult res;
    res.x = std::move(x0);
    res.value = problem.value(res.x);
    const int n = static_cast<int>(res.x.size());
    double sigma = 0.0;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
    for (res.iterations = 0; res.iterations < opts.maxIterations; ++res.iterations) {
        const Eigen::VectorXd g = problem.gradient(res.x);
        res.stationarity = measure(g);
        if (res.stationarity <= opts.tolerance) {
            res.converged = true;
            return res;
        }

        const NewtonModel model = problem.model(res.x);
        double diagScale = 0.0;
        for (int i = 0; i < n; ++i) diagScale = std::max(diagScale, std::abs(model.K.coeff(i, i)));
        const double sigmaFloor = 1e-10 * std::max(diagScale, 1.0);
        sigma = sigma > 0.0 ? std::max(sigma / 10.0, sigmaFloor) : 0.0;

        Eigen::VectorXd d;
        bool haveDirection = false;
        for (int attempt = 0; attempt < 60 && !haveDirection; ++attempt) {
            ldlt.compute(shifted(model.K, n, sigma));
            bool ok = ldlt.info() == Eigen::Success;
            if (ok) {
                const Eigen::VectorXd D = ldlt.vectorD();
                int negatives = 0;
                const double tiny = 1e-14 * std::max(diagScale, 1.0);
                for (int i = 0; i < D.size(); ++i) {
                    if (!(std::abs(D[i]) > tiny)) ok = false;
                    if (D[i] < 0.0) ++negatives;
                }
                ok = ok && negatives == model.aux;
            }
            if (ok) {
                Eigen::VectorXd rhs = Eigen::VectorXd::Zero(model.K.rows());
                rhs.head(n) = -g;
                const Eigen::VectorXd sol = ldlt.solve(rhs);
                d = sol.head(n);
                ok = d.allFinite() && g.dot(d) < 0.0;
            }
            if (ok) {
                haveDirection = true;
            } else {
                sigma = sigma == 0.0 ? sigmaFloor : 10.0 * sigma;
            }
        }
        if (!haveDirection) return res;

        const double slope = g.dot(d);
        // Predicted decrease below what the objective can resolve.
        if (opts.acceptRoundoff && -slope <= 1e-14 * std::max(1.0, std::abs(res.value))) {
            res.converged = true;
            return res;
        }
        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial;
        double fTrial = 0.0;
        for (int k = 0; k < opts.maxBacktracks; ++k) {
            trial = res.x + alpha * d;
            fTrial = problem.value(trial);
            if (std::isfinite(fTrial) && fTrial <= res.value + opts.armijo * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        // No resolvable decrease along a descent direction: round-off floor.
        if (!accepted) return res;
        res.x = std::move(trial);
        res.value = fTrial;
    }
    res.stationarity = measure(problem.gradient(res.x));
    res.converged = res.stationarity <= opts.tolerance;
    return res;
}

} // namespace eflow
