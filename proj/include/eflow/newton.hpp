#pragma once
// Damped Newton minimization with inertia-corrected sparse LDL^T solves.
//
// The model matrix may carry trailing auxiliary rows/columns of the form
//   [ H0   G ]
//   [ G^T -I ]
// whose Schur complement H0 + G G^T is the Hessian of the objective. This keeps
// dense low-rank terms out of the sparse factorization. The factorization is
// accepted once it has exactly `aux` negative pivots (Sylvester's law of
// inertia), i.e. the primal Hessian is positive definite; otherwise a multiple
// of the identity is added to the primal block.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>

namespace eflow {

struct NewtonModel {
    Eigen::SparseMatrix<double> K;
    int aux = 0;
};

struct NewtonProblem {
    // +infinity marks an inadmissible point.
    std::function<double(const Eigen::VectorXd &)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd &)> gradient;
    std::function<NewtonModel(const Eigen::VectorXd &)> model;
    // Convergence measure of a gradient; defaults to the max norm.
    std::function<double(const Eigen::VectorXd &)> stationarity;
};

struct NewtonOptions {
    double tolerance = 1e-10;
    int maxIterations = 100;
    double armijo = 1e-4;
    int maxBacktracks = 50;
    // Report convergence once the Newton decrement drops below the
    // resolution of the objective value.
    bool acceptRoundoff = false;
};

struct NewtonResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double stationarity = 0.0;
    int iterations = 0;
    bool converged = false;
};

NewtonResult newton_minimize(const NewtonProblem &problem, Eigen::VectorXd x0,
                             const NewtonOptions &opts = {});

} // namespace eflow
