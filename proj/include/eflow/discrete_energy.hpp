#pragma once
// Discrete penalized elastic energy of a polyline,
//   E(p) = sum_i 2 psi_i^2 / (h_{i-1} + h_i) + lambda sum_i h_i,
// with psi_i the turning angle at interior node i. The bending part equals
// sum k_i^2 (h_{i-1}+h_i)/2 for k_i = psi_i / ((h_{i-1}+h_i)/2).
//
// Degrees of freedom are packed as [x0, y0, x1, y1, ...].

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

#include "eflow/curve.hpp"

namespace eflow {

using Triplets = std::vector<Eigen::Triplet<double>>;

double discrete_energy(const PointList &p, double lambda);

// Gradient with respect to all node coordinates.
Eigen::VectorXd discrete_energy_gradient(const PointList &p, double lambda);

// Hessian entries for all node coordinates (duplicates are summed on assembly).
Triplets discrete_energy_hessian(const PointList &p, double lambda);

// Dense Hessian restricted to interior nodes, mostly for tests and the
// second-variation eigenproblem.
Eigen::MatrixXd discrete_energy_hessian_interior(const PointList &p, double lambda);

// Dual (Voronoi) arclength weight of every node: (h_{i-1} + h_i) / 2, with
// one-sided values at the endpoints.
std::vector<double> dual_weights(const PointList &p);

} // namespace eflow
