#pragma once

#include <Eigen/Dense>

namespace resetloop {

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant
/// (degree 3 to 13 selected from the 1-norm, Higham 2005).
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Diagonal similarity scales d (powers of two) such that D^{-1} A D has
/// comparable row and column norms (Parlett-Reinsch balancing).
Eigen::VectorXd balancing_scales(const Eigen::MatrixXd& a);

struct ZohDiscretization {
  Eigen::MatrixXd phi;    // e^{A dt}
  Eigen::MatrixXd gamma;  // integral_0^dt e^{A s} ds B
};

/// Exact discretization of x' = Ax + Bu with u held constant over each step.
ZohDiscretization zoh_discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt);

}  // namespace resetloop
