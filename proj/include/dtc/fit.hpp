#pragma once

#include <Eigen/Dense>
#include <functional>

namespace dtc::fit {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LmOptions {
  int max_iterations = 200;
  double ftol = 1e-15;  // relative cost decrease
  double xtol = 1e-13;  // relative step size
  double gtol = 1e-20;  // gradient infinity norm
  double atol = 0.0;  // absolute cost
  double lambda0 = 1e-3;
};

struct LmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // 0.5 |r|^2
  int iterations = 0;
  bool converged = false;

  // (J^T J)^{-1}, scaled by the residual variance when requested.
  Eigen::MatrixXd covariance(bool scale_by_residual = true) const;
};

// Central differences with relative step.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x);

// Levenberg-Marquardt with Marquardt diagonal scaling.
LmResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x0, const LmOptions& opt = {},
                             const JacobianFn& jac = {});

}  // namespace dtc::fit
