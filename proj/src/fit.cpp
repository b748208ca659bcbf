#include "dtc/fit.hpp"

#include <cmath>

namespace dtc::fit {

Eigen::MatrixXd LmResult::covariance(bool scale_by_residual) const {
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  const auto m = residual.size(), n = x.size();
  if (scale_by_residual && m > n) cov *= residual.squaredNorm() / static_cast<double>(m - n);
  return cov;
}

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r0 = f(x);
  Eigen::MatrixXd j(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
    xp[k] = x[k] + h;
    const Eigen::VectorXd rp = f(xp);
    xp[k] = x[k] - h;
    const Eigen::VectorXd rm = f(xp);
    xp[k] = x[k];
    j.col(k) = (rp - rm) / (2.0 * h);
  }
  return j;
}

LmResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x, const LmOptions& opt, const JacobianFn& jac) {
  auto jacobian = [&](const Eigen::VectorXd& p) { return jac ? jac(p) : numeric_jacobian(f, p); };
  LmResult res;
  Eigen::VectorXd r = f(x);
  double cost = 0.5 * r.squaredNorm();
  Eigen::MatrixXd j = jacobian(x);
  double lambda = opt.lambda0;
  int it = 0;
  bool converged = false;
  for (; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= opt.gtol || cost <= opt.atol) {
      converged = true;
      break;
    }
    const double dmax = jtj.diagonal().maxCoeff();
    const Eigen::VectorXd d = jtj.diagonal().cwiseMax(dmax > 0.0 ? 1e-12 * dmax : 1.0);
    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * d;
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd xn = x + step;
      const Eigen::VectorXd rn = f(xn);
      const double cn = 0.5 * rn.squaredNorm();
      if (std::isfinite(cn) && cn <= cost) {
        const double rel = (cost - cn) / std::max(cost, 1e-300);
        const double xs = step.norm() / (x.norm() + opt.xtol);
        x = xn;
        r = rn;
        cost = cn;
        j = jacobian(x);
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (rel <= opt.ftol || xs <= opt.xtol) converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) {
      converged = true;  // no downhill step at any damping: stationary
      break;
    }
    if (converged) break;
  }
  res.x = x;
  res.residual = r;
  res.jacobian = j;
  res.cost = cost;
  res.iterations = it;
  res.converged = converged;
  return res;
}

}  // namespace dtc::fit
