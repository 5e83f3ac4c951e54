#pragma once

#include <Eigen/Dense>
#include <vector>

namespace psmlab::glm {

enum class Family { linear, logistic };

struct RegressionFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance_model;
  Eigen::VectorXd fitted;
  Family family = Family::linear;
  bool converged = false;
  int iterations = 0;
};

double expit(double x);
double logit(double p);

// Ordinary least squares. covariance_model = sigma2_hat * (X'X)^-1.
// Throws SingularDesignError on rank deficiency.
RegressionFit fit_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// Logistic maximum likelihood by Newton-Raphson, converged when the score
// infinity-norm drops below `tol`. covariance_model is the inverse observed
// information. Throws SeparationError when coefficients diverge,
// SingularDesignError on rank deficiency.
RegressionFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                           int max_iter = 50, double tol = 1e-8);

// Cluster-robust sandwich covariance A^-1 B A^-1 with per-cluster summed
// score outer products; no small-sample correction.
Eigen::MatrixXd robust_cluster_vcov(const RegressionFit& fit, const Eigen::MatrixXd& design,
                                    const Eigen::VectorXd& response,
                                    const std::vector<int>& cluster_ids);

}  // namespace psmlab::glm
