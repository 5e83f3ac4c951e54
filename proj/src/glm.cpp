#include "psmlab/glm.hpp"

#include <cmath>
#include <unordered_map>

#include "psmlab/errors.hpp"

namespace psmlab::glm {

double expit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

namespace {

void check_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  if (design.rows() != response.size()) {
    throw SpecError("design rows and response length differ");
  }
  if (design.rows() < design.cols()) {
    throw SingularDesignError("fewer observations than parameters");
  }
}

}  // namespace

RegressionFit fit_linear(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  check_design(design, response);
  const auto n = design.rows();
  const auto p = design.cols();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) {
    throw SingularDesignError("linear design is rank deficient");
  }

  RegressionFit fit;
  fit.family = Family::linear;
  fit.coefficients = qr.solve(response);
  fit.fitted = design * fit.coefficients;

  double rss = (response - fit.fitted).squaredNorm();
  double sigma2 = (n > p) ? rss / static_cast<double>(n - p) : 0.0;
  Eigen::MatrixXd xtx = design.transpose() * design;
  fit.covariance_model = sigma2 * xtx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.converged = true;
  fit.iterations = 0;
  return fit;
}

RegressionFit fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                           int max_iter, double tol) {
  check_design(design, response);
  const auto n = design.rows();
  const auto p = design.cols();

  bool any0 = false, any1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (response[i] == 0.0) any0 = true;
    else if (response[i] == 1.0) any1 = true;
    else throw SpecError("logistic response must be 0/1");
  }
  if (!any0 || !any1) {
    throw SeparationError("logistic response has a single class");
  }

  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p) {
      throw SingularDesignError("logistic design is rank deficient");
    }
  }

  RegressionFit fit;
  fit.family = Family::logistic;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prob(n);
  Eigen::MatrixXd info(p, p);

  for (int iter = 1; iter <= max_iter; ++iter) {
    Eigen::VectorXd eta = design * beta;
    for (Eigen::Index i = 0; i < n; ++i) prob[i] = expit(eta[i]);

    Eigen::VectorXd score = design.transpose() * (response - prob);
    if (score.lpNorm<Eigen::Infinity>() < tol) {
      fit.coefficients = beta;
      fit.fitted = prob;
      info = design.transpose() * (prob.array() * (1.0 - prob.array())).matrix().asDiagonal() * design;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
      if (ldlt.info() != Eigen::Success) {
        throw SingularDesignError("observed information not invertible");
      }
      fit.covariance_model = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
      fit.converged = true;
      fit.iterations = iter - 1;
      return fit;
    }

    info = design.transpose() * (prob.array() * (1.0 - prob.array())).matrix().asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array().abs() < 1e-12).any()) {
      throw SingularDesignError("information matrix singular during Newton step");
    }
    beta += ldlt.solve(score);

    if (beta.lpNorm<Eigen::Infinity>() > 30.0) {
      throw SeparationError("logistic coefficients diverging (|beta| > 30)");
    }
  }
  throw ConvergenceError("logistic fit did not converge");
}

Eigen::MatrixXd robust_cluster_vcov(const RegressionFit& fit, const Eigen::MatrixXd& design,
                                    const Eigen::VectorXd& response,
                                    const std::vector<int>& cluster_ids) {
  if (!fit.converged) throw SpecError("robust_cluster_vcov requires a converged fit");
  const auto n = design.rows();
  const auto p = design.cols();
  if (static_cast<Eigen::Index>(cluster_ids.size()) != n) {
    throw SpecError("cluster id count must match rows");
  }

  Eigen::VectorXd resid = response - fit.fitted;

  Eigen::MatrixXd bread(p, p);
  if (fit.family == Family::linear) {
    bread = design.transpose() * design;
  } else {
    Eigen::ArrayXd w = fit.fitted.array() * (1.0 - fit.fitted.array());
    bread = design.transpose() * w.matrix().asDiagonal() * design;
  }

  // Sum scores within clusters (slots in first-appearance order keeps the
  // accumulation deterministic), then accumulate outer products.
  std::unordered_map<int, std::size_t> slot;
  slot.reserve(cluster_ids.size());
  std::vector<Eigen::VectorXd> sums;
  sums.reserve(cluster_ids.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [it, inserted] = slot.try_emplace(cluster_ids[i], sums.size());
    if (inserted) sums.emplace_back(Eigen::VectorXd::Zero(p));
    sums[it->second] += design.row(i).transpose() * resid[i];
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (const auto& s : sums) {
    meat += s * s.transpose();
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(bread);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array().abs() < 1e-12).any()) {
    throw SingularDesignError("sandwich bread matrix singular");
  }
  Eigen::MatrixXd binv_meat = ldlt.solve(meat);
  Eigen::MatrixXd vcov = ldlt.solve(binv_meat.transpose()).transpose();
  // Symmetrize against round-off.
  return 0.5 * (vcov + vcov.transpose());
}

}  // namespace psmlab::glm
