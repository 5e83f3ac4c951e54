#include "psmlab/psm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psmlab/errors.hpp"
#include "psmlab/glm.hpp"

namespace psmlab::psm {

std::vector<int> MatchedSample::matched_rows() const {
  std::vector<int> rows;
  rows.reserve(2 * pairs.size());
  for (const auto& [ti, ci] : pairs) {
    rows.push_back(ti);
    rows.push_back(ci);
  }
  return rows;
}

void BalanceReport::set(Covariate c, BalanceSlice s, double v) {
  for (auto& e : std_diff) {
    if (e.covariate == c && e.slice == s) {
      e.value = v;
      return;
    }
  }
  std_diff.push_back({c, s, v});
}

std::optional<double> BalanceReport::get(Covariate c, BalanceSlice s) const {
  for (const auto& e : std_diff) {
    if (e.covariate == c && e.slice == s) return e.value;
  }
  return std::nullopt;
}

std::pair<Eigen::VectorXd, Eigen::Vector3d> estimate_ps(const Eigen::VectorXd& x1,
                                                        const Eigen::VectorXd& x2,
                                                        const Eigen::VectorXd& t) {
  const auto n = x1.size();
  if (x2.size() != n || t.size() != n) throw SpecError("estimate_ps: size mismatch");
  Eigen::MatrixXd design(n, 3);
  design.col(0).setOnes();
  design.col(1) = x1;
  design.col(2) = x2;
  glm::RegressionFit fit = glm::fit_logistic(design, t);
  return {fit.fitted, Eigen::Vector3d(fit.coefficients)};
}

MatchedSample match_caliper_nn(const Eigen::VectorXd& ps, const Eigen::VectorXd& t,
                               RngStream& stream) {
  const int n = static_cast<int>(ps.size());
  if (t.size() != n) throw SpecError("match_caliper_nn: size mismatch");

  Eigen::VectorXd lg(n);
  for (int i = 0; i < n; ++i) {
    if (!(ps[i] > 0.0 && ps[i] < 1.0)) {
      throw SpecError("match_caliper_nn: propensity scores must lie in (0, 1)");
    }
    lg[i] = glm::logit(ps[i]);
  }

  std::vector<int> treated, controls;
  for (int i = 0; i < n; ++i) (t[i] == 1.0 ? treated : controls).push_back(i);
  if (treated.empty() || controls.empty()) {
    throw InsufficientDataError("matching needs at least one treated and one control");
  }

  double mean = lg.mean();
  double sd = std::sqrt((lg.array() - mean).square().sum() / (n - 1));
  if (!(sd > 0.0)) throw DegenerateCaliperError("zero SD of logit propensity scores");

  MatchedSample sample;
  sample.caliper_width = 0.2 * sd;
  sample.ps_used = ps;

  stream.shuffle(treated);

  std::vector<bool> control_used(n, false);
  for (int ti : treated) {
    double best = std::numeric_limits<double>::infinity();
    int best_ci = -1;
    for (int ci : controls) {
      if (control_used[ci]) continue;
      double dist = std::abs(lg[ti] - lg[ci]);
      if (dist < best || (dist == best && ci < best_ci)) {
        best = dist;
        best_ci = ci;
      }
    }
    if (best_ci >= 0 && best <= sample.caliper_width) {
      control_used[best_ci] = true;
      sample.pairs.emplace_back(ti, best_ci);
    } else {
      sample.unmatched_treated.push_back(ti);
    }
  }
  return sample;
}

double standardized_difference(const Eigen::VectorXd& x, const Eigen::VectorXd& groups) {
  if (x.size() != groups.size()) throw SpecError("standardized_difference: size mismatch");
  double sum1 = 0.0, sum0 = 0.0;
  int n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (groups[i] == 1.0) {
      sum1 += x[i];
      ++n1;
    } else {
      sum0 += x[i];
      ++n0;
    }
  }
  if (n1 == 0 || n0 == 0) throw SpecError("standardized_difference: empty group");
  double m1 = sum1 / n1, m0 = sum0 / n0;
  double v1 = 0.0, v0 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double c = x[i] - (groups[i] == 1.0 ? m1 : m0);
    (groups[i] == 1.0 ? v1 : v0) += c * c;
  }
  v1 = n1 > 1 ? v1 / (n1 - 1) : 0.0;
  v0 = n0 > 1 ? v0 / (n0 - 1) : 0.0;
  double pooled = std::sqrt(0.5 * (v1 + v0));
  if (pooled == 0.0) {
    if (m1 == m0) return 0.0;
    throw SpecError("standardized_difference: zero pooled variance with unequal means");
  }
  return (m1 - m0) / pooled;
}

EffectEstimate estimate_att(const Eigen::VectorXd& y, const Eigen::VectorXd& t,
                            const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                            const MatchedSample& sample, AdjustMode adjust) {
  if (sample.pairs.size() < 2) {
    throw InsufficientDataError("estimate_att needs at least two matched pairs");
  }
  std::vector<int> rows = sample.matched_rows();
  const auto m = static_cast<Eigen::Index>(rows.size());
  const int p = adjust == AdjustMode::adjusted ? 4 : 2;

  Eigen::MatrixXd design(m, p);
  Eigen::VectorXd response(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    int r = rows[i];
    design(i, 0) = 1.0;
    design(i, 1) = t[r];
    if (p == 4) {
      design(i, 2) = x1[r];
      design(i, 3) = x2[r];
    }
    response[i] = y[r];
  }
  glm::RegressionFit fit = glm::fit_linear(design, response);

  EffectEstimate est;
  est.att = fit.coefficients[1];
  est.n_pairs = static_cast<double>(sample.n_pairs());
  est.diagnostics.pct_treated_matched = sample.pct_treated_matched();
  return est;
}

}  // namespace psmlab::psm
