#include "psmlab/mice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "psmlab/errors.hpp"
#include "psmlab/glm.hpp"
#include "psmlab/psm.hpp"

namespace psmlab::mice {

namespace {

constexpr int kNumVars = 7;

int var_index(Var v) { return static_cast<int>(v); }

const char* var_name(Var v) {
  switch (v) {
    case Var::x1: return "x1";
    case Var::x2: return "x2";
    case Var::t: return "t";
    case Var::y: return "y";
    case Var::z2: return "z2";
    case Var::zps: return "zps";
    case Var::ps: return "ps";
  }
  return "?";
}

// Mutable working copy of the columns touched by the chained equations.
struct Frame {
  int n = 0;
  std::array<Eigen::VectorXd, kNumVars> values;
  std::array<std::vector<bool>, kNumVars> missing;  // empty = fully observed

  bool has_column(Var v) const { return values[var_index(v)].size() > 0; }

  const std::vector<bool>* mask(Var v) const {
    const auto& m = missing[var_index(v)];
    return m.empty() ? nullptr : &m;
  }

  Eigen::MatrixXd design_for(const std::vector<Var>& predictors) const {
    Eigen::MatrixXd design(n, 1 + predictors.size());
    design.col(0).setOnes();
    for (std::size_t j = 0; j < predictors.size(); ++j) {
      design.col(1 + j) = values[var_index(predictors[j])];
    }
    return design;
  }
};

std::vector<int> observed_indices(const std::vector<bool>& missing) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < missing.size(); ++i) {
    if (!missing[i]) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

Eigen::VectorXd derive_ps_column(const Frame& frame) {
  auto [probs, coefs] = psm::estimate_ps(frame.values[var_index(Var::x1)],
                                         frame.values[var_index(Var::x2)],
                                         frame.values[var_index(Var::t)]);
  (void)coefs;
  return probs;
}

// Random draws from a column's observed values, used to start a chain.
void initialize_column(Frame& frame, Var v, RngStream& stream) {
  const auto& mask = frame.missing[var_index(v)];
  if (mask.empty()) return;
  Eigen::VectorXd& col = frame.values[var_index(v)];
  std::vector<int> obs = observed_indices(mask);
  if (obs.empty()) throw ImputationError(std::string("no observed values in ") + var_name(v));
  for (int i = 0; i < frame.n; ++i) {
    if (mask[i]) col[i] = col[obs[stream.uniform_index(obs.size())]];
  }
}

}  // namespace

void ImputationSpec::validate() const {
  if (m < 2) throw SpecError("imputation m must be at least 2");
  if (maxit < 1) throw SpecError("imputation maxit must be at least 1");
  if (pmm_donors < 1) throw SpecError("pmm_donors must be at least 1");
  for (const auto& col : columns) {
    for (Var p : col.predictors) {
      if (p == col.target) {
        throw SpecError(std::string("column ") + var_name(col.target) +
                        " cannot predict itself");
      }
    }
    if (col.method == Method::passive_derive_ps && col.target != Var::ps) {
      throw SpecError("passive_derive_ps can only target the ps column");
    }
  }
}

Eigen::VectorXd pmm_impute_column(const Eigen::VectorXd& col, const std::vector<bool>& missing,
                                  const Eigen::MatrixXd& predictors, int donors,
                                  RngStream& stream) {
  const int n = static_cast<int>(col.size());
  if (predictors.rows() != n || static_cast<int>(missing.size()) != n) {
    throw SpecError("pmm_impute_column: size mismatch");
  }
  std::vector<int> obs = observed_indices(missing);
  std::vector<int> mis;
  for (int i = 0; i < n; ++i) {
    if (missing[i]) mis.push_back(i);
  }
  if (mis.empty()) return col;
  const int n_obs = static_cast<int>(obs.size());
  const int p = static_cast<int>(predictors.cols());
  if (n_obs < donors) throw ImputationError("pmm: fewer observed rows than donors");
  if (n_obs < p + 2) throw ImputationError("pmm: too few observed rows for the model");

  Eigen::MatrixXd x_obs(n_obs, p);
  Eigen::VectorXd y_obs(n_obs);
  for (int i = 0; i < n_obs; ++i) {
    x_obs.row(i) = predictors.row(obs[i]);
    y_obs[i] = col[obs[i]];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x_obs);
  if (qr.rank() < p) throw SingularDesignError("pmm design is rank deficient");
  Eigen::VectorXd beta_hat = qr.solve(y_obs);
  double rss = (y_obs - x_obs * beta_hat).squaredNorm();
  const int df = n_obs - p;

  // sigma2* ~ rss / chisq(df); beta* ~ N(beta_hat, sigma2* (X'X)^-1).
  // rss == 0 collapses the draw onto beta_hat (exact-prediction matching).
  double sigma2_star = rss > 0.0 ? rss / stream.chisq(df) : 0.0;
  Eigen::MatrixXd xtx_inv =
      (x_obs.transpose() * x_obs).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::VectorXd beta_star = beta_hat;
  if (sigma2_star > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(xtx_inv);
    if (llt.info() != Eigen::Success) {
      throw SingularDesignError("pmm posterior covariance not positive definite");
    }
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z[j] = stream.normal();
    beta_star += std::sqrt(sigma2_star) * (llt.matrixL() * z);
  }

  // Observed rows keep beta_hat predictions, missing rows use the draw.
  std::vector<std::pair<double, int>> pred_obs(n_obs);
  for (int i = 0; i < n_obs; ++i) pred_obs[i] = {x_obs.row(i).dot(beta_hat), obs[i]};
  std::sort(pred_obs.begin(), pred_obs.end());

  Eigen::VectorXd out = col;
  std::vector<int> candidates;
  candidates.reserve(donors);
  for (int i : mis) {
    double target = predictors.row(i).dot(beta_star);
    // Two-pointer scan outward from the insertion point; ties take the lower
    // predicted value first.
    auto it = std::lower_bound(pred_obs.begin(), pred_obs.end(),
                               std::make_pair(target, std::numeric_limits<int>::min()));
    int right = static_cast<int>(it - pred_obs.begin());
    int left = right - 1;
    candidates.clear();
    while (static_cast<int>(candidates.size()) < donors) {
      if (left < 0) {
        candidates.push_back(right++);
      } else if (right >= n_obs) {
        candidates.push_back(left--);
      } else if (std::abs(pred_obs[left].first - target) <=
                 std::abs(pred_obs[right].first - target)) {
        candidates.push_back(left--);
      } else {
        candidates.push_back(right++);
      }
    }
    int pick = candidates[stream.uniform_index(candidates.size())];
    out[i] = col[pred_obs[pick].second];
  }
  return out;
}

Eigen::VectorXd logreg_impute_column(const Eigen::VectorXd& col, const std::vector<bool>& missing,
                                     const Eigen::MatrixXd& predictors, RngStream& stream) {
  const int n = static_cast<int>(col.size());
  if (predictors.rows() != n || static_cast<int>(missing.size()) != n) {
    throw SpecError("logreg_impute_column: size mismatch");
  }
  std::vector<int> obs = observed_indices(missing);
  std::vector<int> mis;
  for (int i = 0; i < n; ++i) {
    if (missing[i]) mis.push_back(i);
  }
  if (mis.empty()) return col;
  const int p = static_cast<int>(predictors.cols());
  if (static_cast<int>(obs.size()) < p + 2) {
    throw ImputationError("logreg: too few observed rows for the model");
  }

  Eigen::MatrixXd x_obs(obs.size(), p);
  Eigen::VectorXd y_obs(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    x_obs.row(i) = predictors.row(obs[i]);
    y_obs[i] = col[obs[i]];
  }

  glm::RegressionFit fit = glm::fit_logistic(x_obs, y_obs);

  Eigen::LLT<Eigen::MatrixXd> llt(fit.covariance_model);
  if (llt.info() != Eigen::Success) {
    throw SingularDesignError("logreg posterior covariance not positive definite");
  }
  Eigen::VectorXd z(p);
  for (int j = 0; j < p; ++j) z[j] = stream.normal();
  Eigen::VectorXd beta_star = fit.coefficients + llt.matrixL() * z;

  Eigen::VectorXd out = col;
  for (int i : mis) {
    double prob = glm::expit(predictors.row(i).dot(beta_star));
    out[i] = stream.bernoulli(prob) ? 1.0 : 0.0;
  }
  return out;
}

ImputedStack multiple_impute(const Dataset& d, const ImputationSpec& spec, RngStream& stream) {
  spec.validate();
  const int n = d.n();

  // Template frame shared by all chains.
  Frame base;
  base.n = n;
  base.values[var_index(Var::x1)] = d.x1;
  base.values[var_index(Var::t)] = d.t;
  base.values[var_index(Var::y)] = d.y;
  base.values[var_index(Var::z2)] = d.z2;
  base.values[var_index(Var::x2)] = d.x2;
  base.missing[var_index(Var::x2)] = d.x2_missing;
  base.values[var_index(Var::zps)] = d.zps;
  base.missing[var_index(Var::zps)] = d.zps_missing;

  bool frame_needs_ps = false;
  bool has_passive_ps = false;
  for (const auto& col : spec.columns) {
    if (col.method == Method::passive_derive_ps) has_passive_ps = true;
    if (col.target == Var::ps && col.method != Method::passive_derive_ps && !spec.active_ps) {
      throw SpecError("ps can only be an imputation target in active mode");
    }
    for (Var pvar : col.predictors) {
      if (pvar == Var::ps) frame_needs_ps = true;
    }
  }
  if (frame_needs_ps && !spec.active_ps && !has_passive_ps) {
    throw SpecError("ps used as a predictor but never derived or imputed");
  }

  // Every masked column must be handled by some imputation model.
  for (Var v : {Var::x2, Var::zps}) {
    const auto* mask = base.mask(v);
    if (mask == nullptr) continue;
    bool masked = std::find(mask->begin(), mask->end(), true) != mask->end();
    if (!masked) continue;
    bool covered = false;
    for (const auto& col : spec.columns) {
      if (col.target == v && col.method != Method::passive_derive_ps) covered = true;
    }
    if (!covered) {
      throw SpecError(std::string("masked column ") + var_name(v) +
                      " has no imputation model");
    }
  }

  if (spec.active_ps) {
    // PS computed in complete cases only; elsewhere it is a missing cell.
    std::vector<int> cc = d.complete_case_indices();
    if (cc.size() < 5) throw ImputationError("too few complete cases to seed the PS column");
    Eigen::MatrixXd design(cc.size(), 3);
    Eigen::VectorXd response(cc.size());
    for (std::size_t i = 0; i < cc.size(); ++i) {
      design(i, 0) = 1.0;
      design(i, 1) = d.x1[cc[i]];
      design(i, 2) = d.x2[cc[i]];
      response[i] = d.t[cc[i]];
    }
    glm::RegressionFit fit = glm::fit_logistic(design, response);
    Eigen::VectorXd ps_col = Eigen::VectorXd::Constant(n, std::nan(""));
    std::vector<bool> ps_missing(n, true);
    for (std::size_t i = 0; i < cc.size(); ++i) {
      ps_col[cc[i]] = fit.fitted[i];
      ps_missing[cc[i]] = false;
    }
    base.values[var_index(Var::ps)] = ps_col;
    base.missing[var_index(Var::ps)] = ps_missing;
  }

  // Preconditions on model sizes, checked once on the template.
  for (const auto& col : spec.columns) {
    if (col.method == Method::passive_derive_ps) continue;
    const auto* mask = base.mask(col.target);
    if (mask == nullptr) continue;  // fully observed, nothing to impute
    int n_obs = static_cast<int>(observed_indices(*mask).size());
    int p = static_cast<int>(col.predictors.size()) + 1;
    if (n_obs < p + 2) {
      throw ImputationError(std::string("too few observed rows to impute ") +
                            var_name(col.target));
    }
  }

  ImputedStack stack;
  stack.provenance = spec;
  stack.completions.reserve(spec.m);
  stack.ps.reserve(spec.m);

  for (int k = 0; k < spec.m; ++k) {
    RngStream chain = stream.child(static_cast<std::uint64_t>(k));
    try {
      Frame frame = base;
      for (const auto& col : spec.columns) {
        if (col.method != Method::passive_derive_ps) initialize_column(frame, col.target, chain);
      }
      if (has_passive_ps && !spec.active_ps) {
        // Derived column: seed from the initialized completion so it exists
        // as a predictor from the first pass regardless of visit order.
        frame.values[var_index(Var::ps)] = derive_ps_column(frame);
      }

      for (int it = 0; it < spec.maxit; ++it) {
        for (const auto& col : spec.columns) {
          if (col.method == Method::passive_derive_ps) {
            frame.values[var_index(Var::ps)] = derive_ps_column(frame);
            continue;
          }
          const auto* mask = frame.mask(col.target);
          if (mask == nullptr) continue;
          Eigen::MatrixXd design = frame.design_for(col.predictors);
          Eigen::VectorXd& target = frame.values[var_index(col.target)];
          if (col.method == Method::pmm) {
            target = pmm_impute_column(target, *mask, design, spec.pmm_donors, chain);
          } else {
            target = logreg_impute_column(target, *mask, design, chain);
          }
        }
      }

      Dataset completion = d;
      completion.x2 = frame.values[var_index(Var::x2)];
      completion.zps = frame.values[var_index(Var::zps)];
      stack.completions.push_back(std::move(completion));
      if (frame.has_column(Var::ps)) {
        stack.ps.push_back(frame.values[var_index(Var::ps)]);
      }
    } catch (const Error& e) {
      throw ImputationError("imputation chain " + std::to_string(k) + " failed: " + e.what());
    }
  }
  return stack;
}

}  // namespace psmlab::mice
