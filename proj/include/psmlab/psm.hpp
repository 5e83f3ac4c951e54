#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "psmlab/rng.hpp"

namespace psmlab::psm {

// Injective 1:1 treated-control pairing under a logit-scale caliper.
struct MatchedSample {
  std::vector<std::pair<int, int>> pairs;  // (treated index, control index)
  double caliper_width = 0.0;              // logit scale
  std::vector<int> unmatched_treated;
  Eigen::VectorXd ps_used;

  int n_pairs() const { return static_cast<int>(pairs.size()); }
  int n_treated() const {
    return n_pairs() + static_cast<int>(unmatched_treated.size());
  }
  double pct_treated_matched() const {
    return n_treated() == 0 ? 0.0 : static_cast<double>(n_pairs()) / n_treated();
  }
  std::vector<int> matched_rows() const;  // all matched indices, treated first per pair
};

enum class Covariate { x1, x2 };

enum class BalanceSlice {
  full_data,
  imputed_data,
  averaged_data,
  observed_part,
  missing_part,
  original_data,
};

struct BalanceEntry {
  Covariate covariate;
  BalanceSlice slice;
  double value;
};

struct BalanceReport {
  double pct_treated_matched = 0.0;
  std::vector<BalanceEntry> std_diff;

  void set(Covariate c, BalanceSlice s, double v);
  std::optional<double> get(Covariate c, BalanceSlice s) const;
};

enum class SeKind { robust_cluster, rubin_pooled, bootstrap, none };
enum class AdjustMode { adjusted, unadjusted };

struct EffectEstimate {
  double att = 0.0;
  std::optional<double> se_robust;   // robust-cluster or Rubin-pooled
  std::optional<double> se_bootstrap;
  SeKind se_kind = SeKind::none;     // which SE is primary for coverage
  double n_pairs = 0.0;              // mean over completions for INT-within
  BalanceReport diagnostics;

  std::optional<double> se() const {
    switch (se_kind) {
      case SeKind::robust_cluster:
      case SeKind::rubin_pooled:
        return se_robust;
      case SeKind::bootstrap:
        return se_bootstrap;
      case SeKind::none:
        return std::nullopt;
    }
    return std::nullopt;
  }
};

// Logistic fit of t on (1, x1, x2); returns response-scale probabilities and
// the three coefficients. x2 may be fractional (averaged completions).
std::pair<Eigen::VectorXd, Eigen::Vector3d> estimate_ps(const Eigen::VectorXd& x1,
                                                        const Eigen::VectorXd& x2,
                                                        const Eigen::VectorXd& t);

// Greedy 1:1 nearest-neighbor matching without replacement on |logit(ps)|
// distance, caliper 0.2 * SD(logit(ps)). Treated units are processed in a
// uniformly random order drawn from `stream`; ties go to the lowest control
// index. Throws DegenerateCaliperError when all PS are identical.
MatchedSample match_caliper_nn(const Eigen::VectorXd& ps, const Eigen::VectorXd& t,
                               RngStream& stream);

// Signed (mean1 - mean0) / sqrt((var1 + var0) / 2) with sample variances.
// Returns 0 when both groups are degenerate with equal means; throws when the
// pooled variance is zero but the means differ.
double standardized_difference(const Eigen::VectorXd& x, const Eigen::VectorXd& groups);

// OLS treatment coefficient on the matched rows: y ~ t (+ x1 + x2 when
// adjusted). The SE is left for the caller (cluster-robust or bootstrap).
EffectEstimate estimate_att(const Eigen::VectorXd& y, const Eigen::VectorXd& t,
                            const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                            const MatchedSample& sample, AdjustMode adjust);

}  // namespace psmlab::psm
