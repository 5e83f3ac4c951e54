#pragma once

#include <Eigen/Dense>
#include <vector>

#include "psmlab/rng.hpp"

namespace psmlab {

// Generative model for one simulated cohort: two correlated binary
// confounders, a calibrated logistic treatment, a linear outcome, and two
// continuous auxiliaries (one tied to X2, one tied to the estimated PS).
//
// The coefficient defaults are calibrated so the simulated pipeline matches
// the reference study's reported operating characteristics at n = 2000
// (full-data PSM empirical SE ~ 0.38, complete-variable-analysis bias ~ 5.06,
// treated fraction ~ 0.30).
struct GenerativeParams {
  int n = 2000;
  double rho = 0.5;                  // latent normal correlation
  double alpha0 = std::nan("");      // treatment intercept; NaN = calibrate
  double alpha1 = 2.0;
  double alpha2 = 2.0;
  double beta0 = 0.0;
  double beta1 = 12.3;
  double beta2 = 12.3;
  double beta_t = 2.0;
  double sigma_y = 5.25;
  double delta02 = 1.0;
  double delta12 = 10.0;
  double delta0ps = 0.0;
  double delta1ps = 10.0;
  double sigma_z = 1.0;
  double target_treated_fraction = 0.30;

  void validate() const;  // throws SpecError
};

// Columnar cohort. x2 / zps carry the maskable copies; their *_missing flags
// say which cells have been made missing (values there are NaN). Pre-masking
// truth is always retained in x2_true / zps_true.
struct Dataset {
  Eigen::VectorXd x1;
  Eigen::VectorXd x2_true;
  Eigen::VectorXd x2;
  std::vector<bool> x2_missing;
  Eigen::VectorXd t;
  Eigen::VectorXd y;
  Eigen::VectorXd z2;
  Eigen::VectorXd zps_true;
  Eigen::VectorXd zps;
  std::vector<bool> zps_missing;
  Eigen::VectorXd ps_full;  // logistic fit of t on (x1, x2_true), frozen

  int n() const { return static_cast<int>(x1.size()); }
  bool has_missing() const;
  int n_missing_x2() const;
  std::vector<int> complete_case_indices() const;  // rows with x2 observed
  Dataset take_rows(const std::vector<int>& idx) const;
};

// Solves for the treatment intercept that hits the target treated fraction in
// expectation over the four dichotomized-confounder cells (orthant
// probabilities of the latent bivariate normal). Bisection to |f| < 1e-10.
double calibrate_treatment_intercept(const GenerativeParams& params);

// Draws a full synthetic cohort; no missingness yet.
Dataset generate_dataset(const GenerativeParams& params, RngStream& stream);

// Indicator v[i] > median(v), where the median of an even-length vector is
// the lower of the two middle order statistics.
std::vector<int> dichotomize_at_median(const Eigen::VectorXd& v);

}  // namespace psmlab
