#include "psmlab/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "psmlab/errors.hpp"
#include "psmlab/glm.hpp"

namespace psmlab {

void GenerativeParams::validate() const {
  if (n < 2) throw SpecError("n must be at least 2");
  if (!(sigma_y > 0.0)) throw SpecError("sigma_y must be positive");
  if (!(sigma_z > 0.0)) throw SpecError("sigma_z must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw SpecError("rho must lie in (-1, 1)");
  if (!(target_treated_fraction > 0.0 && target_treated_fraction < 1.0)) {
    throw SpecError("target_treated_fraction must lie in (0, 1)");
  }
}

bool Dataset::has_missing() const {
  auto any = [](const std::vector<bool>& m) {
    return std::find(m.begin(), m.end(), true) != m.end();
  };
  return any(x2_missing) || any(zps_missing);
}

int Dataset::n_missing_x2() const {
  return static_cast<int>(std::count(x2_missing.begin(), x2_missing.end(), true));
}

std::vector<int> Dataset::complete_case_indices() const {
  std::vector<int> idx;
  idx.reserve(x2_missing.size());
  for (int i = 0; i < n(); ++i) {
    if (!x2_missing[i]) idx.push_back(i);
  }
  return idx;
}

Dataset Dataset::take_rows(const std::vector<int>& idx) const {
  Dataset out;
  const auto m = static_cast<Eigen::Index>(idx.size());
  auto gather = [&](const Eigen::VectorXd& src) {
    Eigen::VectorXd dst(m);
    for (Eigen::Index i = 0; i < m; ++i) dst[i] = src[idx[i]];
    return dst;
  };
  out.x1 = gather(x1);
  out.x2_true = gather(x2_true);
  out.x2 = gather(x2);
  out.t = gather(t);
  out.y = gather(y);
  out.z2 = gather(z2);
  out.zps_true = gather(zps_true);
  out.zps = gather(zps);
  out.ps_full = gather(ps_full);
  out.x2_missing.resize(idx.size());
  out.zps_missing.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.x2_missing[i] = x2_missing[idx[i]];
    out.zps_missing[i] = zps_missing[idx[i]];
  }
  return out;
}

double calibrate_treatment_intercept(const GenerativeParams& params) {
  params.validate();
  const double target = params.target_treated_fraction;

  // Orthant probabilities of the dichotomized bivariate normal.
  const double p_same = 0.25 + std::asin(params.rho) / (2.0 * M_PI);  // (1,1) and (0,0)
  const double p_diff = 0.25 - std::asin(params.rho) / (2.0 * M_PI);  // (1,0) and (0,1)

  auto treated_fraction = [&](double a0) {
    return p_same * glm::expit(a0) +
           p_diff * glm::expit(a0 + params.alpha1) +
           p_diff * glm::expit(a0 + params.alpha2) +
           p_same * glm::expit(a0 + params.alpha1 + params.alpha2);
  };

  double lo = -50.0, hi = 50.0;
  if (treated_fraction(lo) > target || treated_fraction(hi) < target) {
    throw CalibrationError("treatment intercept target not bracketed");
  }
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    double f = treated_fraction(mid);
    if (std::abs(f - target) < 1e-10) return mid;
    if (f < target) lo = mid;
    else hi = mid;
  }
  throw CalibrationError("treatment intercept bisection did not converge");
}

Dataset generate_dataset(const GenerativeParams& params, RngStream& stream) {
  params.validate();
  const int n = params.n;
  const double a0 = std::isnan(params.alpha0) ? calibrate_treatment_intercept(params)
                                              : params.alpha0;
  const double rho_c = std::sqrt(1.0 - params.rho * params.rho);

  Dataset d;
  d.x1.resize(n);
  d.x2_true.resize(n);
  d.t.resize(n);
  d.y.resize(n);
  d.z2.resize(n);
  d.zps_true.resize(n);
  d.ps_full.resize(n);

  for (int i = 0; i < n; ++i) {
    double u1 = stream.normal();
    double u2 = params.rho * u1 + rho_c * stream.normal();
    d.x1[i] = u1 > 0.0 ? 1.0 : 0.0;
    d.x2_true[i] = u2 > 0.0 ? 1.0 : 0.0;
  }
  for (int i = 0; i < n; ++i) {
    double p = glm::expit(a0 + params.alpha1 * d.x1[i] + params.alpha2 * d.x2_true[i]);
    d.t[i] = stream.bernoulli(p) ? 1.0 : 0.0;
  }
  for (int i = 0; i < n; ++i) {
    d.y[i] = params.beta0 + params.beta1 * d.x1[i] + params.beta2 * d.x2_true[i] +
             params.beta_t * d.t[i] + params.sigma_y * stream.normal();
  }
  for (int i = 0; i < n; ++i) {
    d.z2[i] = params.delta02 + params.delta12 * d.x2_true[i] + params.sigma_z * stream.normal();
  }

  // PS estimated on the pristine cohort, frozen for Zps generation and for
  // the PS-based missingness dichotomization later on.
  Eigen::MatrixXd design(n, 3);
  design.col(0).setOnes();
  design.col(1) = d.x1;
  design.col(2) = d.x2_true;
  glm::RegressionFit fit = glm::fit_logistic(design, d.t);
  d.ps_full = fit.fitted;

  for (int i = 0; i < n; ++i) {
    d.zps_true[i] = params.delta0ps + params.delta1ps * d.ps_full[i] +
                    params.sigma_z * stream.normal();
  }

  d.x2 = d.x2_true;
  d.zps = d.zps_true;
  d.x2_missing.assign(n, false);
  d.zps_missing.assign(n, false);
  return d;
}

std::vector<int> dichotomize_at_median(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw SpecError("dichotomize_at_median: empty vector");
  std::vector<double> sorted(v.data(), v.data() + v.size());
  // Lower of the two middle order statistics for even n.
  std::size_t k = (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
  double med = sorted[k];
  std::vector<int> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i] > med ? 1 : 0;
  return out;
}

}  // namespace psmlab
