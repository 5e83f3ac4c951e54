#include "psmlab/missingness.hpp"

#include <cmath>
#include <limits>

#include "psmlab/errors.hpp"
#include "psmlab/glm.hpp"

namespace psmlab {

void MdmSpec::validate() const {
  if (!(target_missing_x2 > 0.0 && target_missing_x2 < 1.0)) {
    throw SpecError("target_missing_x2 must lie in (0, 1)");
  }
  if (aux_mechanism != AuxMechanism::none) {
    if (mechanism != Mechanism::MAR2B) {
      throw SpecError("auxiliary missingness is only defined for MAR2B");
    }
    if (!(target_missing_zps > 0.0 && target_missing_zps < 1.0)) {
      throw SpecError("target_missing_zps must lie in (0, 1)");
    }
  }
}

MdmSpec MdmSpec::with_aux(Mechanism m, AuxMechanism aux) {
  MdmSpec spec;
  spec.mechanism = m;
  spec.aux_mechanism = aux;
  switch (aux) {
    case AuxMechanism::none:
      break;
    case AuxMechanism::aux_MCAR:
      spec.eps11 = spec.eps10 = spec.eps01 = spec.eps00 = 0.0;
      break;
    case AuxMechanism::aux_MAR1:
      spec.eps11 = 5.0; spec.eps10 = 0.0; spec.eps01 = 0.0; spec.eps00 = 5.0;
      break;
    case AuxMechanism::aux_MAR2:
      spec.eps11 = 0.0; spec.eps10 = 5.0; spec.eps01 = 5.0; spec.eps00 = 0.0;
      break;
  }
  return spec;
}

double calibrate_missingness_intercept(const Eigen::VectorXd& offsets, double target) {
  if (!(target > 0.0 && target < 1.0)) {
    throw CalibrationError("missingness target must lie in (0, 1)");
  }
  auto mean_prob = [&](double g0) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < offsets.size(); ++i) s += glm::expit(g0 + offsets[i]);
    return s / static_cast<double>(offsets.size());
  };
  double lo = -60.0, hi = 60.0;
  if (mean_prob(lo) > target || mean_prob(hi) < target) {
    throw CalibrationError("missingness intercept target not bracketed");
  }
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    double f = mean_prob(mid);
    if (std::abs(f - target) < 1e-8) return mid;
    if (f < target) lo = mid;
    else hi = mid;
  }
  throw CalibrationError("missingness intercept bisection did not converge");
}

Dataset induce_missingness(const Dataset& d, const MdmSpec& spec, RngStream& stream) {
  spec.validate();
  if (d.has_missing()) throw SpecError("dataset already contains missingness");
  const int n = d.n();

  std::vector<int> yb = dichotomize_at_median(d.y);
  std::vector<int> z2b = dichotomize_at_median(d.z2);
  std::vector<int> zpsb = dichotomize_at_median(d.zps_true);
  std::vector<int> psb = dichotomize_at_median(d.ps_full);

  Eigen::VectorXd offsets = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const bool t1 = d.t[i] == 1.0;
    switch (spec.mechanism) {
      case Mechanism::MCAR:
        break;
      case Mechanism::MAR1:
        if (t1 && yb[i] == 1) offsets[i] += spec.gamma11;
        if (!t1 && yb[i] == 0) offsets[i] += spec.gamma00;
        break;
      case Mechanism::MAR2A:
        if (t1 && yb[i] == 1 && z2b[i] == 1) offsets[i] += spec.gamma11;
        if (!t1 && yb[i] == 0 && z2b[i] == 0) offsets[i] += spec.gamma00;
        break;
      case Mechanism::MAR2B:
        if (t1 && yb[i] == 1 && zpsb[i] == 1) offsets[i] += spec.gamma11;
        if (!t1 && yb[i] == 0 && zpsb[i] == 0) offsets[i] += spec.gamma00;
        break;
      case Mechanism::MNAR:
        if (t1 && yb[i] == 1 && d.x2_true[i] == 1.0) offsets[i] += spec.gamma11;
        if (!t1 && yb[i] == 0 && d.x2_true[i] == 0.0) offsets[i] += spec.gamma00;
        break;
    }
  }
  double gamma0 = calibrate_missingness_intercept(offsets, spec.target_missing_x2);

  Dataset out = d;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < n; ++i) {
    if (stream.bernoulli(glm::expit(gamma0 + offsets[i]))) {
      out.x2_missing[i] = true;
      out.x2[i] = nan;
    }
  }

  if (spec.aux_mechanism != AuxMechanism::none) {
    Eigen::VectorXd aux_offsets(n);
    for (int i = 0; i < n; ++i) {
      const bool t1 = d.t[i] == 1.0;
      const bool p1 = psb[i] == 1;
      if (t1 && p1) aux_offsets[i] = spec.eps11;
      else if (t1 && !p1) aux_offsets[i] = spec.eps10;
      else if (!t1 && p1) aux_offsets[i] = spec.eps01;
      else aux_offsets[i] = spec.eps00;
    }
    double eps0 = calibrate_missingness_intercept(aux_offsets, spec.target_missing_zps);
    for (int i = 0; i < n; ++i) {
      if (stream.bernoulli(glm::expit(eps0 + aux_offsets[i]))) {
        out.zps_missing[i] = true;
        out.zps[i] = nan;
      }
    }
  }
  return out;
}

}  // namespace psmlab
