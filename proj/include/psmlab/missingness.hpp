#pragma once

#include "psmlab/datagen.hpp"
#include "psmlab/rng.hpp"

namespace psmlab {

enum class Mechanism { MCAR, MAR1, MAR2A, MAR2B, MNAR };
enum class AuxMechanism { none, aux_MCAR, aux_MAR1, aux_MAR2 };

// Missing-data mechanism for X2 plus an optional second mechanism masking the
// PS-linked auxiliary. Intercepts are calibrated per dataset so the mean
// masking probability hits the target fraction.
struct MdmSpec {
  Mechanism mechanism = Mechanism::MCAR;
  double gamma11 = 5.0;
  double gamma00 = 1.0;
  double target_missing_x2 = 0.5;
  AuxMechanism aux_mechanism = AuxMechanism::none;
  double eps11 = 5.0;
  double eps10 = 0.0;
  double eps01 = 0.0;
  double eps00 = 5.0;
  double target_missing_zps = 0.2;

  void validate() const;  // throws SpecError

  // Per-group coefficients for the named auxiliary mechanism
  // ((t,psb) = (1,1),(1,0),(0,1),(0,0)); aux_MCAR zeroes all four.
  static MdmSpec with_aux(Mechanism m, AuxMechanism aux);
};

// Intercept such that mean(expit(intercept + offset_i)) == target, bisection
// to 1e-8. Throws CalibrationError when unreachable.
double calibrate_missingness_intercept(const Eigen::VectorXd& offsets, double target);

// Masks x2 (and zps when an aux mechanism is set) in a copy of `d`.
// Requires a dataset with no existing missingness.
Dataset induce_missingness(const Dataset& d, const MdmSpec& spec, RngStream& stream);

}  // namespace psmlab
