#pragma once

#include <Eigen/Dense>
#include <vector>

#include "psmlab/datagen.hpp"
#include "psmlab/rng.hpp"

namespace psmlab::mice {

// Columns addressable by imputation models. `ps` is a synthetic column that
// only exists inside the chained-equations frame (imputed directly in the
// active strategies, derived in the passive ones).
enum class Var { x1, x2, t, y, z2, zps, ps };

enum class Method { pmm, logreg, passive_derive_ps };

struct ColumnSpec {
  Var target = Var::x2;
  Method method = Method::logreg;
  std::vector<Var> predictors;  // intercept implicit; must exclude target
};

struct ImputationSpec {
  int m = 50;
  int maxit = 5;
  std::vector<ColumnSpec> columns;  // visit order within each iteration
  int pmm_donors = 5;
  // Treat the PS as an imputed column: derived in complete cases before the
  // chains start, then imputed like any other variable.
  bool active_ps = false;

  void validate() const;  // throws SpecError
};

struct ImputedStack {
  std::vector<Dataset> completions;        // m copies, all masked cells filled
  std::vector<Eigen::VectorXd> ps;         // per-completion PS (may be empty)
  ImputationSpec provenance;

  int m() const { return static_cast<int>(completions.size()); }
};

// Chained-equations multiple imputation. Each of the m chains runs
// independently on stream.child(k): masked cells start as random draws from
// the column's observed values, then `maxit` full passes refit and redraw
// each column in spec order. passive_derive_ps entries recompute the PS from
// the current completion instead of drawing.
ImputedStack multiple_impute(const Dataset& d, const ImputationSpec& spec, RngStream& stream);

// Predictive mean matching for one column. Bayesian linear regression on the
// observed rows; missing rows copy the observed value of a random donor among
// the `donors` closest predictive means (type-1 matching).
Eigen::VectorXd pmm_impute_column(const Eigen::VectorXd& col, const std::vector<bool>& missing,
                                  const Eigen::MatrixXd& predictors, int donors,
                                  RngStream& stream);

// Bayesian logistic imputation for one binary column: draw coefficients from
// the approximate posterior around the MLE, then Bernoulli draws.
Eigen::VectorXd logreg_impute_column(const Eigen::VectorXd& col, const std::vector<bool>& missing,
                                     const Eigen::MatrixXd& predictors, RngStream& stream);

}  // namespace psmlab::mice
