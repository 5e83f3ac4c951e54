#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psmlab/datagen.hpp"
#include "psmlab/mice.hpp"
#include "psmlab/missingness.hpp"
#include "psmlab/psm.hpp"
#include "psmlab/rng.hpp"

namespace psmlab::strategies {

enum class StrategyKind { full_data, cc, cva, mean_imputation, missing_indicator, mi };
enum class MiImputation { derPassive, regPassive, regActive, redActive };
enum class MiIntegration { within, across, across2 };
enum class AuxVar { none, z2, zps };
enum class ImputationOrder { default_order, reverse };
enum class VarianceMode { robust_cluster, bootstrap, both };

struct StrategySpec {
  StrategyKind kind = StrategyKind::full_data;
  std::optional<MiImputation> mi_imputation;
  std::optional<MiIntegration> mi_integration;
  AuxVar include_aux = AuxVar::none;
  ImputationOrder imputation_order = ImputationOrder::default_order;
  psm::AdjustMode adjust = psm::AdjustMode::adjusted;
  VarianceMode variance = VarianceMode::robust_cluster;
  int m = 50;
  int maxit = 5;
  int B = 200;
  std::optional<int> boot_m;  // m inside bootstrap resamples; defaults to m

  void validate() const;      // throws SpecError on forbidden combinations
  std::string id() const;     // canonical name used in outputs
};

// Table-style predictor sets for the chosen MI strategy on this dataset.
mice::ImputationSpec build_imputation_spec(const Dataset& d, const StrategySpec& spec);

// Non-MI methods: full-data reference, complete cases, complete-variable
// analysis, mean fill, and the missing-indicator model. Robust-cluster SE
// with matched pairs as clusters.
psm::EffectEstimate run_common_method(const Dataset& d, const StrategySpec& spec,
                                      RngStream& stream);

// MI pipeline: impute per the strategy's predictor matrix, populate the
// per-completion PS (derived or imputed), then integrate.
psm::EffectEstimate run_mi_strategy(const Dataset& d, const StrategySpec& spec,
                                    RngStream& stream);

// Combines an imputed stack into one effect estimate:
//  within  - match and estimate per completion, average the effects
//  across  - average the PS vectors, one matched analysis on averaged data
//  across2 - average PS coefficients and covariates, then one matched analysis
psm::EffectEstimate integrate(const mice::ImputedStack& stack, const Dataset& original,
                              MiIntegration mode, psm::AdjustMode adjust, RngStream& stream,
                              bool want_se = true, bool want_balance = true);

// Rubin's rules: pooled point estimate and total variance
// W + (1 + 1/m) * B.
std::pair<double, double> pool_rubin(const std::vector<double>& estimates,
                                     const std::vector<double>& variances);

// Resamples rows of the masked dataset with replacement, reruns the full
// strategy on each resample, and returns the SD of the successful effect
// estimates. Throws when more than 10% of resamples fail.
double bootstrap_variance(const Dataset& d, const StrategySpec& spec, int B,
                          RngStream& stream);

// Dispatch plus variance estimation per spec.variance.
psm::EffectEstimate run_strategy(const Dataset& d, const StrategySpec& spec,
                                 RngStream& stream);

}  // namespace psmlab::strategies
