#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace sparsebench {

/// L1/L2 penalty: objective (1/2n)||y - X b||^2 + lambda (alpha |b|_1 + (1-alpha) |b|_2^2).
/// alpha = 1 is pure lasso, alpha = 0 pure ridge.
struct PenaltyConfig {
  double lambda = 0.0;
  double alpha = 1.0;
};

/// Marginal posterior summary of one coefficient.
struct CoefficientSummary {
  double mean = 0.0;
  double hdi_low = 0.0;
  double hdi_high = 0.0;
};

/// Common result record for all models.
struct FitResult {
  Eigen::VectorXd beta_hat;
  std::optional<PenaltyConfig> chosen_penalty;
  double fit_time = 0.0;  // seconds, the fit call only
  std::optional<std::vector<CoefficientSummary>> posterior;
  std::optional<int> divergences;   // total across chains
  std::optional<double> max_rhat;   // worst split-Rhat over coefficients
  bool converged = true;
};

}  // namespace sparsebench
