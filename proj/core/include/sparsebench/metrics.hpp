#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sparsebench/fit_result.hpp"

namespace sparsebench {

struct PredictionMetrics {
  double mse = 0.0;
  double rmse = 0.0;
};

struct CoefficientMetrics {
  double l2_error = 0.0;
  double coef_mse = 0.0;  // l2_error^2 / p
};

struct SelectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support_size_hat = 0;
};

struct CalibrationMetrics {
  double coverage = 0.0;
  double avg_width = 0.0;
};

PredictionMetrics prediction_metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

CoefficientMetrics coefficient_metrics(const Eigen::VectorXd& beta_hat,
                                       const Eigen::VectorXd& beta_star);

/// Estimated support is {j : |beta_hat_j| > threshold} (strict). F1 is 0
/// when the estimated support or its intersection with the truth is
/// empty.
SelectionMetrics selection_metrics(const Eigen::VectorXd& beta_hat,
                                   const std::vector<int>& support_true,
                                   double threshold = 0.01);

/// Coverage counts closed-interval membership of each true coefficient
/// in its HDI; avg_width is the mean interval width.
CalibrationMetrics calibration_metrics(const std::vector<CoefficientSummary>& summaries,
                                       const Eigen::VectorXd& beta_star);

}  // namespace sparsebench
