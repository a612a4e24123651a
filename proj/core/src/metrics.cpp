#include "sparsebench/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace sparsebench {

PredictionMetrics prediction_metrics(const Eigen::VectorXd& y_true,
                                     const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() == 0)
    throw std::invalid_argument("prediction_metrics: length mismatch or empty input");
  const double mse = (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size());
  return {mse, std::sqrt(mse)};
}

CoefficientMetrics coefficient_metrics(const Eigen::VectorXd& beta_hat,
                                       const Eigen::VectorXd& beta_star) {
  if (beta_hat.size() != beta_star.size() || beta_hat.size() == 0)
    throw std::invalid_argument("coefficient_metrics: length mismatch or empty input");
  const double l2 = (beta_hat - beta_star).norm();
  return {l2, l2 * l2 / static_cast<double>(beta_hat.size())};
}

SelectionMetrics selection_metrics(const Eigen::VectorXd& beta_hat,
                                   const std::vector<int>& support_true, double threshold) {
  const std::unordered_set<int> truth(support_true.begin(), support_true.end());
  int selected = 0;
  int hits = 0;
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    if (std::abs(beta_hat(j)) > threshold) {
      ++selected;
      if (truth.count(static_cast<int>(j))) ++hits;
    }
  }
  SelectionMetrics out;
  out.support_size_hat = selected;
  out.precision = selected > 0 ? static_cast<double>(hits) / selected : 0.0;
  out.recall = !truth.empty() ? static_cast<double>(hits) / static_cast<double>(truth.size()) : 0.0;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

CalibrationMetrics calibration_metrics(const std::vector<CoefficientSummary>& summaries,
                                       const Eigen::VectorXd& beta_star) {
  if (static_cast<Eigen::Index>(summaries.size()) != beta_star.size() || summaries.empty())
    throw std::invalid_argument("calibration_metrics: length mismatch or empty input");
  int covered = 0;
  double width_sum = 0.0;
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    const auto& s = summaries[j];
    const double truth = beta_star(static_cast<Eigen::Index>(j));
    if (truth >= s.hdi_low && truth <= s.hdi_high) ++covered;
    width_sum += s.hdi_high - s.hdi_low;
  }
  const double p = static_cast<double>(summaries.size());
  return {covered / p, width_sum / p};
}

}  // namespace sparsebench
