#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace sparsebench {

enum class Design { Independent, Block, Toeplitz };

/// Covariance structure of the synthetic design matrix.
/// rho must lie in [0, 1); it is ignored (treated as 0) for Independent.
struct CovarianceSpec {
  Design design = Design::Independent;
  int p = 0;
  double rho = 0.0;
  int block_size = 5;
};

/// The generating parameters of a synthetic problem.
struct GroundTruth {
  Eigen::VectorXd beta_star;     // exact zeros off support
  std::vector<int> support;      // ascending indices of nonzero entries
  double sigma = 0.0;            // noise standard deviation
  double snr = 0.0;              // requested signal-to-noise ratio
};

struct Dataset {
  Eigen::MatrixXd x_train;
  Eigen::VectorXd y_train;
  Eigen::MatrixXd x_test;
  Eigen::VectorXd y_test;
  std::optional<GroundTruth> truth;  // absent for real data
  std::string name;
};

}  // namespace sparsebench
