#pragma once

#include <cstdint>
#include <vector>

#include "sparsebench/fit_result.hpp"

namespace sparsebench {

/// Cross-validation layout for the path solvers. When lambda_grid is
/// empty the grid is data-driven: n_lambda log-spaced values descending
/// from lambda_max = max_j |x_j' y| / n down to lambda_min_ratio * lambda_max
/// (scaled by 1/alpha for elastic net). An explicit grid must be strictly
/// descending.
struct CvPlan {
  int n_folds = 5;
  int n_lambda = 100;
  double lambda_min_ratio = 1e-3;
  std::vector<double> lambda_grid;                                        // optional override
  std::vector<double> alpha_grid{0.1, 0.5, 0.7, 0.9, 0.95, 0.99, 1.0};
  std::uint64_t fold_seed = 0;
};

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int n);

/// The 50-point leave-one-out grid used by fit_ridge_loocv.
std::vector<double> ridge_default_grid();

/// Shuffled indices dealt into k folds whose sizes differ by at most one
/// (earlier folds take the remainder). Deterministic in fold_seed.
std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t fold_seed);

/// Unpenalized least squares via SVD. Requires n >= p and numerical full
/// column rank (smallest singular value > 1e-10 * largest).
FitResult fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Leave-one-out mean squared error of the ridge fit for each lambda in
/// the grid, computed in closed form from one SVD via the leverage
/// identity e_i / (1 - h_ii).
std::vector<double> ridge_loocv_errors(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       const std::vector<double>& lambda_grid);

/// Ridge refit at the lambda minimizing the closed-form LOOCV error.
FitResult fit_ridge_loocv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const std::vector<double>& lambda_grid = ridge_default_grid());

struct CdResult {
  Eigen::VectorXd beta;
  bool converged = false;
  int sweeps = 0;
};

/// Cyclic coordinate descent on the elastic-net objective
///   (1/2n)||y - X b||^2 + lambda (alpha |b|_1 + (1-alpha) |b|_2^2).
/// Sweeps stop when the largest coordinate change falls below
/// tol * max(1, |b|_inf) and the first-order optimality residual
/// (see kkt_residual) is within tol * max(1, |x' y|_inf / n).
/// Hitting max_sweeps returns the last iterate with converged = false.
CdResult coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const PenaltyConfig& penalty, double tol = 1e-7,
                            int max_sweeps = 10000,
                            const Eigen::VectorXd* warm_start = nullptr);

/// Largest violation of the subgradient optimality conditions of the
/// elastic-net objective at beta: for active j,
/// |x_j' r / n - 2 lambda (1-alpha) b_j - lambda alpha sign(b_j)|; for
/// inactive j, max(0, |x_j' r / n| - lambda alpha); r = y - X b.
double kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, const PenaltyConfig& penalty);

/// Lasso with k-fold CV over a descending lambda path (warm starts),
/// refit on the full data at the winning lambda.
FitResult fit_lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvPlan& plan);

/// Elastic net with a 2-D (alpha, lambda) CV search. Ties on validation
/// MSE break toward larger alpha, then larger lambda.
FitResult fit_elastic_net_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const CvPlan& plan);

}  // namespace sparsebench
