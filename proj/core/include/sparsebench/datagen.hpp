#pragma once

#include <cstdint>
#include <string>

#include "sparsebench/dataset.hpp"
#include "sparsebench/rng.hpp"

namespace sparsebench {

/// Builds the p x p covariance matrix for a design:
///   Independent: identity
///   Block:       1 on the diagonal, rho within size-5 blocks, 0 across blocks
///   Toeplitz:    rho^|i-j|
/// Throws std::invalid_argument for p < 1 or rho outside [0, 1).
Eigen::MatrixXd build_covariance(const CovarianceSpec& spec);

/// Draws n i.i.d. rows from N(0, cov) via the lower Cholesky factor.
/// Throws std::invalid_argument if cov is not positive definite.
Eigen::MatrixXd sample_design(const Eigen::MatrixXd& cov, int n, Rng& rng);

struct SparseBeta {
  Eigen::VectorXd beta_star;
  std::vector<int> support;  // ascending
};

/// Sparse coefficient vector: floor(0.2 p) positions chosen uniformly
/// without replacement, values i.i.d. N(0, 9); exact zeros elsewhere.
/// Requires p >= 5 so the support is nonempty.
SparseBeta sample_sparse_beta(int p, Rng& rng);

/// sigma = sqrt(Var(signal) / snr) with the population variance (divide
/// by N) of the given signal vector. Rejects zero-variance signals.
double calibrate_noise(const Eigen::VectorXd& signal, double snr);

/// Training size rule for synthetic problems: max(50, floor(1.5 p)).
int train_size_for(int p);

inline constexpr int kTestSize = 200;

/// Generates a full synthetic problem: n_train + 200 design rows, one
/// sparse coefficient vector, noise calibrated on the combined signal,
/// then a train/test split (first n_train rows train, last 200 test).
/// Deterministic given (spec, snr, seed).
Dataset generate_dataset(const CovarianceSpec& spec, double snr, std::uint64_t seed);

/// Loads the Diabetes CSV (10 features + target, 442 rows; delimiter
/// comma/tab/semicolon/space, optional header). Rows are shuffled with
/// split_seed, the first 354 go to train and the last 88 to test, and
/// all columns are standardized with training-fold mean and population
/// standard deviation. Malformed input is reported with row/column
/// position.
Dataset load_diabetes(const std::string& path, std::uint64_t split_seed);

}  // namespace sparsebench
