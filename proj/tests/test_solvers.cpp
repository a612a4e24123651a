#include "doctest.h"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <set>

#include "sparsebench/datagen.hpp"
#include "sparsebench/metrics.hpp"
#include "sparsebench/rng.hpp"
#include "sparsebench/solvers.hpp"

using namespace sparsebench;

namespace {

Eigen::MatrixXd random_matrix(int n, int p, Rng& rng) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

Eigen::VectorXd random_vector(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// Independent verifier of the first-order optimality conditions, kept
// deliberately scalar and separate from the solver's own check.
double kkt_violation_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& beta, double lambda, double alpha) {
  const double n = static_cast<double>(x.rows());
  double worst = 0.0;
  for (int j = 0; j < x.cols(); ++j) {
    double corr = 0.0;
    for (int i = 0; i < x.rows(); ++i) {
      double fitted = 0.0;
      for (int k = 0; k < x.cols(); ++k) fitted += x(i, k) * beta(k);
      corr += x(i, j) * (y(i) - fitted);
    }
    corr /= n;
    double v;
    if (beta(j) != 0.0)
      v = std::abs(corr - 2.0 * lambda * (1.0 - alpha) * beta(j) -
                   lambda * alpha * (beta(j) > 0 ? 1.0 : -1.0));
    else
      v = std::max(0.0, std::abs(corr) - lambda * alpha);
    worst = std::max(worst, v);
  }
  return worst;
}

double en_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, double lambda, double alpha) {
  const double n = static_cast<double>(x.rows());
  return (y - x * beta).squaredNorm() / (2.0 * n) +
         lambda * (alpha * beta.cwiseAbs().sum() + (1.0 - alpha) * beta.squaredNorm());
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("log_space spans both endpoints") {
  const auto grid = log_space(1e-4, 1e4, 50);
  CHECK(grid.size() == 50);
  CHECK(grid.front() == doctest::Approx(1e-4));
  CHECK(grid.back() == doctest::Approx(1e4));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("kfold sizes and partition") {
  const auto even = kfold_split(10, 5, 1);
  for (const auto& f : even) CHECK(f.size() == 2);

  const auto uneven = kfold_split(11, 5, 1);
  std::vector<std::size_t> sizes;
  for (const auto& f : uneven) sizes.push_back(f.size());
  CHECK(sizes == std::vector<std::size_t>{3, 2, 2, 2, 2});

  const auto folds = kfold_split(37, 5, 99);
  std::set<int> seen;
  for (const auto& f : folds)
    for (int i : f) {
      CHECK(i >= 0);
      CHECK(i < 37);
      CHECK(seen.insert(i).second);  // pairwise disjoint
    }
  CHECK(seen.size() == 37);

  CHECK(kfold_split(20, 4, 5) == kfold_split(20, 4, 5));
  CHECK(kfold_split(20, 4, 5) != kfold_split(20, 4, 6));
  CHECK_THROWS(kfold_split(3, 4, 0));
}

TEST_CASE("ols solves the identity design exactly") {
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  const FitResult fit = fit_ols(Eigen::MatrixXd::Identity(5, 5), y);
  CHECK((fit.beta_hat - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ols matches a QR least-squares oracle") {
  Rng rng(42);
  const Eigen::MatrixXd x = random_matrix(30, 8, rng);
  const Eigen::VectorXd y = random_vector(30, rng);
  const FitResult fit = fit_ols(x, y);
  const Eigen::VectorXd oracle = x.colPivHouseholderQr().solve(y);
  CHECK((fit.beta_hat - oracle).cwiseAbs().maxCoeff() < 1e-8);

  // residual orthogonality
  const double resid = (x.transpose() * (y - x * fit.beta_hat)).cwiseAbs().maxCoeff();
  CHECK(resid < 1e-8 * (x.transpose() * y).cwiseAbs().maxCoeff());
}

TEST_CASE("ols recovers a noiseless signal") {
  Rng rng(7);
  const Eigen::MatrixXd x = random_matrix(40, 6, rng);
  Eigen::VectorXd beta(6);
  beta << 3, -1, 0, 2, 0, 5;
  const FitResult fit = fit_ols(x, x * beta);
  CHECK((fit.beta_hat - beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ols rejects ill-posed designs") {
  Rng rng(3);
  Eigen::MatrixXd x = random_matrix(20, 4, rng);
  x.col(3) = x.col(0);  // exact collinearity
  CHECK_THROWS(fit_ols(x, random_vector(20, rng)));
  CHECK_THROWS(fit_ols(random_matrix(3, 5, rng), random_vector(3, rng)));
}

TEST_CASE("ridge at vanishing penalty approaches ols") {
  Rng rng(11);
  const Eigen::MatrixXd x = random_matrix(50, 6, rng);
  const Eigen::VectorXd y = random_vector(50, rng);
  const FitResult ols = fit_ols(x, y);
  const FitResult ridge = fit_ridge_loocv(x, y, {1e-12});
  CHECK((ridge.beta_hat - ols.beta_hat).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("closed-form loocv equals brute-force leave-one-out refits") {
  Rng rng(21);
  const int n = 20, p = 5;
  const Eigen::MatrixXd x = random_matrix(n, p, rng);
  Eigen::VectorXd beta(p);
  beta << 1, 0, -2, 0.5, 0;
  const Eigen::VectorXd y = x * beta + 0.3 * random_vector(n, rng);

  const std::vector<double> grid{0.01, 0.1, 1.0};
  const auto closed_form = ridge_loocv_errors(x, y, grid);

  for (std::size_t g = 0; g < grid.size(); ++g) {
    // Brute force: refit with row i removed, same absolute penalty 2 n lambda.
    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd xi(n - 1, p);
      Eigen::VectorXd yi(n - 1);
      int r = 0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        xi.row(r) = x.row(k);
        yi(r++) = y(k);
      }
      const Eigen::MatrixXd gram =
          xi.transpose() * xi + 2.0 * n * grid[g] * Eigen::MatrixXd::Identity(p, p);
      const Eigen::VectorXd bi = gram.ldlt().solve(xi.transpose() * yi);
      const double err = y(i) - x.row(i).dot(bi);
      sse += err * err;
    }
    CHECK(closed_form[g] == doctest::Approx(sse / n).epsilon(1e-8));
  }
}

TEST_CASE("ridge norm shrinks monotonically along the grid tail") {
  Rng rng(13);
  const Eigen::MatrixXd x = random_matrix(40, 5, rng);
  const Eigen::VectorXd y = random_vector(40, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {10.0, 100.0, 1000.0, 1e4, 1e6}) {
    const double norm = fit_ridge_loocv(x, y, {lambda}).beta_hat.norm();
    CHECK(norm < previous);
    previous = norm;
  }
  CHECK(previous < 1e-4);
}

TEST_CASE("coordinate descent with no penalty equals ols") {
  Rng rng(31);
  const Eigen::MatrixXd x = random_matrix(40, 10, rng);
  const Eigen::VectorXd y = random_vector(40, rng);
  const CdResult cd = coordinate_descent(x, y, {0.0, 1.0});
  CHECK(cd.converged);
  const FitResult ols = fit_ols(x, y);
  CHECK((cd.beta - ols.beta_hat).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("coordinate descent matches soft thresholding on orthonormal designs") {
  Rng rng(41);
  const int n = 60, p = 8;
  // Columns scaled so that x'x / n = I exactly.
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(n, p, rng))
                                .householderQ() *
                            Eigen::MatrixXd::Identity(n, p);
  const Eigen::MatrixXd x = std::sqrt(static_cast<double>(n)) * q;
  const Eigen::VectorXd y = random_vector(n, rng);

  const double lambda = 0.2;
  const CdResult cd = coordinate_descent(x, y, {lambda, 1.0});
  REQUIRE(cd.converged);
  for (int j = 0; j < p; ++j) {
    const double z = x.col(j).dot(y) / n;
    const double expected = std::copysign(std::max(std::abs(z) - lambda, 0.0), z);
    CHECK(cd.beta(j) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("converged solutions pass an independent KKT check") {
  Rng rng(51);
  for (double rho : {0.0, 0.6}) {
    const Eigen::MatrixXd cov = build_covariance({Design::Toeplitz, 12, rho});
    const Eigen::MatrixXd x = sample_design(cov, 80, rng);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(12);
    beta(1) = 4;
    beta(7) = -3;
    const Eigen::VectorXd y = x * beta + random_vector(80, rng);
    const double lambda_max = (x.transpose() * y).cwiseAbs().maxCoeff() / 80.0;
    const double scale = std::max(1.0, lambda_max);
    for (double lambda : {0.5 * lambda_max, 0.1 * lambda_max, 0.01 * lambda_max})
      for (double alpha : {1.0, 0.7, 0.3}) {
        const CdResult cd = coordinate_descent(x, y, {lambda, alpha});
        REQUIRE(cd.converged);
        CHECK(kkt_violation_oracle(x, y, cd.beta, lambda, alpha) <= 1e-7 * scale);
      }
  }
}

TEST_CASE("the objective is non-increasing across full sweeps") {
  Rng rng(61);
  const Eigen::MatrixXd x = sample_design(build_covariance({Design::Block, 10, 0.6}), 50, rng);
  const Eigen::VectorXd y = random_vector(50, rng);
  const double lambda = 0.05, alpha = 0.9;
  double previous = en_objective(x, y, Eigen::VectorXd::Zero(10), lambda, alpha);
  for (int sweeps = 1; sweeps <= 12; ++sweeps) {
    // Re-run from zero with a sweep cap; cyclic CD makes prefixes agree.
    const CdResult cd = coordinate_descent(x, y, {lambda, alpha}, 1e-7, sweeps);
    const double value = en_objective(x, y, cd.beta, lambda, alpha);
    CHECK(value <= previous + 1e-12);
    previous = value;
  }
}

TEST_CASE("the path starts empty at lambda_max and grows as lambda shrinks") {
  Rng rng(71);
  const Eigen::MatrixXd x = random_matrix(50, 9, rng);
  const Eigen::VectorXd y = random_vector(50, rng);
  double lambda_max = 0.0;
  for (int j = 0; j < 9; ++j) lambda_max = std::max(lambda_max, std::abs(x.col(j).dot(y)) / 50.0);
  const CdResult top = coordinate_descent(x, y, {lambda_max, 1.0});
  CHECK(top.converged);
  CHECK(top.beta.isZero(0.0));

  Eigen::VectorXd warm = top.beta;
  int bottom_nonzeros = 0;
  for (double lambda : log_space(lambda_max, 1e-3 * lambda_max, 20)) {
    const CdResult cd = coordinate_descent(x, y, {lambda, 1.0}, 1e-7, 10000, &warm);
    warm = cd.beta;
    bottom_nonzeros = 0;
    for (int j = 0; j < 9; ++j)
      if (warm(j) != 0.0) ++bottom_nonzeros;
  }
  CHECK(bottom_nonzeros > 0);  // >= the count at lambda_max, which is zero
}

TEST_CASE("hitting the sweep cap flags non-convergence") {
  Rng rng(81);
  const Eigen::MatrixXd x = sample_design(build_covariance({Design::Block, 10, 0.9}), 50, rng);
  const Eigen::VectorXd y = random_vector(50, rng);
  // A tolerance below the floating-point noise floor is unattainable, so
  // the solver must exhaust its sweep budget and flag the result.
  const CdResult cd = coordinate_descent(x, y, {1e-6, 0.5}, 1e-18, 2);
  CHECK_FALSE(cd.converged);
  CHECK(cd.sweeps == 2);
}

TEST_CASE("lasso cv recovers a strong-signal support exactly") {
  Rng rng(91);
  const Eigen::MatrixXd x = sample_design(Eigen::MatrixXd::Identity(10, 10), 200, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(10);
  beta(2) = 5.0;
  beta(7) = -4.0;
  const Eigen::VectorXd signal = x * beta;
  const double sigma = calibrate_noise(signal, 20.0);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y(i) = signal(i) + sigma * rng.normal();

  CvPlan plan;
  plan.fold_seed = 17;
  const FitResult fit = fit_lasso_cv(x, y, plan);
  const SelectionMetrics sel = selection_metrics(fit.beta_hat, {2, 7});
  CHECK(sel.f1 == doctest::Approx(1.0));
  REQUIRE(fit.chosen_penalty.has_value());
  CHECK(fit.chosen_penalty->alpha == 1.0);

  const FitResult again = fit_lasso_cv(x, y, plan);
  CHECK(fit.beta_hat == again.beta_hat);
  CHECK(fit.chosen_penalty->lambda == again.chosen_penalty->lambda);
}

TEST_CASE("elastic net with alpha grid {1} reduces to the lasso") {
  Rng rng(101);
  const Eigen::MatrixXd x = sample_design(build_covariance({Design::Toeplitz, 8, 0.3}), 60, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(8);
  beta(0) = 2;
  beta(5) = -3;
  const Eigen::VectorXd y = x * beta + random_vector(60, rng);

  CvPlan plan;
  plan.fold_seed = 5;
  plan.alpha_grid = {1.0};
  const FitResult en = fit_elastic_net_cv(x, y, plan);
  const FitResult lasso = fit_lasso_cv(x, y, plan);
  CHECK(en.beta_hat == lasso.beta_hat);
  CHECK(en.chosen_penalty->lambda == lasso.chosen_penalty->lambda);
}

TEST_CASE("elastic net groups exactly duplicated features") {
  Rng rng(111);
  const int n = 80;
  Eigen::MatrixXd x = random_matrix(n, 6, rng);
  x.col(1) = x.col(0);  // duplicated pair
  Eigen::VectorXd y = 3.0 * x.col(0) + random_vector(n, rng) * 0.5;

  CvPlan plan;
  plan.fold_seed = 2;
  plan.alpha_grid = {0.1};
  const FitResult fit = fit_elastic_net_cv(x, y, plan);
  const double b0 = fit.beta_hat(0), b1 = fit.beta_hat(1);
  REQUIRE(std::abs(b0 + b1) > 0.1);
  CHECK(std::abs(b0 - b1) < 0.05 * std::abs(b0 + b1));
}

TEST_CASE("cv ties break toward larger alpha then larger lambda") {
  Rng rng(121);
  const Eigen::MatrixXd x = random_matrix(40, 5, rng);
  const Eigen::VectorXd y = random_vector(40, rng);
  const double lambda_max = (x.transpose() * y).cwiseAbs().maxCoeff() / 40.0;

  // Both grid values sit far above every per-fold lambda_max, so every
  // (alpha, lambda) cell fits the all-zero model and CV errors tie
  // bit-for-bit.
  CvPlan plan;
  plan.fold_seed = 3;
  plan.lambda_grid = {1e6 * lambda_max, 1e5 * lambda_max};
  plan.alpha_grid = {0.5, 1.0};
  const FitResult fit = fit_elastic_net_cv(x, y, plan);
  CHECK(fit.beta_hat.isZero(0.0));
  REQUIRE(fit.chosen_penalty.has_value());
  CHECK(fit.chosen_penalty->alpha == 1.0);
  CHECK(fit.chosen_penalty->lambda == 1e6 * lambda_max);
}

}  // TEST_SUITE
