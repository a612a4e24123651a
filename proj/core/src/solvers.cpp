#include "sparsebench/solvers.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "sparsebench/rng.hpp"

namespace sparsebench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void check_descending(const std::vector<double>& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] < grid[i - 1]))
      throw std::invalid_argument("lambda_grid must be strictly descending");
}

}  // namespace

std::vector<double> log_space(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("log_space: n must be >= 1");
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::invalid_argument("log_space: endpoints must be positive");
  std::vector<double> values(n);
  if (n == 1) {
    values[0] = lo;
    return values;
  }
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int i = 0; i < n; ++i)
    values[i] = std::exp(log_lo + (log_hi - log_lo) * i / (n - 1));
  return values;
}

std::vector<double> ridge_default_grid() { return log_space(1e-4, 1e4, 50); }

std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t fold_seed) {
  if (k < 1 || k > n) throw std::invalid_argument("kfold_split: need 1 <= k <= n");
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(fold_seed);
  rng.shuffle(indices);

  std::vector<std::vector<int>> folds(k);
  const int base = n / k;
  const int extra = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    folds[f].assign(indices.begin() + pos, indices.begin() + pos + size);
    pos += size;
  }
  return folds;
}

FitResult fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto start = Clock::now();
  if (x.rows() < x.cols()) throw std::invalid_argument("fit_ols: requires n >= p");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0))
    throw std::invalid_argument("fit_ols: design is rank deficient");

  FitResult result;
  result.beta_hat = svd.solve(y);
  result.fit_time = seconds_since(start);
  return result;
}

std::vector<double> ridge_loocv_errors(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       const std::vector<double>& lambda_grid) {
  const auto n = x.rows();
  if (n < 2) throw std::invalid_argument("ridge_loocv_errors: requires n >= 2");
  if (lambda_grid.empty()) throw std::invalid_argument("ridge_loocv_errors: empty grid");

  // One SVD serves the whole grid: with x = U S V', the hat matrix is
  // U diag(s^2 / (s^2 + 2 n lambda)) U' and the LOO residual is e_i / (1 - h_ii).
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
  const Eigen::VectorXd sv = svd.singularValues();
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::VectorXd uty = u.transpose() * y;
  const Eigen::MatrixXd u_sq = u.array().square();

  std::vector<double> errors;
  errors.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const Eigen::ArrayXd shrink = sv.array().square() / (sv.array().square() + 2.0 * n * lambda);
    const Eigen::VectorXd y_hat = u * (shrink * uty.array()).matrix();
    const Eigen::VectorXd leverage = u_sq * shrink.matrix();
    const Eigen::ArrayXd loo = (y - y_hat).array() / (1.0 - leverage.array());
    errors.push_back(loo.square().mean());
  }
  return errors;
}

FitResult fit_ridge_loocv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const std::vector<double>& lambda_grid) {
  const auto start = Clock::now();
  const auto n = x.rows();
  const std::vector<double> errors = ridge_loocv_errors(x, y, lambda_grid);
  const auto best =
      static_cast<std::size_t>(std::min_element(errors.begin(), errors.end()) - errors.begin());
  const double best_lambda = lambda_grid[best];

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const Eigen::VectorXd uty = svd.matrixU().transpose() * y;
  const Eigen::ArrayXd gain = sv.array() / (sv.array().square() + 2.0 * n * best_lambda);
  FitResult result;
  result.beta_hat = svd.matrixV() * (gain * uty.array()).matrix();
  result.chosen_penalty = PenaltyConfig{best_lambda, 0.0};
  result.fit_time = seconds_since(start);
  return result;
}

double kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& beta, const PenaltyConfig& penalty) {
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd corr = x.transpose() * (y - x * beta) / n;
  const double l1 = penalty.lambda * penalty.alpha;
  const double l2 = 2.0 * penalty.lambda * (1.0 - penalty.alpha);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double violation;
    if (beta(j) != 0.0) {
      const double sign = beta(j) > 0.0 ? 1.0 : -1.0;
      violation = std::abs(corr(j) - l2 * beta(j) - l1 * sign);
    } else {
      violation = std::max(0.0, std::abs(corr(j)) - l1);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

namespace {

// Sufficient statistics for the descent updates: one gram product per
// design serves every (alpha, lambda) cell of a CV grid.
struct CdWorkspace {
  Eigen::MatrixXd gram;      // x'x / n
  Eigen::VectorXd corr_y;    // x'y / n, per-column dots
  double kkt_scale = 1.0;
};

CdWorkspace make_workspace(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  CdWorkspace w;
  const auto p = x.cols();
  w.gram = Eigen::MatrixXd::Zero(p, p);
  w.gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), inv_n);
  w.gram.triangularView<Eigen::StrictlyUpper>() = w.gram.transpose();
  w.corr_y.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    w.corr_y(j) = x.col(j).dot(y) * inv_n;
    const double diag = x.col(j).squaredNorm() * inv_n;
    w.gram(j, j) = diag;
  }
  w.kkt_scale = std::max(1.0, w.corr_y.cwiseAbs().maxCoeff());
  return w;
}

double kkt_residual_gram(const CdWorkspace& w, const Eigen::VectorXd& beta,
                         const PenaltyConfig& penalty) {
  const Eigen::VectorXd corr = w.corr_y - w.gram.selfadjointView<Eigen::Lower>() * beta;
  const double l1 = penalty.lambda * penalty.alpha;
  const double l2 = 2.0 * penalty.lambda * (1.0 - penalty.alpha);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double violation;
    if (beta(j) != 0.0) {
      const double sign = beta(j) > 0.0 ? 1.0 : -1.0;
      violation = std::abs(corr(j) - l2 * beta(j) - l1 * sign);
    } else {
      violation = std::max(0.0, std::abs(corr(j)) - l1);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

CdResult coordinate_descent_gram(const CdWorkspace& w, const PenaltyConfig& penalty, double tol,
                                 int max_sweeps, const Eigen::VectorXd* warm_start) {
  if (!(tol > 0.0)) throw std::invalid_argument("coordinate_descent: tol must be positive");
  if (penalty.lambda < 0.0 || penalty.alpha < 0.0 || penalty.alpha > 1.0)
    throw std::invalid_argument("coordinate_descent: invalid penalty");

  const auto p = w.gram.rows();
  const double l1 = penalty.lambda * penalty.alpha;
  const double l2 = 2.0 * penalty.lambda * (1.0 - penalty.alpha);
  const double kkt_tol = tol * w.kkt_scale;

  Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
  // smoothed = (gram beta)_j, maintained incrementally across updates
  Eigen::VectorXd smoothed = w.gram.selfadjointView<Eigen::Lower>() * beta;
  if (warm_start == nullptr || warm_start->isZero(0.0)) smoothed.setZero();

  // Tracks the optimality violation of each coordinate just before its
  // update, from the running gram product. Near-free, and it gates the
  // O(p^2) certification below so degenerate directions cannot thrash
  // the refresh-and-check cycle.
  double sweep_violation = 0.0;
  const auto update_coord = [&](Eigen::Index j) -> double {
    const double denom = w.gram(j, j) + l2;
    const double old = beta(j);
    const double corr = w.corr_y(j) - smoothed(j);
    sweep_violation = std::max(
        sweep_violation, old != 0.0 ? std::abs(corr - l2 * old - l1 * (old > 0.0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(corr) - l1));
    double updated = 0.0;
    if (denom > 0.0) updated = soft_threshold(corr + w.gram(j, j) * old, l1) / denom;
    if (updated == old) return 0.0;
    smoothed += w.gram.col(j) * (updated - old);
    beta(j) = updated;
    return std::abs(updated - old);
  };

  CdResult result;
  std::vector<Eigen::Index> active;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_delta = 0.0;
    sweep_violation = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) max_delta = std::max(max_delta, update_coord(j));
    result.sweeps = sweep;
    if (max_delta < tol * std::max(1.0, beta.cwiseAbs().maxCoeff()) && sweep_violation <= kkt_tol) {
      smoothed = w.gram.selfadjointView<Eigen::Lower>() * beta;  // drop incremental rounding
      if (kkt_residual_gram(w, beta, penalty) <= kkt_tol) {
        result.converged = true;
        break;
      }
      continue;
    }
    // Iterate the current active set until it settles; the next full
    // sweep revisits every coordinate and certifies convergence.
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j)
      if (beta(j) != 0.0) active.push_back(j);
    for (int inner = 0; inner < 1000; ++inner) {
      double inner_delta = 0.0;
      for (Eigen::Index j : active) inner_delta = std::max(inner_delta, update_coord(j));
      if (inner_delta < tol * std::max(1.0, beta.cwiseAbs().maxCoeff())) break;
    }
  }
  result.beta = std::move(beta);
  return result;
}

}  // namespace

CdResult coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const PenaltyConfig& penalty, double tol, int max_sweeps,
                            const Eigen::VectorXd* warm_start) {
  return coordinate_descent_gram(make_workspace(x, y), penalty, tol, max_sweeps, warm_start);
}

namespace {

struct CvChoice {
  double mse = std::numeric_limits<double>::infinity();
  double alpha = 1.0;
  double lambda = 0.0;
  bool set = false;
};

// Ties on CV error break toward larger alpha, then larger lambda.
void consider(CvChoice& best, double mse, double alpha, double lambda) {
  if (!best.set || mse < best.mse ||
      (mse == best.mse && (alpha > best.alpha || (alpha == best.alpha && lambda > best.lambda)))) {
    best = CvChoice{mse, alpha, lambda, true};
  }
}

std::vector<double> path_grid(const CvPlan& plan, double lambda_max_base, double alpha) {
  if (!plan.lambda_grid.empty()) {
    check_descending(plan.lambda_grid);
    return plan.lambda_grid;
  }
  const double top = lambda_max_base / alpha;
  return log_space(top, top * plan.lambda_min_ratio, plan.n_lambda);
}

FitResult cv_penalized(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvPlan& plan,
                       const std::vector<double>& alpha_grid) {
  const auto start = Clock::now();
  const auto n = x.rows();
  if (n < plan.n_folds) throw std::invalid_argument("cv_penalized: n < n_folds");
  if (alpha_grid.empty()) throw std::invalid_argument("cv_penalized: empty alpha grid");
  for (double a : alpha_grid)
    if (!(a > 0.0) || a > 1.0) throw std::invalid_argument("cv_penalized: alpha must lie in (0, 1]");

  const auto folds = kfold_split(static_cast<int>(n), plan.n_folds, plan.fold_seed);

  // Materialize fold statistics once; they serve the whole (alpha,
  // lambda) grid.
  struct Fold {
    CdWorkspace fit_stats;
    Eigen::MatrixXd x_val;
    Eigen::VectorXd y_val;
  };
  std::vector<Fold> fold_data(folds.size());
  {
    std::vector<char> in_val(n, 0);
    Eigen::MatrixXd x_fit(n, x.cols());
    Eigen::VectorXd y_fit(n);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::fill(in_val.begin(), in_val.end(), 0);
      for (int i : folds[f]) in_val[i] = 1;
      const auto n_val = static_cast<Eigen::Index>(folds[f].size());
      Fold& fd = fold_data[f];
      fd.x_val.resize(n_val, x.cols());
      fd.y_val.resize(n_val);
      Eigen::Index fit_row = 0, val_row = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (in_val[i]) {
          fd.x_val.row(val_row) = x.row(i);
          fd.y_val(val_row++) = y(i);
        } else {
          x_fit.row(fit_row) = x.row(i);
          y_fit(fit_row++) = y(i);
        }
      }
      fd.fit_stats = make_workspace(x_fit.topRows(fit_row), y_fit.head(fit_row));
    }
  }

  const CdWorkspace full_stats = make_workspace(x, y);
  const double lambda_max_base = full_stats.corr_y.cwiseAbs().maxCoeff();
  if (!(lambda_max_base > 0.0)) {
    // Response is orthogonal to every column; the zero fit is optimal at
    // any penalty.
    FitResult result;
    result.beta_hat = Eigen::VectorXd::Zero(x.cols());
    result.chosen_penalty = PenaltyConfig{0.0, alpha_grid.back()};
    result.fit_time = seconds_since(start);
    return result;
  }

  // Validation errors, indexed [alpha][lambda][fold]; fold path fits run
  // in parallel and the reduction below is in fixed order, so results do
  // not depend on thread scheduling.
  std::vector<std::vector<std::vector<double>>> fold_mse(alpha_grid.size());
  std::vector<std::vector<double>> grids(alpha_grid.size());
  for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
    grids[a] = path_grid(plan, lambda_max_base, alpha_grid[a]);
    fold_mse[a].assign(grids[a].size(), std::vector<double>(folds.size(), 0.0));
  }

  // Scoring fits drive lambda selection only, so they may run at a
  // looser tolerance than the contract-bearing final refit.
  constexpr double kScoringTol = 1e-3;
  const auto run_fold = [&](std::size_t f) {
    const Fold& fd = fold_data[f];
    for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(x.cols());
      for (std::size_t i = 0; i < grids[a].size(); ++i) {
        const CdResult cd = coordinate_descent_gram(
            fd.fit_stats, PenaltyConfig{grids[a][i], alpha_grid[a]}, kScoringTol, 10000, &warm);
        warm = cd.beta;
        fold_mse[a][i][f] = (fd.y_val - fd.x_val * warm).squaredNorm() / fd.y_val.size();
      }
    }
  };
  if (std::thread::hardware_concurrency() > 1) {
    std::vector<std::thread> workers;
    workers.reserve(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) workers.emplace_back(run_fold, f);
    for (auto& w : workers) w.join();
  } else {
    for (std::size_t f = 0; f < folds.size(); ++f) run_fold(f);
  }

  CvChoice best;
  for (std::size_t a = 0; a < alpha_grid.size(); ++a)
    for (std::size_t i = 0; i < grids[a].size(); ++i) {
      double sum = 0.0;
      for (double v : fold_mse[a][i]) sum += v;
      consider(best, sum / static_cast<double>(folds.size()), alpha_grid[a], grids[a][i]);
    }

  // Refit on the full data, warm-starting down the winning path. Points
  // above the chosen lambda are stepping stones and run at the scoring
  // tolerance; the returned solution itself converges at the default.
  const auto refit_grid = path_grid(plan, lambda_max_base, best.alpha);
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(x.cols());
  CdResult final_fit;
  for (double lambda : refit_grid) {
    const bool chosen = lambda == best.lambda;
    final_fit = coordinate_descent_gram(full_stats, PenaltyConfig{lambda, best.alpha},
                                        chosen ? 1e-7 : kScoringTol, 10000, &warm);
    warm = final_fit.beta;
    if (chosen) break;
  }

  FitResult result;
  result.beta_hat = std::move(final_fit.beta);
  result.chosen_penalty = PenaltyConfig{best.lambda, best.alpha};
  result.converged = final_fit.converged;
  result.fit_time = seconds_since(start);
  return result;
}

}  // namespace

FitResult fit_lasso_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const CvPlan& plan) {
  return cv_penalized(x, y, plan, {1.0});
}

FitResult fit_elastic_net_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const CvPlan& plan) {
  return cv_penalized(x, y, plan, plan.alpha_grid);
}

}  // namespace sparsebench
