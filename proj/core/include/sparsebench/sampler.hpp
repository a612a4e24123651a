#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "sparsebench/rng.hpp"

namespace sparsebench {

/// An unconstrained target density. logp_grad fills the gradient and
/// returns the log density; it must be a pure function of the point and
/// safe to call concurrently from different chains.
struct TargetDensity {
  int dim = 0;
  std::function<double(const Eigen::VectorXd& point, Eigen::VectorXd& grad)> logp_grad;
};

struct SamplerConfig {
  int chains = 2;
  int warmup = 1000;
  int draws = 2000;           // post-warmup draws per chain
  double target_accept = 0.95;
  int max_tree_depth = 10;
  std::uint64_t seed = 0;
};

struct PosteriorDraws {
  std::vector<Eigen::MatrixXd> samples;   // per chain: draws x dim, unconstrained
  std::vector<int> divergence_count;      // post-warmup, per chain
  std::vector<double> adapted_step_size;  // per chain
  std::vector<double> accept_stat_mean;   // post-warmup, per chain
};

/// A position with its momentum and cached target evaluation.
struct PhasePoint {
  Eigen::VectorXd position;
  Eigen::VectorXd momentum;
  double logp = 0.0;
  Eigen::VectorXd grad;
};

/// Evaluates the target at position, attaching the given momentum.
PhasePoint make_phase_point(const TargetDensity& target, Eigen::VectorXd position,
                            Eigen::VectorXd momentum);

/// One leapfrog step with identity mass matrix (half momentum, full
/// position, half momentum). Non-finite evaluations propagate into the
/// returned point; the tree builder treats them as divergent.
PhasePoint leapfrog(const TargetDensity& target, const PhasePoint& state, double step);

struct TransitionResult {
  Eigen::VectorXd position;
  double logp = 0.0;
  Eigen::VectorXd grad;       // cached evaluation at position
  double accept_stat = 0.0;   // mean Metropolis probability over the trajectory
  bool divergent = false;
  int tree_depth = 0;
  int n_leapfrog = 0;
};

/// One multinomial no-U-turn transition at a fixed step size. Trajectory
/// doubling stops at the U-turn criterion, max_tree_depth, or an energy
/// error above 1000 (recorded as a divergence, never an exception).
TransitionResult nuts_transition(const Eigen::VectorXd& position, double step,
                                 const TargetDensity& target, Rng& rng,
                                 int max_tree_depth = 10);

/// Nesterov dual averaging of log step size toward a target acceptance
/// statistic (gamma = 0.05, t0 = 10, kappa = 0.75). The shrinkage point
/// is the initial step size, so a stream matching the target exactly
/// leaves the step size at its initialization.
class DualAveraging {
 public:
  DualAveraging(double step_init, double target_accept);

  void update(double accept_stat);
  double current() const;  // step size to use for the next transition
  double adapted() const;  // averaged step size, frozen after warmup

 private:
  double mu_;
  double target_;
  double log_step_;
  double log_step_avg_;
  double h_bar_ = 0.0;
  long count_ = 0;
};

/// Folds a recorded acceptance stream through DualAveraging.
double dual_averaging_adapt(const std::vector<double>& accept_stats, double target_accept,
                            double step_init);

/// Doubles/halves the step size from 1 until the one-step Metropolis
/// ratio crosses 1/2 (the usual coarse initialization heuristic).
double find_reasonable_step(const TargetDensity& target, const Eigen::VectorXd& position,
                            Rng& rng);

/// Runs config.chains independent chains (in parallel), each with
/// N(0, 0.1^2) initial jitter, dual-averaging warmup, and a frozen step
/// size for the sampling phase. Deterministic given (target, config).
/// Throws if more than 90% of a chain's warmup transitions diverge.
PosteriorDraws run_chains(const TargetDensity& target, const SamplerConfig& config);

/// Split potential scale reduction per parameter. Chains are split in
/// half (a single chain into quarters) and the usual between/within
/// variance ratio is computed over the resulting segments.
Eigen::VectorXd split_rhat(const std::vector<Eigen::MatrixXd>& chains);

}  // namespace sparsebench
