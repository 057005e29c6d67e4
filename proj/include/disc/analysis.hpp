#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "disc/sdp.hpp"
#include "disc/walk.hpp"

namespace disc {

struct SiCheck {
  double max_ratio = 0.0;
  double bound = 0.0;  ///< r / eta_s
  bool pass = false;
};

/// lambda_max(D^-1/2 E U E^T D^-1/2) against r / eta_s + tol.
SiCheck check_affine_si(const SparseRows& E, const Eigen::MatrixXd& U, double r, double eta_s, double tol = 1e-6);
SiCheck check_affine_si(const Eigen::MatrixXd& E, const Eigen::MatrixXd& U, double r, double eta_s, double tol = 1e-6);

/// Increments of an m-dimensional process; coordinates missing from a step
/// did not move.
struct ProcessTrace {
  int m = 0;
  std::vector<double> dt;
  std::vector<std::vector<std::pair<int, double>>> dz;

  std::size_t steps() const { return dz.size(); }
  void push(double step_dt, std::vector<std::pair<int, double>> inc);
};

/// Collects walk trace records (their dz part) into a ProcessTrace.
class TraceCollector {
 public:
  TraceSink sink();
  const ProcessTrace& trace() const { return trace_; }
  ProcessTrace take() { return std::move(trace_); }

 private:
  ProcessTrace trace_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DriftEstimate {
  double alpha_hat = 0.0;
  Interval alpha_ci;
  double theta_hat = 0.0;
  Interval theta_ci;
  std::vector<int> excluded;  ///< coordinates with too few or degenerate observations
  int coordinates_used = 0;
  std::size_t steps = 0;
};

struct DriftOptions {
  int bootstrap = 200;
  int random_vectors = 64;
  int min_observations = 20;
  int max_pair_dim = 1024;  ///< pairs are skipped above this many coordinates
  double confidence = 0.95;
  std::uint64_t seed = 1;
};

/// theta_hat = min_i (-sum dZ_i) / (sum dZ_i^2); alpha_hat = max over a test
/// battery (coordinate pairs with both signs, all-ones, random signs) of
/// sum <g, dZ>^2 / sum <g^2, dZ^2>. Percentile bootstrap over steps.
/// Throws InputError below 1000 steps.
DriftEstimate estimate_drift(const ProcessTrace& trace, const DriftOptions& opt = {});

/// Synthetic processes with known (alpha, theta): each step every block of
/// `blocksize` coordinates takes the same increment s sqrt(dt) - c with s a
/// fair sign and c chosen so that E[dZ] = -theta E[dZ^2] exactly.
struct SyntheticSpec {
  int m = 64;
  int blocksize = 1;
  double theta = 0.5;
  double dt = 0.05;
  double horizon = 256.0;
};

double synthetic_drift(double theta, double dt);
ProcessTrace simulate_process(const SyntheticSpec& spec, std::uint64_t seed);

/// Coordinates whose running sum (from 0) ever reaches B.
int ever_bad(const ProcessTrace& trace, double B);

struct DecouplingParams {
  double alpha = 1.0;
  double theta = 0.5;
  double B = 3.0;
  double lambda = 0.25;
  int m = 64;
  int n = 256;
  double c_dec = 0.0;

  /// Throws InputError unless lambda <= theta/2, lambda B <= ln n, alpha >= 1, B >= 1.
  void validate() const;
  /// m e^(-lambda B) + c_dec lambda alpha ln(n) / theta.
  double bound() const;
};

/// Smallest c_dec >= 0 for which `quantile` of the trials meet the bound.
double calibrate_c_dec(const SyntheticSpec& spec, DecouplingParams params, int trials, std::uint64_t seed,
                       double quantile = 0.95);

struct DecouplingResult {
  double pass_rate = 0.0;
  double mean_bad = 0.0;
  double bound = 0.0;
  std::vector<int> bad_counts;
};

/// Trials run sequentially with seeds seed + trial; order-independent summary.
DecouplingResult decoupling_experiment(const SyntheticSpec& spec, const DecouplingParams& params, int trials,
                                       std::uint64_t seed);

struct PotentialReport {
  std::vector<double> W;  ///< W_0 .. W_T
  double mean_dW = 0.0;
  Interval mean_dW_ci;
  /// Mean per step of -(theta/2) sum_good lambda e^(lambda Z) dZ^2.
  double mean_drift_bound = 0.0;
};

/// W_t = sum_i min(e^(lambda Z_t(i)), e^(lambda B)). Throws InputError when
/// lambda B > ln n (n > 1 given).
PotentialReport potential_monitor(const ProcessTrace& trace, double lambda, double B, double theta, int n = 0,
                                  int bootstrap = 200, std::uint64_t seed = 1);

}  // namespace disc
