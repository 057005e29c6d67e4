#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "disc/core.hpp"
#include "disc/report.hpp"
#include "disc/sdp.hpp"

namespace disc {

enum class WalkMode { Fidelity, Fast };

std::string to_string(WalkMode m);
WalkMode parse_walk_mode(const std::string& s);

struct WalkOptions {
  double dt = 0.0;  ///< 0 means 1/(8n)
  WalkMode mode = WalkMode::Fast;
  int resolve_every = 64;  ///< fast mode only
  int stop_alive = 10;
  SdpOptions sdp;
  /// Recompute lambda_max of every normalized E-block at each re-solve.
  bool check_spectral_independence = false;
};

struct FreezeEvent {
  int j = 0;
  long step = 0;
  double value = 0.0;
};

struct WalkState {
  Coloring x;
  std::vector<int> alive;  ///< ascending
  double t = 0.0;          ///< sum of squared step lengths, so |x|^2 = t
  double dt = 0.0;
  std::mt19937_64 rng;
  long steps_taken = 0;
  std::vector<FreezeEvent> freeze_log;
  double threshold = 1.0;  ///< alive iff |x_j| <= threshold = 1 - 1/(2n)

  WalkState(int n, double dt, std::uint64_t seed);
  int n() const { return static_cast<int>(x.size()); }
  int n_alive() const { return static_cast<int>(alive.size()); }
};

/// v = Tr(U)^-1/2 V Lambda^1/2 r over the solution's h coordinates, r
/// Rademacher. Throws SolverError when Tr(U) <= 1e-12.
Eigen::VectorXd sample_direction(const SdpSolution& sol, std::mt19937_64& rng);

struct StepResult {
  double length = 0.0;  ///< actual step length (sqrt(dt) unless truncated)
  bool truncated = false;
  std::vector<int> newly_frozen;
};

/// Moves x along the unit vector v by sqrt(dt), stopping early at the first
/// coordinate that reaches +-1 (that coordinate is set exactly to +-1).
/// Recomputes the alive set and logs newly frozen coordinates.
StepResult step(WalkState& state, const Eigen::VectorXd& v);

/// Removes from v its components along span(span_vectors) and normalizes.
/// Returns false (v left unnormalized) when the residual norm is below 1e-8.
bool project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& span_vectors);

/// Signs of x (0 -> +1). When at most `exhaustive_max` coordinates are still
/// alive they are chosen by exhaustive search minimizing max |<a_i, x>|; ties
/// go to the lexicographically smallest completion with +1 ordered before -1.
Coloring round_final(const InstanceMatrix& a, const Coloring& x, int exhaustive_max = 10);

/// Sparse vector over all n coordinates.
struct SparseVec {
  std::vector<std::pair<int, double>> entries;
  double dot(const Eigen::VectorXd& x) const;
};

/// A vector the walk must stay orthogonal to. `flat` vectors are rows whose
/// discrepancy is expected to stay constant (checked by the engine).
struct BlockedVector {
  std::uint64_t key = 0;
  SparseVec vec;
  bool flat = true;
};

struct BlockRows {
  std::vector<SparseVec> rows;
  double eta = 0.25;
};

struct WalkConstraints {
  std::vector<BlockedVector> blocked;
  std::vector<BlockRows> blocks;
  double kappa = 1.0 / 6.0;
  double eta = 0.25;
  bool block_x = true;
};

struct StepInfo {
  const Eigen::VectorXd* dx = nullptr;      ///< full-length change of x
  const std::vector<int>* touched = nullptr;  ///< coordinates with dx != 0
  const std::vector<int>* newly_frozen = nullptr;
};

/// Per-step increments of a tracked process (for drift analysis) and status
/// changes, in a form the trace writer can serialize.
struct TraceRecord {
  long step = 0;
  double dt = 0.0;
  std::vector<std::pair<int, double>> dz;
  std::vector<std::pair<int, int>> status;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// What each algorithm plugs into the shared walk loop.
class WalkPolicy {
 public:
  virtual ~WalkPolicy() = default;
  virtual void init(const WalkState& state) = 0;
  /// Called before every SDP solve, after `resync`.
  virtual void constraints(const WalkState& state, WalkConstraints& out) = 0;
  /// Exact recomputation of tracked quantities (at every re-solve).
  virtual void resync(const WalkState& /*state*/) {}
  /// Incremental update after a step. Vectors that become blocked must be
  /// appended to `newly_blocked`; `trace` is non-null when tracing.
  virtual void after_step(const WalkState& state, const StepInfo& info, std::vector<BlockedVector>& newly_blocked,
                          TraceRecord* trace) = 0;
  /// dim(W) above fail_ratio * n_t is a FAIL event.
  virtual double fail_ratio() const { return 1.0 / 3.0; }
  /// Largest per-step increase of Y on E-blocked rows seen so far.
  virtual double max_energy_increase() const { return 0.0; }
  /// Walk stops once n_t <= this.
  virtual int stop_alive(int default_stop) const { return default_stop; }
};

/// Runs the walk on `a` until at most opt.stop_alive coordinates are alive,
/// then rounds. FAIL aborts the walk and rounds the partial coloring.
RunReport run_walk(const InstanceMatrix& a, WalkPolicy& policy, std::uint64_t seed, const WalkOptions& opt,
                   const TraceSink* trace = nullptr);

}  // namespace disc
