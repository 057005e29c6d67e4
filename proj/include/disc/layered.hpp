#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "disc/bf_basic.hpp"
#include "disc/core.hpp"
#include "disc/report.hpp"
#include "disc/rows.hpp"
#include "disc/walk.hpp"

namespace disc {

/// Parameters shared by the level-based algorithms. Each non-tiny row sits
/// at a level l in 0..L and (optionally) a size class q in 1..N; its
/// regularized discrepancy Y = disc - disc_at_segment_entry + beta(l,q) G.
struct LayerScheme {
  int L = 0;
  int N = 1;
  double mu = 1.0;
  double kappa = 1.0 / 6.0;
  double eta = 1.0 / 6.0;
  double delta_cap = 1.0 / 3.0;
  bool reset_on_class_change = false;
  std::vector<double> k;      ///< k_l
  std::vector<double> b;      ///< b_l
  std::vector<double> large;  ///< large iff size > large[l]
  /// beta and eta per (l, q), row-major with N classes per level (q is 1-based).
  std::vector<double> beta;
  std::vector<double> block_eta;
  /// Class of a medium row of the given size at level l.
  std::function<int(double size, int level)> class_of;

  double beta_at(int l, int q) const { return beta[static_cast<std::size_t>(l * N + q - 1)]; }
  double eta_at(int l, int q) const { return block_eta[static_cast<std::size_t>(l * N + q - 1)]; }
};

/// Per-row state of a level-based run (over the row-doubled matrix).
struct LayerTracker {
  std::vector<int> level;  ///< -1: tiny from the start, never leveled
  std::vector<int> cls;
  std::vector<RowStatus> status;
  std::vector<double> snapshot;  ///< disc at the current segment's start
  std::vector<char> blocked;     ///< dangerous at level L
  /// Discrepancy at each segment boundary, starting with 0 at time 0.
  std::vector<std::vector<double>> boundaries;
};

class LayeredPolicy : public WalkPolicy {
 public:
  LayeredPolicy(const InstanceMatrix& doubled, LayerScheme scheme);

  void init(const WalkState& st) override;
  void resync(const WalkState& st) override { rows_.resync(st); }
  void constraints(const WalkState& st, WalkConstraints& out) override;
  void after_step(const WalkState& st, const StepInfo& info, std::vector<BlockedVector>& newly_blocked,
                  TraceRecord* trace) override;
  double fail_ratio() const override { return scheme_.delta_cap; }
  double max_energy_increase() const override { return max_dY_; }

  double Y(int i) const;
  const LayerTracker& tracker() const { return tr_; }
  const LayerScheme& scheme() const { return scheme_; }
  /// Rows (of the doubled matrix) that ever reached each level.
  const std::vector<std::vector<int>>& arrivals() const { return arrivals_; }
  /// Danger events per (l, q), row-major.
  const std::vector<double>& danger_counts() const { return danger_; }
  double max_entry_excess() const { return max_entry_excess_; }
  /// Largest Y - 2 b_l seen on a non-blocked medium row (overshoot past the trigger).
  double max_overshoot() const { return max_overshoot_; }

  /// Moves row i to level l+1 (l < L) starting a new segment.
  void upgrade_level(int i, const WalkState& st);

 private:
  RowStatus classify(int i, int level) const;
  void enter_segment(int i);
  void refresh(int i, const WalkState& st, std::vector<BlockedVector>* newly_blocked, TraceRecord* trace);

  const InstanceMatrix& a_;
  LayerScheme scheme_;
  RowState rows_;
  LayerTracker tr_;
  std::vector<std::vector<int>> arrivals_;
  std::vector<double> danger_;
  double max_dY_ = 0.0;
  double max_entry_excess_ = -1e300;
  double max_overshoot_ = -1e300;
};

/// Runs a level-based scheme over A (a {0,+-1} matrix with sparsity <= k)
/// and fills the shared extras: level arrival maxima per column, danger
/// counts, telescoping error and the tiny-tail size.
RunReport run_layered(const InstanceMatrix& a, const LayerScheme& scheme, std::uint64_t seed, const WalkOptions& opt,
                      const TraceSink* trace);

}  // namespace disc
