#pragma once

#include <cstdint>
#include <vector>

#include "disc/core.hpp"
#include "disc/report.hpp"
#include "disc/rows.hpp"
#include "disc/walk.hpp"

namespace disc {

struct BfParams {
  int n = 0;
  int k = 1;
  double C_b = 4.0;
  double b = 1.0;
  double mu = 1.0;    ///< tiny threshold max(b, b^2/ln n)
  double beta = 0.1;  ///< b/(10k)
  double kappa = 1.0 / 6.0;
  double eta = 0.25;
  double eta1 = 0.25;
  double delta_cap = 1.0 / 3.0;
  /// Keep the dangerous flag until the row becomes tiny (otherwise it is
  /// re-evaluated every step).
  bool latch_dangerous = true;
};

/// Smallest b (resolution 1e-3) with b^2 max(1, b/ln n) >= C_b k sqrt(ln n lnln n)
/// and b >= C_b sqrt(k lnln n), capped at k. lnln n is floored at 1.
double target_b(int n, double k, double C_b);

BfParams make_bf_params(int n, int k, double C_b = 4.0);

enum class RowStatus { Large, Medium, Tiny };

/// Large iff size > large_threshold, tiny iff size < mu, medium otherwise.
RowStatus classify_size(double size, double large_threshold, double mu);

/// Y = disc + beta * G.
inline double regularized_disc(double disc, double energy, double beta) { return disc + beta * energy; }

/// |medium_rows| x n_t matrix over the alive columns (in increasing order)
/// with entries a_i(j) - 2 beta a_i(j)^2 x_j.
SparseRows build_Et(const InstanceMatrix& a, const Coloring& x, const std::vector<int>& alive,
                    const std::vector<int>& medium_rows, double beta);

/// Per-row state of the basic algorithm.
struct RowTracker {
  std::vector<RowStatus> status;
  std::vector<char> dangerous;
  std::vector<char> ever_dangerous;
  std::vector<double> disc_at_tiny;
};

/// The basic algorithm as a walk policy over the row-doubled matrix.
class BfBasicPolicy : public WalkPolicy {
 public:
  BfBasicPolicy(const InstanceMatrix& doubled, const BfParams& params);

  void init(const WalkState& st) override;
  void resync(const WalkState& st) override;
  void constraints(const WalkState& st, WalkConstraints& out) override;
  void after_step(const WalkState& st, const StepInfo& info, std::vector<BlockedVector>& newly_blocked,
                  TraceRecord* trace) override;
  double fail_ratio() const override { return params_.delta_cap; }
  double max_energy_increase() const override { return max_dY_; }

  const RowTracker& tracker() const { return tr_; }
  const RowState& rows() const { return rows_; }
  double max_Y() const { return max_Y_; }
  double max_entry_excess() const { return max_entry_excess_; }

 private:
  void classify(int i, const WalkState& st, std::vector<BlockedVector>* newly_blocked, TraceRecord* trace);

  const InstanceMatrix& a_;
  BfParams params_;
  RowState rows_;
  RowTracker tr_;
  double max_dY_ = 0.0;
  double max_Y_ = -1e300;
  double max_entry_excess_ = -1e300;
};

/// Runs the basic algorithm on A (entries in {0,+-1}, column sparsity <= k).
/// Both a_i and -a_i are tracked. FAIL is recorded, not thrown.
RunReport run_bf_basic(const InstanceMatrix& a, const BfParams& params, std::uint64_t seed, const WalkOptions& opt,
                       const TraceSink* trace = nullptr);

/// Checks a {0,+-1} matrix with column sparsity <= k; throws InputError.
void require_sign_matrix(const InstanceMatrix& a, int k);

}  // namespace disc
