#pragma once

#include <vector>

#include "disc/core.hpp"
#include "disc/walk.hpp"

namespace disc {

/// Incrementally maintained per-row quantities of a matrix under a walk:
/// discrepancy <a_i, x>, energy G(i) = sum_j a_i(j)^2 (1 - x_j^2) over all
/// columns, size = number of alive nonzeros and mass = sum of alive a_i(j)^2.
class RowState {
 public:
  explicit RowState(const InstanceMatrix& a);

  /// Exact recomputation from x and the alive set.
  void resync(const WalkState& st);

  /// Applies one step. Returns the rows whose discrepancy, energy or size
  /// changed, in increasing order; `ddisc`/`denergy` hold their per-step
  /// changes until the next call.
  const std::vector<int>& update(const WalkState& st, const StepInfo& info);

  const InstanceMatrix& matrix() const { return *a_; }
  double disc(int i) const { return disc_[i]; }
  double energy(int i) const { return energy_[i]; }
  int size(int i) const { return size_[i]; }
  double mass(int i) const { return mass_[i]; }
  double ddisc(int i) const { return ddisc_[i]; }
  double denergy(int i) const { return denergy_[i]; }
  bool size_changed(int i) const { return size_changed_[i] != 0; }

  /// Row i restricted to alive coordinates.
  SparseVec alive_row(int i, const WalkState& st) const;
  /// a_i(j) - 2 beta a_i(j)^2 x_j over alive coordinates.
  SparseVec energy_row(int i, const WalkState& st, double beta) const;

 private:
  const InstanceMatrix* a_;
  std::vector<double> disc_, energy_, ddisc_, denergy_, mass_;
  std::vector<int> size_;
  std::vector<char> mark_, size_changed_;
  std::vector<int> changed_;
};

}  // namespace disc
