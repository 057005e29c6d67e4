#include "disc/rows.hpp"

#include <algorithm>
#include <cmath>

namespace disc {

RowState::RowState(const InstanceMatrix& a)
    : a_(&a),
      disc_(a.rows(), 0.0),
      energy_(a.rows(), 0.0),
      ddisc_(a.rows(), 0.0),
      denergy_(a.rows(), 0.0),
      mass_(a.rows(), 0.0),
      size_(a.rows(), 0),
      mark_(a.rows(), 0),
      size_changed_(a.rows(), 0) {}

void RowState::resync(const WalkState& st) {
  const double thr = st.threshold;
  std::vector<double> terms;
  for (int i = 0; i < a_->rows(); ++i) {
    terms.clear();
    double g = 0.0;
    int sz = 0;
    double ms = 0.0;
    for (const auto& e : a_->row(i)) {
      const double xj = st.x(e.col);
      terms.push_back(e.value * xj);
      g += e.value * e.value * (1.0 - xj * xj);
      if (std::abs(xj) <= thr) {
        ++sz;
        ms += e.value * e.value;
      }
    }
    disc_[i] = pairwise_sum(terms);
    energy_[i] = g;
    size_[i] = sz;
    mass_[i] = ms;
  }
}

const std::vector<int>& RowState::update(const WalkState& st, const StepInfo& info) {
  for (int i : changed_) {
    mark_[i] = 0;
    size_changed_[i] = 0;
    ddisc_[i] = 0.0;
    denergy_[i] = 0.0;
  }
  changed_.clear();
  const Eigen::VectorXd& dx = *info.dx;
  for (int j : *info.touched) {
    const double xn = st.x(j);
    const double xo = xn - dx(j);
    const double dsq = xn * xn - xo * xo;
    for (const auto& ce : a_->col(j)) {
      const int i = ce.row;
      if (!mark_[i]) {
        mark_[i] = 1;
        changed_.push_back(i);
      }
      ddisc_[i] += ce.value * dx(j);
      denergy_[i] -= ce.value * ce.value * dsq;
    }
  }
  for (int j : *info.newly_frozen) {
    for (const auto& ce : a_->col(j)) {
      const int i = ce.row;
      if (!mark_[i]) {
        mark_[i] = 1;
        changed_.push_back(i);
      }
      --size_[i];
      mass_[i] -= ce.value * ce.value;
      size_changed_[i] = 1;
    }
  }
  for (int i : changed_) {
    disc_[i] += ddisc_[i];
    energy_[i] += denergy_[i];
  }
  std::sort(changed_.begin(), changed_.end());
  return changed_;
}

SparseVec RowState::alive_row(int i, const WalkState& st) const {
  SparseVec v;
  for (const auto& e : a_->row(i)) {
    if (std::abs(st.x(e.col)) <= st.threshold) v.entries.emplace_back(e.col, e.value);
  }
  return v;
}

SparseVec RowState::energy_row(int i, const WalkState& st, double beta) const {
  SparseVec v;
  for (const auto& e : a_->row(i)) {
    const double xj = st.x(e.col);
    if (std::abs(xj) <= st.threshold) v.entries.emplace_back(e.col, e.value - 2.0 * beta * e.value * e.value * xj);
  }
  return v;
}

}  // namespace disc
