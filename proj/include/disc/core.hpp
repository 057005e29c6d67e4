#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace disc {

enum class InstanceKind { SignMatrix, UnitColumns, General };

std::string to_string(InstanceKind kind);

struct Entry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// A (row, value) pair as seen from a column.
struct ColumnEntry {
  int row = 0;
  double value = 0.0;
};

/// Sparse m x n input matrix. Entries are kept sorted by (row, col) so each
/// row is a contiguous slice; a column-major index is built alongside.
/// Immutable after construction, so instances can be shared across runs.
class InstanceMatrix {
 public:
  InstanceMatrix() = default;

  /// Validates and canonicalizes `entries`. Explicit zeros are dropped.
  /// Throws InputError on out-of-range indices, duplicate (i,j) pairs or a
  /// violated kind invariant.
  InstanceMatrix(int m, int n, std::vector<Entry> entries, InstanceKind kind);

  int rows() const { return m_; }
  int cols() const { return n_; }
  InstanceKind kind() const { return kind_; }
  std::size_t nnz() const { return entries_.size(); }

  std::span<const Entry> entries() const { return entries_; }
  std::span<const Entry> row(int i) const;
  std::span<const ColumnEntry> col(int j) const;

  double squared_column_norm(int j) const;
  Eigen::MatrixXd dense() const;

 private:
  int m_ = 0;
  int n_ = 0;
  InstanceKind kind_ = InstanceKind::General;
  std::vector<Entry> entries_;
  std::vector<std::size_t> row_ptr_;
  std::vector<ColumnEntry> col_entries_;
  std::vector<std::size_t> col_ptr_;
};

/// Fractional coloring in [-1,1]^n. A full coloring has every entry in {-1,1}.
using Coloring = Eigen::VectorXd;

bool is_full_coloring(const Coloring& x);

struct DiscrepancyReport {
  Eigen::VectorXd per_row;
  double max_abs = 0.0;
  int argmax_row = -1;  ///< -1 when there are no rows
};

/// Maximum number of nonzeros in any column (0 for an empty matrix).
int column_sparsity(const InstanceMatrix& a);

/// Row sums <a_i, x>, each accumulated by pairwise summation over the row's
/// entries in column order.
DiscrepancyReport disc_eval(const InstanceMatrix& a, const Coloring& x);

/// Stacks the rows -a_1..-a_m under a_1..a_m, so one-sided bounds on the
/// result are two-sided bounds on the input.
InstanceMatrix append_negations(const InstanceMatrix& a);

/// Pairwise (tree) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace disc
