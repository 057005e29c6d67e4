#include "disc/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disc/error.hpp"

namespace disc {

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::SignMatrix:
      return "signs";
    case InstanceKind::UnitColumns:
      return "unit";
    case InstanceKind::General:
      return "general";
  }
  return "general";
}

InstanceMatrix::InstanceMatrix(int m, int n, std::vector<Entry> entries, InstanceKind kind)
    : m_(m), n_(n), kind_(kind) {
  if (m < 0 || n < 0) throw InputError("negative matrix dimension");
  std::erase_if(entries, [](const Entry& e) { return e.value == 0.0; });
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n) {
      std::ostringstream os;
      os << "entry (" << e.row << "," << e.col << ") outside " << m << "x" << n;
      throw InputError(os.str());
    }
    if (!std::isfinite(e.value)) throw InputError("non-finite matrix entry");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col) {
      std::ostringstream os;
      os << "duplicate entry (" << entries[k].row << "," << entries[k].col << ")";
      throw InputError(os.str());
    }
  }
  entries_ = std::move(entries);

  row_ptr_.assign(static_cast<std::size_t>(m_) + 1, 0);
  std::vector<std::size_t> col_count(static_cast<std::size_t>(n_) + 1, 0);
  for (const auto& e : entries_) {
    ++row_ptr_[e.row + 1];
    ++col_count[e.col + 1];
  }
  for (int i = 0; i < m_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (int j = 0; j < n_; ++j) col_count[j + 1] += col_count[j];
  col_ptr_ = col_count;
  col_entries_.resize(entries_.size());
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (const auto& e : entries_) col_entries_[fill[e.col]++] = {e.row, e.value};

  if (kind_ == InstanceKind::SignMatrix) {
    for (const auto& e : entries_) {
      if (e.value != 1.0 && e.value != -1.0) throw InputError("sign matrix entry not in {-1,+1}");
    }
  } else if (kind_ == InstanceKind::UnitColumns) {
    for (int j = 0; j < n_; ++j) {
      if (squared_column_norm(j) > 1.0 + 1e-9) {
        std::ostringstream os;
        os << "column " << j << " has squared norm " << squared_column_norm(j) << " > 1";
        throw InputError(os.str());
      }
    }
  }
}

std::span<const Entry> InstanceMatrix::row(int i) const {
  return std::span<const Entry>(entries_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

std::span<const ColumnEntry> InstanceMatrix::col(int j) const {
  return std::span<const ColumnEntry>(col_entries_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
}

double InstanceMatrix::squared_column_norm(int j) const {
  double s = 0.0;
  for (const auto& e : col(j)) s += e.value * e.value;
  return s;
}

Eigen::MatrixXd InstanceMatrix::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m_, n_);
  for (const auto& e : entries_) d(e.row, e.col) = e.value;
  return d;
}

bool is_full_coloring(const Coloring& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 1.0 || v == -1.0; });
}

int column_sparsity(const InstanceMatrix& a) {
  int k = 0;
  for (int j = 0; j < a.cols(); ++j) k = std::max(k, static_cast<int>(a.col(j).size()));
  return k;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

DiscrepancyReport disc_eval(const InstanceMatrix& a, const Coloring& x) {
  if (x.size() != a.cols()) {
    std::ostringstream os;
    os << "coloring has length " << x.size() << " but matrix has " << a.cols() << " columns";
    throw InputError(os.str());
  }
  DiscrepancyReport rep;
  rep.per_row = Eigen::VectorXd::Zero(a.rows());
  std::vector<double> terms;
  for (int i = 0; i < a.rows(); ++i) {
    terms.clear();
    for (const auto& e : a.row(i)) terms.push_back(e.value * x(e.col));
    rep.per_row(i) = pairwise_sum(terms);
    const double v = std::abs(rep.per_row(i));
    if (rep.argmax_row < 0 || v > rep.max_abs) {
      rep.max_abs = v;
      rep.argmax_row = i;
    }
  }
  return rep;
}

InstanceMatrix append_negations(const InstanceMatrix& a) {
  std::vector<Entry> out;
  out.reserve(2 * a.nnz());
  for (const auto& e : a.entries()) out.push_back(e);
  for (const auto& e : a.entries()) out.push_back({e.row + a.rows(), e.col, -e.value});
  // Doubling the rows doubles every squared column norm, so unit columns
  // become a general matrix.
  const auto kind = a.kind() == InstanceKind::UnitColumns ? InstanceKind::General : a.kind();
  return InstanceMatrix(2 * a.rows(), a.cols(), std::move(out), kind);
}

}  // namespace disc
