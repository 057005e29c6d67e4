#include "disc/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "disc/bf_basic.hpp"
#include "disc/error.hpp"
#include "disc/rows.hpp"

namespace disc {

Coloring random_coloring(int n, std::uint64_t seed) {
  if (n < 0) throw InputError("negative length");
  std::mt19937_64 rng(seed);
  Coloring x(n);
  std::uint64_t bits = 0;
  for (int j = 0; j < n; ++j) {
    if (j % 64 == 0) bits = rng();
    x(j) = (bits >> (j % 64)) & 1ULL ? 1.0 : -1.0;
  }
  return x;
}

namespace {

constexpr double kFixTol = 1e-9;

// A unit vector in the kernel of M (r x c, r < c), or empty on failure.
Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& M) {
  Eigen::MatrixXd work = M;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int attempt = 0; attempt < 3; ++attempt) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(work);
    const Eigen::MatrixXd K = lu.kernel();
    if (K.cols() > 0 && K.col(0).norm() > 0.0) {
      Eigen::VectorXd v = K.col(0).normalized();
      if ((M * v).cwiseAbs().maxCoeff() <= 1e-9) return v;
    }
    for (Eigen::Index i = 0; i < work.rows(); ++i) {
      for (Eigen::Index j = 0; j < work.cols(); ++j) work(i, j) = M(i, j) + 1e-12 * u(rng);
    }
  }
  return {};
}

}  // namespace

Coloring iterative_rounding_bf(const InstanceMatrix& a, int k) {
  require_sign_matrix(a, k);
  const int n = a.cols();
  const int m = a.rows();
  Coloring x = Coloring::Zero(n);
  std::vector<char> floating(static_cast<std::size_t>(n), 1);
  std::vector<int> float_count(static_cast<std::size_t>(m), 0);
  for (const auto& e : a.entries()) ++float_count[static_cast<std::size_t>(e.row)];
  int n_float = n;

  auto fix = [&](int j) {
    x(j) = x(j) < 0.0 ? -1.0 : 1.0;
    floating[static_cast<std::size_t>(j)] = 0;
    --n_float;
    for (const auto& ce : a.col(j)) --float_count[static_cast<std::size_t>(ce.row)];
  };

  std::vector<int> active, cols;
  std::vector<int> active_pos(static_cast<std::size_t>(m), -1);
  while (n_float > 0) {
    active.clear();
    for (int i = 0; i < m; ++i) {
      active_pos[static_cast<std::size_t>(i)] = -1;
      if (float_count[static_cast<std::size_t>(i)] > k) {
        active_pos[static_cast<std::size_t>(i)] = static_cast<int>(active.size());
        active.push_back(i);
      }
    }
    if (active.empty()) break;

    // A floating column outside every active row can move alone.
    int lone = -1;
    cols.clear();
    for (int j = 0; j < n && lone < 0; ++j) {
      if (!floating[static_cast<std::size_t>(j)]) continue;
      bool touches = false;
      for (const auto& ce : a.col(j)) touches = touches || active_pos[static_cast<std::size_t>(ce.row)] >= 0;
      if (!touches) {
        lone = j;
      } else if (cols.size() <= active.size()) {
        cols.push_back(j);
      }
    }
    if (lone >= 0) {
      fix(lone);
      continue;
    }
    if (cols.size() <= active.size()) throw SolverError("iterative rounding: too few floating columns");

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(active.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      for (const auto& ce : a.col(cols[c])) {
        const int r = active_pos[static_cast<std::size_t>(ce.row)];
        if (r >= 0) M(r, static_cast<Eigen::Index>(c)) = ce.value;
      }
    }
    const Eigen::VectorXd v = kernel_vector(M);
    if (v.size() == 0) throw SolverError("iterative rounding: no kernel vector found");

    // Largest step keeping the chosen columns inside [-1, 1].
    double s = std::numeric_limits<double>::infinity();
    int hit = -1;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double vc = v(static_cast<Eigen::Index>(c));
      if (std::abs(vc) < 1e-15) continue;
      const double xj = x(cols[c]);
      const double reach = vc > 0.0 ? (1.0 - xj) / vc : (-1.0 - xj) / vc;
      if (reach < s) {
        s = reach;
        hit = static_cast<int>(c);
      }
    }
    if (hit < 0) throw SolverError("iterative rounding: zero kernel vector");
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const int j = cols[c];
      x(j) = std::clamp(x(j) + s * v(static_cast<Eigen::Index>(c)), -1.0, 1.0);
    }
    const int hj = cols[static_cast<std::size_t>(hit)];
    x(hj) = v(hit) > 0.0 ? 1.0 : -1.0;
    fix(hj);
    for (int j : cols) {
      if (floating[static_cast<std::size_t>(j)] && std::abs(x(j)) >= 1.0 - kFixTol) fix(j);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (floating[static_cast<std::size_t>(j)]) fix(j);
  }
  return x;
}

namespace {

class BanaszczykPolicy : public WalkPolicy {
 public:
  explicit BanaszczykPolicy(const InstanceMatrix& a) : a_(a), rows_(a) {}

  void init(const WalkState& st) override {
    rows_.resync(st);
    large_.assign(a_.rows(), 0);
    for (int i = 0; i < a_.rows(); ++i) large_[i] = rows_.mass(i) >= kLarge - kSlack;
    count_ = static_cast<int>(std::count(large_.begin(), large_.end(), 1));
    note(st);
  }
  void resync(const WalkState& st) override { rows_.resync(st); }
  void constraints(const WalkState& st, WalkConstraints& out) override {
    out.kappa = 0.25;
    out.eta = 0.25;
    for (int i = 0; i < a_.rows(); ++i) {
      if (large_[i]) out.blocked.push_back({static_cast<std::uint64_t>(i), rows_.alive_row(i, st), true});
    }
  }
  void after_step(const WalkState& st, const StepInfo& info, std::vector<BlockedVector>& /*newly_blocked*/,
                  TraceRecord* trace) override {
    for (int i : rows_.update(st, info)) {
      if (trace) trace->dz.emplace_back(i, rows_.ddisc(i));
      if (large_[i] && rows_.mass(i) < kLarge - kSlack) {
        large_[i] = 0;
        --count_;
        if (trace) trace->status.emplace_back(i, 0);
      }
    }
    note(st);
  }
  double fail_ratio() const override { return 0.5; }
  double max_large_fraction() const { return max_frac_; }

 private:
  static constexpr double kLarge = 4.0;
  static constexpr double kSlack = 1e-12;  // masses are updated incrementally

  void note(const WalkState& st) {
    if (st.n_alive() > 0) max_frac_ = std::max(max_frac_, static_cast<double>(count_) / st.n_alive());
  }

  const InstanceMatrix& a_;
  RowState rows_;
  std::vector<char> large_;
  int count_ = 0;
  double max_frac_ = 0.0;
};

}  // namespace

RunReport banaszczyk_walk(const InstanceMatrix& a, std::uint64_t seed, const WalkOptions& opt,
                          const TraceSink* trace) {
  // Columns longer than 1 (sign matrices) are scaled down to unit norm; the
  // coloring is then evaluated on the original matrix.
  double max_sq = 0.0;
  for (int j = 0; j < a.cols(); ++j) max_sq = std::max(max_sq, a.squared_column_norm(j));
  const double scale = max_sq > 1.0 + 1e-9 ? 1.0 / std::sqrt(max_sq) : 1.0;
  InstanceMatrix scaled;
  if (scale != 1.0) {
    std::vector<Entry> entries(a.entries().begin(), a.entries().end());
    for (auto& e : entries) e.value *= scale;
    scaled = InstanceMatrix(a.rows(), a.cols(), std::move(entries), InstanceKind::General);
  }
  const InstanceMatrix& walk_a = scale != 1.0 ? scaled : a;

  BanaszczykPolicy policy(walk_a);
  RunReport rep = run_walk(walk_a, policy, seed, opt, trace);
  if (scale != 1.0) {
    const auto d = disc_eval(a, rep.coloring);
    rep.disc_max = d.max_abs;
    rep.disc_per_row = d.per_row;
  }
  rep.algo = "banaszczyk";
  rep.params = {{"kappa", 0.25}, {"eta", 0.25}, {"delta_cap", 0.5}, {"large_mass", 4.0}, {"column_scale", scale}};
  rep.extras["max_large_fraction"] = {policy.max_large_fraction()};
  return rep;
}

RunReport coloring_report(const InstanceMatrix& a, const Coloring& x, const std::string& algo, std::uint64_t seed) {
  RunReport rep;
  rep.algo = algo;
  rep.seed = seed;
  rep.mode = "none";
  rep.coloring = x;
  const auto d = disc_eval(a, x);
  rep.disc_max = d.max_abs;
  rep.disc_per_row = d.per_row;
  rep.final_time = x.squaredNorm();
  rep.freeze_count = x.size();
  return rep;
}

}  // namespace disc
