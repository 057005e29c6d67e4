#include "disc/bf_basic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disc/error.hpp"

namespace disc {

namespace {

constexpr std::uint64_t kEnergyKey = 1ULL << 40;

double lnln(int n) { return std::max(1.0, std::log(std::log(static_cast<double>(n)))); }

}  // namespace

double target_b(int n, double k, double C_b) {
  if (n < 4) throw InputError("target_b needs n >= 4");
  if (!(k >= 1.0)) throw InputError("target_b needs k >= 1");
  const double l1 = std::log(static_cast<double>(n));
  const double l2 = lnln(n);
  auto ok = [&](double b) {
    return b * b * std::max(1.0, b / l1) >= C_b * k * std::sqrt(l1 * l2) && b >= C_b * std::sqrt(k * l2);
  };
  double lo = 0.0, hi = k;
  if (!ok(hi)) return hi;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

BfParams make_bf_params(int n, int k, double C_b) {
  BfParams p;
  p.n = n;
  p.k = k;
  p.C_b = C_b;
  p.b = target_b(std::max(n, 4), k, C_b);
  p.mu = std::max(p.b, p.b * p.b / std::log(static_cast<double>(std::max(n, 4))));
  p.beta = p.b / (10.0 * k);
  return p;
}

RowStatus classify_size(double size, double large_threshold, double mu) {
  if (size > large_threshold) return RowStatus::Large;
  if (size < mu) return RowStatus::Tiny;
  return RowStatus::Medium;
}

SparseRows build_Et(const InstanceMatrix& a, const Coloring& x, const std::vector<int>& alive,
                    const std::vector<int>& medium_rows, double beta) {
  std::vector<int> pos(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t p = 0; p < alive.size(); ++p) pos[alive[p]] = static_cast<int>(p);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t r = 0; r < medium_rows.size(); ++r) {
    for (const auto& e : a.row(medium_rows[r])) {
      if (pos[e.col] < 0) continue;
      t.emplace_back(static_cast<int>(r), pos[e.col], e.value - 2.0 * beta * e.value * e.value * x(e.col));
    }
  }
  SparseRows E(static_cast<Eigen::Index>(medium_rows.size()), static_cast<Eigen::Index>(alive.size()));
  E.setFromTriplets(t.begin(), t.end());
  return E;
}

void require_sign_matrix(const InstanceMatrix& a, int k) {
  for (const auto& e : a.entries()) {
    if (e.value != 1.0 && e.value != -1.0) throw InputError("expected a {0,+-1} matrix");
  }
  const int s = column_sparsity(a);
  if (s > k) {
    std::ostringstream os;
    os << "column sparsity " << s << " exceeds k = " << k;
    throw InputError(os.str());
  }
}

BfBasicPolicy::BfBasicPolicy(const InstanceMatrix& doubled, const BfParams& params)
    : a_(doubled), params_(params), rows_(doubled) {}

void BfBasicPolicy::init(const WalkState& st) {
  const int m = a_.rows();
  rows_.resync(st);
  tr_.status.assign(m, RowStatus::Tiny);
  tr_.dangerous.assign(m, 0);
  tr_.ever_dangerous.assign(m, 0);
  tr_.disc_at_tiny.assign(m, 0.0);
  const double large = 10.0 * params_.k;
  for (int i = 0; i < m; ++i) {
    tr_.status[i] = classify_size(rows_.size(i), large, params_.mu);
    if (tr_.status[i] == RowStatus::Medium) {
      max_entry_excess_ = std::max(max_entry_excess_, params_.beta * rows_.energy(i) - params_.b);
    }
  }
}

void BfBasicPolicy::resync(const WalkState& st) { rows_.resync(st); }

void BfBasicPolicy::constraints(const WalkState& st, WalkConstraints& out) {
  out.kappa = params_.kappa;
  out.eta = params_.eta;
  BlockRows block;
  block.eta = params_.eta1;
  for (int i = 0; i < a_.rows(); ++i) {
    if (tr_.status[i] == RowStatus::Large) {
      out.blocked.push_back({static_cast<std::uint64_t>(i), rows_.alive_row(i, st), true});
    } else if (tr_.status[i] == RowStatus::Medium) {
      SparseVec e = rows_.energy_row(i, st, params_.beta);
      if (tr_.dangerous[i]) out.blocked.push_back({kEnergyKey | static_cast<std::uint64_t>(i), e, false});
      block.rows.push_back(std::move(e));
    }
  }
  if (!block.rows.empty()) out.blocks.push_back(std::move(block));
}

void BfBasicPolicy::classify(int i, const WalkState& st, std::vector<BlockedVector>* newly_blocked,
                             TraceRecord* trace) {
  const RowStatus before = tr_.status[i];
  if (rows_.size_changed(i)) {
    const RowStatus now = classify_size(rows_.size(i), 10.0 * params_.k, params_.mu);
    if (now != before) {
      tr_.status[i] = now;
      if (trace) trace->status.emplace_back(i, static_cast<int>(now));
      if (now == RowStatus::Medium) {
        max_entry_excess_ = std::max(max_entry_excess_, params_.beta * rows_.energy(i) - params_.b);
      }
      if (now == RowStatus::Tiny) {
        tr_.disc_at_tiny[i] = rows_.disc(i);
        tr_.dangerous[i] = 0;
      }
    }
  }
  if (tr_.status[i] != RowStatus::Medium) return;
  const bool over = rows_.disc(i) >= 2.0 * params_.b;
  if (!tr_.dangerous[i] && over) {
    tr_.dangerous[i] = 1;
    tr_.ever_dangerous[i] = 1;
    if (newly_blocked) {
      newly_blocked->push_back({kEnergyKey | static_cast<std::uint64_t>(i), rows_.energy_row(i, st, params_.beta), false});
    }
  } else if (tr_.dangerous[i] && !over && !params_.latch_dangerous) {
    tr_.dangerous[i] = 0;
  }
}

void BfBasicPolicy::after_step(const WalkState& st, const StepInfo& info, std::vector<BlockedVector>& newly_blocked,
                               TraceRecord* trace) {
  const auto& changed = rows_.update(st, info);
  for (int i : changed) {
    if (tr_.status[i] == RowStatus::Medium) {
      const double dY = rows_.ddisc(i) + params_.beta * rows_.denergy(i);
      if (tr_.dangerous[i]) max_dY_ = std::max(max_dY_, dY);
      if (trace) trace->dz.emplace_back(i, dY);
    }
    classify(i, st, &newly_blocked, trace);
    if (tr_.status[i] == RowStatus::Medium) {
      max_Y_ = std::max(max_Y_, regularized_disc(rows_.disc(i), rows_.energy(i), params_.beta));
    }
  }
}

RunReport run_bf_basic(const InstanceMatrix& a, const BfParams& params, std::uint64_t seed, const WalkOptions& opt,
                       const TraceSink* trace) {
  require_sign_matrix(a, params.k);
  const InstanceMatrix doubled = append_negations(a);
  BfBasicPolicy policy(doubled, params);
  RunReport rep = run_walk(doubled, policy, seed, opt, trace);
  const auto d = disc_eval(a, rep.coloring);
  rep.disc_max = d.max_abs;
  rep.disc_per_row = d.per_row;
  rep.algo = "bf-basic";
  rep.params = {{"k", params.k},         {"C_b", params.C_b},       {"b", params.b},
                {"mu", params.mu},       {"beta", params.beta},     {"kappa", params.kappa},
                {"eta", params.eta},     {"eta1", params.eta1},     {"delta_cap", params.delta_cap},
                {"latch", params.latch_dangerous ? 1.0 : 0.0}};

  const auto& tr = policy.tracker();
  std::vector<double> col_count(a.cols(), 0.0);
  double dangerous_rows = 0.0;
  double tail = 0.0;
  const Eigen::VectorXd full = disc_eval(doubled, rep.coloring).per_row;
  for (int i = 0; i < doubled.rows(); ++i) {
    if (tr.ever_dangerous[i]) {
      dangerous_rows += 1.0;
      for (const auto& e : doubled.row(i)) col_count[e.col] += 1.0;
    }
    if (tr.status[i] == RowStatus::Tiny) tail = std::max(tail, std::abs(full(i) - tr.disc_at_tiny[i]) / params.mu);
  }
  rep.extras["dangerous_rows"] = {dangerous_rows};
  rep.extras["max_column_dangerous"] = {col_count.empty() ? 0.0 : *std::max_element(col_count.begin(), col_count.end())};
  rep.extras["max_Y"] = {policy.max_Y()};
  rep.extras["max_entry_excess"] = {policy.max_entry_excess()};
  rep.extras["max_tiny_tail_over_mu"] = {tail};
  return rep;
}

}  // namespace disc
