#include "disc/layered.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "disc/error.hpp"

namespace disc {

namespace {

constexpr std::uint64_t kEnergyKey = 1ULL << 40;

}  // namespace

LayeredPolicy::LayeredPolicy(const InstanceMatrix& doubled, LayerScheme scheme)
    : a_(doubled), scheme_(std::move(scheme)), rows_(doubled) {
  if (scheme_.L < 0 || scheme_.N < 1) throw InputError("layer scheme needs L >= 0 and N >= 1");
  const auto levels = static_cast<std::size_t>(scheme_.L + 1);
  const auto cells = levels * static_cast<std::size_t>(scheme_.N);
  if (scheme_.k.size() != levels || scheme_.b.size() != levels || scheme_.large.size() != levels ||
      scheme_.beta.size() != cells || scheme_.block_eta.size() != cells || !scheme_.class_of) {
    throw InputError("layer scheme arrays do not match L and N");
  }
  arrivals_.assign(levels, {});
  danger_.assign(cells, 0.0);
}

RowStatus LayeredPolicy::classify(int i, int level) const {
  return classify_size(rows_.size(i), scheme_.large[static_cast<std::size_t>(level)], scheme_.mu);
}

double LayeredPolicy::Y(int i) const {
  const int l = tr_.level[i];
  if (l < 0 || tr_.status[i] != RowStatus::Medium) return -1e300;
  return rows_.disc(i) - tr_.snapshot[i] + scheme_.beta_at(l, tr_.cls[i]) * rows_.energy(i);
}

void LayeredPolicy::enter_segment(int i) {
  tr_.snapshot[i] = rows_.disc(i);
  tr_.boundaries[i].push_back(rows_.disc(i));
  if (tr_.status[i] == RowStatus::Medium) {
    max_entry_excess_ = std::max(max_entry_excess_, Y(i) - scheme_.b[static_cast<std::size_t>(tr_.level[i])]);
  }
}

void LayeredPolicy::init(const WalkState& st) {
  const int m = a_.rows();
  rows_.resync(st);
  tr_.level.assign(m, -1);
  tr_.cls.assign(m, 1);
  tr_.status.assign(m, RowStatus::Tiny);
  tr_.snapshot.assign(m, 0.0);
  tr_.blocked.assign(m, 0);
  tr_.boundaries.assign(m, {});
  for (int i = 0; i < m; ++i) {
    if (rows_.size(i) < scheme_.mu) continue;
    tr_.level[i] = 0;
    arrivals_[0].push_back(i);
    tr_.status[i] = classify(i, 0);
    if (tr_.status[i] == RowStatus::Medium) tr_.cls[i] = scheme_.class_of(rows_.size(i), 0);
    enter_segment(i);
  }
}

void LayeredPolicy::upgrade_level(int i, const WalkState& /*st*/) {
  const int l = tr_.level[i];
  if (l < 0 || l >= scheme_.L) throw InputError("upgrade_level needs a leveled row below L");
  tr_.level[i] = l + 1;
  arrivals_[static_cast<std::size_t>(l + 1)].push_back(i);
  tr_.status[i] = classify(i, l + 1);
  tr_.cls[i] = tr_.status[i] == RowStatus::Medium ? scheme_.class_of(rows_.size(i), l + 1) : 1;
  enter_segment(i);
}

void LayeredPolicy::constraints(const WalkState& st, WalkConstraints& out) {
  out.kappa = scheme_.kappa;
  out.eta = scheme_.eta;
  std::map<std::pair<int, int>, BlockRows> blocks;
  for (int i = 0; i < a_.rows(); ++i) {
    const int l = tr_.level[i];
    if (l < 0) continue;
    if (tr_.status[i] == RowStatus::Large) {
      out.blocked.push_back({static_cast<std::uint64_t>(i), rows_.alive_row(i, st), true});
    } else if (tr_.status[i] == RowStatus::Medium) {
      const int q = tr_.cls[i];
      SparseVec e = rows_.energy_row(i, st, scheme_.beta_at(l, q));
      if (tr_.blocked[i]) out.blocked.push_back({kEnergyKey | static_cast<std::uint64_t>(i), e, false});
      auto& br = blocks[{l, q}];
      br.eta = scheme_.eta_at(l, q);
      br.rows.push_back(std::move(e));
    }
  }
  for (auto& [key, br] : blocks) out.blocks.push_back(std::move(br));
}

void LayeredPolicy::refresh(int i, const WalkState& st, std::vector<BlockedVector>* newly_blocked,
                            TraceRecord* trace) {
  const int l = tr_.level[i];
  if (l < 0 || tr_.status[i] == RowStatus::Tiny) return;
  if (rows_.size_changed(i)) {
    const RowStatus before = tr_.status[i];
    const RowStatus now = classify(i, l);
    if (now != before) {
      tr_.status[i] = now;
      if (trace) trace->status.emplace_back(i, static_cast<int>(now));
    }
    if (now == RowStatus::Tiny) {
      tr_.blocked[i] = 0;
      tr_.boundaries[i].push_back(rows_.disc(i));
      return;
    }
    if (now == RowStatus::Medium) {
      const int q = scheme_.class_of(rows_.size(i), l);
      if (before == RowStatus::Large) {
        tr_.cls[i] = q;
        if (scheme_.reset_on_class_change) enter_segment(i);
      } else if (q != tr_.cls[i]) {
        tr_.cls[i] = q;
        if (scheme_.reset_on_class_change) enter_segment(i);
      }
    }
  }
  if (tr_.status[i] != RowStatus::Medium || tr_.blocked[i]) return;
  const double y = Y(i);
  const double two_b = 2.0 * scheme_.b[static_cast<std::size_t>(l)];
  if (y < two_b) return;
  max_overshoot_ = std::max(max_overshoot_, y - two_b);
  danger_[static_cast<std::size_t>(l * scheme_.N + tr_.cls[i] - 1)] += 1.0;
  if (l < scheme_.L) {
    upgrade_level(i, st);
    if (trace) trace->status.emplace_back(i, 10 * (l + 1) + static_cast<int>(tr_.status[i]));
  } else {
    tr_.blocked[i] = 1;
    if (newly_blocked) {
      newly_blocked->push_back({kEnergyKey | static_cast<std::uint64_t>(i),
                                rows_.energy_row(i, st, scheme_.beta_at(l, tr_.cls[i])), false});
    }
  }
}

void LayeredPolicy::after_step(const WalkState& st, const StepInfo& info, std::vector<BlockedVector>& newly_blocked,
                               TraceRecord* trace) {
  const auto& changed = rows_.update(st, info);
  for (int i : changed) {
    const int l = tr_.level[i];
    if (l >= 0 && tr_.status[i] == RowStatus::Medium) {
      const double dY = rows_.ddisc(i) + scheme_.beta_at(l, tr_.cls[i]) * rows_.denergy(i);
      if (tr_.blocked[i]) max_dY_ = std::max(max_dY_, dY);
      if (trace) trace->dz.emplace_back(i, dY);
    }
    refresh(i, st, &newly_blocked, trace);
  }
}

RunReport run_layered(const InstanceMatrix& a, const LayerScheme& scheme, std::uint64_t seed, const WalkOptions& opt,
                      const TraceSink* trace) {
  require_sign_matrix(a, static_cast<int>(std::lround(scheme.k.front())));
  const InstanceMatrix doubled = append_negations(a);
  LayeredPolicy policy(doubled, scheme);
  RunReport rep = run_walk(doubled, policy, seed, opt, trace);
  const auto d = disc_eval(a, rep.coloring);
  rep.disc_max = d.max_abs;
  rep.disc_per_row = d.per_row;

  const int m = a.rows();
  const auto& tr = policy.tracker();
  std::vector<double> arrival_max, arrival_ok;
  for (int l = 0; l <= scheme.L; ++l) {
    std::vector<char> reached(static_cast<std::size_t>(m), 0);
    for (int i : policy.arrivals()[static_cast<std::size_t>(l)]) reached[static_cast<std::size_t>(i % m)] = 1;
    double worst = 0.0;
    for (int j = 0; j < a.cols(); ++j) {
      double c = 0.0;
      for (const auto& ce : a.col(j)) c += reached[static_cast<std::size_t>(ce.row)] ? 1.0 : 0.0;
      worst = std::max(worst, c);
    }
    arrival_max.push_back(worst);
    arrival_ok.push_back(worst <= scheme.k[static_cast<std::size_t>(l)] ? 1.0 : 0.0);
  }

  const Eigen::VectorXd full = disc_eval(doubled, rep.coloring).per_row;
  double tele = 0.0, tail = 0.0;
  for (int i = 0; i < doubled.rows(); ++i) {
    const auto& bnd = tr.boundaries[i];
    if (bnd.empty()) {
      tail = std::max(tail, std::abs(full(i)) / scheme.mu);
      continue;
    }
    double sum = 0.0;
    for (std::size_t s = 1; s < bnd.size(); ++s) sum += bnd[s] - bnd[s - 1];
    sum += full(i) - bnd.back();
    tele = std::max(tele, std::abs(sum + bnd.front() - full(i)));
    if (tr.status[i] != RowStatus::Tiny) tele = std::max(tele, std::abs(tr.snapshot[i] - bnd.back()));
    if (tr.status[i] == RowStatus::Tiny) tail = std::max(tail, std::abs(full(i) - bnd.back()) / scheme.mu);
  }
  rep.extras["level_arrival_max"] = arrival_max;
  rep.extras["level_arrival_ok"] = arrival_ok;
  rep.extras["danger_counts"] = policy.danger_counts();
  rep.extras["telescoping_error"] = {tele};
  rep.extras["max_tiny_tail_over_mu"] = {tail};
  rep.extras["max_entry_excess"] = {policy.max_entry_excess()};
  rep.extras["max_overshoot"] = {policy.max_overshoot()};
  rep.extras["level_b"] = scheme.b;
  return rep;
}

}  // namespace disc
