#include "disc/komlos.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "disc/bf_basic.hpp"
#include "disc/error.hpp"
#include "disc/rows.hpp"

namespace disc {

double ScaleDecomposition::weight(int p) { return std::ldexp(1.0, -(p - 1)); }

namespace {

double log2log2(int n) { return std::max(1.0, std::log2(std::log2(static_cast<double>(std::max(n, 4))))); }

constexpr std::uint64_t kEnergyBit = 1ULL << 40;

std::uint64_t key_for(int p, int i, bool energy) {
  return (static_cast<std::uint64_t>(p) << 48) | (energy ? kEnergyBit : 0ULL) | static_cast<std::uint64_t>(i);
}

struct ScaleTrack {
  int p = 1;
  ScaleParams prm;
  InstanceMatrix doubled;
  std::unique_ptr<RowState> rows;
  std::vector<RowStatus> status;
  std::vector<char> dangerous, ever_dangerous, settled;
  std::vector<double> settle_disc, settle_l1;
  int offset = 0;  // row index offset in the trace
};

class KomlosPolicy : public WalkPolicy {
 public:
  KomlosPolicy(const ScaleDecomposition& dec, const KomlosParams& params) : params_(params) {
    int offset = 0;
    for (int p = 1; p <= dec.P; ++p) {
      if (dec.scale(p).nnz() == 0) continue;
      auto s = std::make_unique<ScaleTrack>();
      s->p = p;
      s->prm = params.scale[static_cast<std::size_t>(p - 1)];
      s->doubled = append_negations(dec.scale(p));
      s->rows = std::make_unique<RowState>(s->doubled);
      s->offset = offset;
      offset += s->doubled.rows();
      scales_.push_back(std::move(s));
    }
  }

  void init(const WalkState& st) override {
    for (auto& s : scales_) {
      const int m = s->doubled.rows();
      s->rows->resync(st);
      s->status.assign(m, RowStatus::Tiny);
      s->dangerous.assign(m, 0);
      s->ever_dangerous.assign(m, 0);
      s->settled.assign(m, 0);
      s->settle_disc.assign(m, 0.0);
      s->settle_l1.assign(m, 0.0);
      for (int i = 0; i < m; ++i) {
        s->status[i] = classify_size(s->rows->mass(i), 10.0 * s->prm.k, s->prm.mu);
        on_status(*s, i, st);
      }
    }
  }

  void resync(const WalkState& st) override {
    for (auto& s : scales_) s->rows->resync(st);
  }

  void constraints(const WalkState& st, WalkConstraints& out) override {
    out.kappa = params_.kappa;
    out.eta = params_.eta;
    for (auto& s : scales_) {
      BlockRows block;
      block.eta = s->prm.eta;
      for (int i = 0; i < s->doubled.rows(); ++i) {
        if (s->status[i] == RowStatus::Large) {
          out.blocked.push_back({key_for(s->p, i, false), s->rows->alive_row(i, st), true});
        } else if (s->status[i] == RowStatus::Medium) {
          SparseVec e = s->rows->energy_row(i, st, s->prm.beta);
          if (s->dangerous[i]) out.blocked.push_back({key_for(s->p, i, true), e, false});
          block.rows.push_back(std::move(e));
        }
      }
      if (!block.rows.empty()) out.blocks.push_back(std::move(block));
    }
  }

  void after_step(const WalkState& st, const StepInfo& info, std::vector<BlockedVector>& newly_blocked,
                  TraceRecord* trace) override {
    for (auto& sp : scales_) {
      ScaleTrack& s = *sp;
      const auto& changed = s.rows->update(st, info);
      for (int i : changed) {
        if (s.status[i] == RowStatus::Medium) {
          const double dY = s.rows->ddisc(i) + s.prm.beta * s.rows->denergy(i);
          if (s.dangerous[i]) max_dY_ = std::max(max_dY_, dY);
          if (trace) trace->dz.emplace_back(s.offset + i, dY);
        }
        if (s.rows->size_changed(i)) {
          const RowStatus now = classify_size(s.rows->mass(i), 10.0 * s.prm.k, s.prm.mu);
          if (now != s.status[i]) {
            s.status[i] = now;
            if (trace) trace->status.emplace_back(s.offset + i, static_cast<int>(now));
            if (now == RowStatus::Tiny) s.dangerous[i] = 0;
            on_status(s, i, st);
          }
        }
        if (s.status[i] != RowStatus::Medium || s.prm.exempt || s.dangerous[i]) continue;
        if (s.rows->disc(i) >= 2.0 * s.prm.b) {
          s.dangerous[i] = 1;
          s.ever_dangerous[i] = 1;
          newly_blocked.push_back({key_for(s.p, i, true), s.rows->energy_row(i, st, s.prm.beta), false});
        }
      }
    }
  }

  double fail_ratio() const override { return params_.delta_cap; }
  double max_energy_increase() const override { return max_dY_; }

  const std::vector<std::unique_ptr<ScaleTrack>>& scales() const { return scales_; }
  double max_entry_excess() const { return max_entry_excess_; }

 private:
  void on_status(ScaleTrack& s, int i, const WalkState& st) {
    if (s.status[i] == RowStatus::Medium) {
      const double Y = regularized_disc(s.rows->disc(i), s.rows->energy(i), s.prm.beta);
      max_entry_excess_ = std::max(max_entry_excess_, Y - s.rows->disc(i) - s.prm.b);
    }
    if (s.status[i] != RowStatus::Large && !s.settled[i]) {
      s.settled[i] = 1;
      s.settle_disc[i] = s.rows->disc(i);
      double l1 = 0.0;
      for (const auto& e : s.doubled.row(i)) {
        if (std::abs(st.x(e.col)) <= st.threshold) l1 += std::abs(e.value);
      }
      s.settle_l1[i] = l1;
    }
  }

  KomlosParams params_;
  std::vector<std::unique_ptr<ScaleTrack>> scales_;
  double max_dY_ = 0.0;
  double max_entry_excess_ = -1e300;
};

}  // namespace

int scale_count(int n) {
  return std::max(2, 1 + static_cast<int>(std::ceil(5.0 * log2log2(n) - 1e-12)));
}

int scale_of(double value, int P, double light_cutoff) {
  const double a = std::abs(value);
  if (a == 0.0) throw InputError("zero entry has no scale");
  if (a <= light_cutoff) return P;
  int e = 0;
  const double mant = std::frexp(a, &e);
  const int p = mant == 0.5 ? 2 - e : 1 - e;
  if (p < 1) throw InputError("entry magnitude above 1");
  return std::min(p, P);
}

ScaleDecomposition scale_decompose(const InstanceMatrix& a) {
  const int n = a.cols();
  for (int j = 0; j < n; ++j) {
    if (a.squared_column_norm(j) > (1.0 + 1e-9) * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "column " << j << " has norm " << std::sqrt(a.squared_column_norm(j)) << " > 1";
      throw InputError(os.str());
    }
  }
  ScaleDecomposition dec;
  dec.P = scale_count(n);
  dec.light_cutoff = 1.0 / std::pow(std::log2(static_cast<double>(std::max(n, 4))), 5.0);
  std::vector<std::vector<Entry>> parts(static_cast<std::size_t>(dec.P));
  for (const auto& e : a.entries()) {
    const int p = scale_of(e.value, dec.P, dec.light_cutoff);
    parts[static_cast<std::size_t>(p - 1)].push_back({e.row, e.col, std::ldexp(e.value, p - 1)});
  }
  for (auto& part : parts) dec.scales.emplace_back(a.rows(), n, std::move(part), InstanceKind::General);
  return dec;
}

KomlosParams make_komlos_params(int n, int P, double C_b) {
  KomlosParams kp;
  kp.n = n;
  kp.P = P;
  kp.C_b = C_b;
  kp.main_stop = 10 * P;
  const double lg = std::log2(static_cast<double>(std::max(n, 4)));
  for (int p = 1; p <= P; ++p) {
    ScaleParams s;
    s.k = std::ldexp(1.0, 2 * p);
    s.b = target_b(std::max(n, 4), s.k, C_b) * std::sqrt(static_cast<double>(P));
    s.mu = std::max(s.b, s.b * s.b / lg);
    s.beta = s.b / (10.0 * s.k);
    s.eta = p < P ? 1.0 / (6.0 * P) : 1.0 / 6.0;
    s.exempt = s.beta > 0.1;
    kp.scale.push_back(s);
  }
  return kp;
}

RunReport run_komlos(const InstanceMatrix& a, std::uint64_t seed, const WalkOptions& opt, double C_b,
                     const TraceSink* trace) {
  const ScaleDecomposition dec = scale_decompose(a);
  const KomlosParams params = make_komlos_params(a.cols(), dec.P, C_b);
  KomlosPolicy policy(dec, params);
  RunReport rep = run_walk(a, policy, seed, opt, trace);
  rep.algo = "komlos";
  rep.params = {{"P", params.P},         {"C_b", C_b},
                {"kappa", params.kappa}, {"eta", params.eta},
                {"delta_cap", params.delta_cap}, {"main_stop", params.main_stop},
                {"light_cutoff", dec.light_cutoff}};

  // FAIL after the main phase has ended is a tail event, not an algorithm FAIL.
  std::vector<FailEvent> main_fails;
  std::vector<double> tail_steps;
  for (const auto& f : rep.fail_events) {
    if (f.n_alive <= params.main_stop) {
      tail_steps.push_back(static_cast<double>(f.step));
    } else {
      main_fails.push_back(f);
    }
  }
  rep.fail_events = std::move(main_fails);
  rep.extras["tail_fail_steps"] = tail_steps;

  std::vector<double> scale_max(static_cast<std::size_t>(dec.P), 0.0), dangerous(static_cast<std::size_t>(dec.P), 0.0);
  Eigen::VectorXd recon = Eigen::VectorXd::Zero(a.rows());
  for (int p = 1; p <= dec.P; ++p) {
    const auto d = disc_eval(dec.scale(p), rep.coloring);
    scale_max[static_cast<std::size_t>(p - 1)] = d.max_abs;
    recon += ScaleDecomposition::weight(p) * d.per_row;
  }
  double exempt_excess = -1e300;
  for (const auto& s : policy.scales()) {
    const Eigen::VectorXd fin = disc_eval(s->doubled, rep.coloring).per_row;
    for (int i = 0; i < s->doubled.rows(); ++i) {
      if (s->ever_dangerous[i]) dangerous[static_cast<std::size_t>(s->p - 1)] += 1.0;
      if (s->prm.exempt && s->settled[i]) {
        exempt_excess = std::max(exempt_excess, std::abs(fin(i) - s->settle_disc[i]) - 2.0 * s->settle_l1[i]);
      }
    }
  }
  rep.extras["scale_disc_max"] = scale_max;
  rep.extras["scale_dangerous_rows"] = dangerous;
  rep.extras["decomposition_error"] = {(recon - rep.disc_per_row).cwiseAbs().maxCoeff()};
  rep.extras["exempt_l1_excess"] = {exempt_excess};
  rep.extras["max_entry_excess"] = {policy.max_entry_excess()};
  std::vector<double> b;
  for (const auto& s : params.scale) b.push_back(s.b);
  rep.extras["scale_b"] = b;
  return rep;
}

}  // namespace disc
