#include "disc/walk.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "disc/error.hpp"
#include "disc/linalg.hpp"

namespace disc {

std::string to_string(WalkMode m) { return m == WalkMode::Fidelity ? "fidelity" : "fast"; }

WalkMode parse_walk_mode(const std::string& s) {
  if (s == "fidelity") return WalkMode::Fidelity;
  if (s == "fast") return WalkMode::Fast;
  throw InputError("unknown mode '" + s + "' (expected fidelity or fast)");
}

WalkState::WalkState(int n, double dt_, std::uint64_t seed)
    : x(Coloring::Zero(n)), dt(dt_), rng(seed), threshold(1.0 - 1.0 / (2.0 * std::max(n, 1))) {
  if (!(dt_ > 0.0)) throw InputError("dt must be positive");
  alive.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) alive[j] = j;
}

Eigen::VectorXd sample_direction(const SdpSolution& sol, std::mt19937_64& rng) {
  const double tr = sol.lambda.sum();
  if (!(tr > 1e-12)) throw SolverError("degenerate covariance");
  const Eigen::Index r = sol.lambda.size();
  Eigen::VectorXd coeff(r);
  std::uint64_t bits = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    if (i % 64 == 0) bits = rng();
    const double sign = (bits >> (i % 64)) & 1ULL ? 1.0 : -1.0;
    coeff(i) = sign * std::sqrt(sol.lambda(i) / tr);
  }
  return sol.V * coeff;
}

StepResult step(WalkState& state, const Eigen::VectorXd& v) {
  StepResult res;
  double s = std::sqrt(state.dt);
  int hit = -1;
  for (int j : state.alive) {
    const double vj = v(j);
    if (vj == 0.0) continue;
    const double room = vj > 0.0 ? 1.0 - state.x(j) : 1.0 + state.x(j);
    const double reach = room / std::abs(vj);
    if (reach < s) {
      s = reach;
      hit = j;
    }
  }
  for (int j : state.alive) {
    state.x(j) = std::clamp(state.x(j) + s * v(j), -1.0, 1.0);
  }
  if (hit >= 0) {
    state.x(hit) = v(hit) > 0.0 ? 1.0 : -1.0;
    res.truncated = true;
  }
  res.length = s;
  state.t += s * s;
  ++state.steps_taken;
  std::vector<int> still;
  still.reserve(state.alive.size());
  for (int j : state.alive) {
    if (std::abs(state.x(j)) <= state.threshold) {
      still.push_back(j);
    } else {
      res.newly_frozen.push_back(j);
      state.freeze_log.push_back({j, state.steps_taken, state.x(j)});
    }
  }
  state.alive = std::move(still);
  return res;
}

bool project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& span_vectors) {
  if (!span_vectors.empty()) {
    Eigen::MatrixXd S(v.size(), static_cast<Eigen::Index>(span_vectors.size()));
    for (std::size_t c = 0; c < span_vectors.size(); ++c) S.col(static_cast<Eigen::Index>(c)) = span_vectors[c];
    const Eigen::MatrixXd Q = linalg::orthonormal_basis(S);
    linalg::project_out_basis(Q, Q.cols(), v);
  }
  const double nrm = v.norm();
  if (nrm < 1e-8) return false;
  v /= nrm;
  return true;
}

Coloring round_final(const InstanceMatrix& a, const Coloring& x, int exhaustive_max) {
  const int n = static_cast<int>(x.size());
  if (n != a.cols()) throw InputError("coloring length does not match matrix");
  const double threshold = 1.0 - 1.0 / (2.0 * std::max(n, 1));
  Coloring out(n);
  std::vector<int> alive;
  for (int j = 0; j < n; ++j) {
    out(j) = x(j) < 0.0 ? -1.0 : 1.0;
    if (std::abs(x(j)) <= threshold) alive.push_back(j);
  }
  const int k = static_cast<int>(alive.size());
  if (k == 0 || k > exhaustive_max) return out;

  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int p = 0; p < k; ++p) slot[alive[p]] = p;
  // Rows split into a fixed part (frozen coordinates) and alive terms.
  struct Touch {
    double base;
    std::vector<std::pair<int, double>> terms;
  };
  std::vector<Touch> rows;
  double fixed_max = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    Touch t{0.0, {}};
    for (const auto& e : a.row(i)) {
      if (slot[e.col] >= 0) {
        t.terms.emplace_back(slot[e.col], e.value);
      } else {
        t.base += e.value * out(e.col);
      }
    }
    if (t.terms.empty()) {
      fixed_max = std::max(fixed_max, std::abs(t.base));
    } else {
      rows.push_back(std::move(t));
    }
  }
  // Code bit (k-1-p) set means coordinate alive[p] is -1, so increasing codes
  // enumerate completions lexicographically with +1 first.
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_code = 0;
  const std::uint32_t total = 1u << k;
  for (std::uint32_t code = 0; code < total; ++code) {
    double worst = fixed_max;
    for (const auto& r : rows) {
      double s = r.base;
      for (const auto& [p, val] : r.terms) s += ((code >> (k - 1 - p)) & 1u) ? -val : val;
      worst = std::max(worst, std::abs(s));
      if (worst >= best - 1e-12) break;
    }
    if (worst < best - 1e-12) {
      best = worst;
      best_code = code;
    }
  }
  for (int p = 0; p < k; ++p) out(alive[p]) = ((best_code >> (k - 1 - p)) & 1u) ? -1.0 : 1.0;
  return out;
}

double SparseVec::dot(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (const auto& [j, v] : entries) s += v * x(j);
  return s;
}

namespace {

struct SolveContext {
  SdpSolution sol;
  std::vector<int> alive;        // alive coordinates at solve time
  Eigen::MatrixXd Qb;            // n x cap orthonormal columns (fast mode)
  Eigen::Index used = 0;
  int rank = 0;                  // dim(W) at solve time
  int extra = 0;                 // vectors blocked since
  std::vector<SparseVec> flat;   // rows expected to keep their discrepancy
  std::unordered_set<std::uint64_t> keys;
};

Eigen::VectorXd restrict_dense(const SparseVec& v, const std::vector<int>& pos, int h) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(h);
  for (const auto& [j, val] : v.entries) {
    if (pos[j] >= 0) out(pos[j]) += val;
  }
  return out;
}

}  // namespace

RunReport run_walk(const InstanceMatrix& a, WalkPolicy& policy, std::uint64_t seed, const WalkOptions& opt,
                   const TraceSink* trace) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = a.cols();
  const double dt = opt.dt > 0.0 ? opt.dt : 1.0 / (8.0 * std::max(n, 1));
  WalkState st(n, dt, seed);
  RunReport rep;
  rep.seed = seed;
  rep.dt = dt;
  rep.mode = to_string(opt.mode);
  auto& diag = rep.diagnostics;

  policy.init(st);
  const int stop = policy.stop_alive(opt.stop_alive);
  const long step_cap = static_cast<long>(std::ceil(n / dt)) + n;
  const bool fast = opt.mode == WalkMode::Fast;

  SolveContext ctx;
  bool need_solve = true;
  int since_solve = 0;
  std::vector<int> pos(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd v(n), dx(n), x_prev(n);
  std::vector<BlockedVector> newly_blocked;
  std::vector<int> touched;
  std::vector<char> alive_flag(static_cast<std::size_t>(n), 1);

  while (st.n_alive() > stop) {
    if (need_solve || !fast || since_solve >= opt.resolve_every) {
      policy.resync(st);
      WalkConstraints cons;
      policy.constraints(st, cons);
      const int h = st.n_alive();
      std::fill(pos.begin(), pos.end(), -1);
      for (int p = 0; p < h; ++p) pos[st.alive[p]] = p;

      Eigen::MatrixXd W(h, static_cast<Eigen::Index>(cons.blocked.size()) + (cons.block_x ? 1 : 0));
      Eigen::Index c = 0;
      for (const auto& b : cons.blocked) W.col(c++) = restrict_dense(b.vec, pos, h);
      if (cons.block_x) {
        for (int p = 0; p < h; ++p) W(p, c) = st.x(st.alive[p]);
      }
      std::vector<BlockInput> blocks;
      for (const auto& br : cons.blocks) {
        std::vector<Eigen::Triplet<double>> trip;
        int rows = 0;
        for (const auto& row : br.rows) {
          bool any = false;
          for (const auto& [j, val] : row.entries) {
            if (pos[j] >= 0 && val != 0.0) {
              trip.emplace_back(rows, pos[j], val);
              any = true;
            }
          }
          if (any) ++rows;
        }
        if (rows == 0) continue;
        SparseRows E(rows, h);
        E.setFromTriplets(trip.begin(), trip.end());
        blocks.push_back({std::move(E), br.eta, true});
      }
      const SdpSpec spec = build_spec(h, W, std::move(blocks), cons.kappa, cons.eta);
      const int dim_w = static_cast<int>(spec.W.cols());
      if (dim_w > policy.fail_ratio() * h) {
        rep.fail_events.push_back({st.steps_taken, dim_w, h});
        break;
      }
      SdpResult res = solve(spec, opt.sdp);
      ++rep.resolves;
      if (!res.feasible) {
        if (spec.margin > 0.0) {
          std::ostringstream os;
          os << "SDP infeasible with positive margin " << spec.margin << " (h=" << h << ", dim W=" << dim_w
             << ", reason " << to_string(res.reason) << ")";
          throw SolverError(os.str());
        }
        rep.fail_events.push_back({st.steps_taken, dim_w, h});
        break;
      }
      if (opt.check_spectral_independence) {
        const Eigen::MatrixXd U = res.solution.U();
        for (const auto& b : spec.blocks) {
          diag.max_si_excess = std::max(diag.max_si_excess, normalized_block_ratio(b.E, U) - b.factor);
          ++diag.si_checks;
        }
      }
      ctx.sol = std::move(res.solution);
      ctx.alive = st.alive;
      ctx.rank = dim_w;
      ctx.extra = 0;
      ctx.flat.clear();
      ctx.keys.clear();
      for (const auto& b : cons.blocked) {
        ctx.keys.insert(b.key);
        if (b.flat) ctx.flat.push_back(b.vec);
      }
      if (fast) {
        ctx.Qb.resize(n, std::max<Eigen::Index>(dim_w + 16, 16));
        ctx.Qb.setZero();
        for (Eigen::Index k = 0; k < dim_w; ++k) {
          for (int p = 0; p < h; ++p) ctx.Qb(st.alive[p], k) = spec.W(p, k);
        }
        ctx.used = dim_w;
      }
      need_solve = false;
      since_solve = 0;
    }

    const Eigen::VectorXd vh = sample_direction(ctx.sol, st.rng);
    if (std::abs(vh.norm() - 1.0) > 1e-9) ++diag.unit_norm_violations;
    v.setZero();
    for (std::size_t p = 0; p < ctx.alive.size(); ++p) v(ctx.alive[p]) = vh(static_cast<Eigen::Index>(p));

    if (since_solve > 0) {
      linalg::project_out_basis(ctx.Qb, ctx.used, v);
      Eigen::VectorXd xa = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < n; ++j) {
        if (!alive_flag[j]) v(j) = 0.0;
      }
      for (int j : st.alive) xa(j) = st.x(j);
      linalg::project_out_basis(ctx.Qb, ctx.used, xa);
      for (int j = 0; j < n; ++j) {
        if (!alive_flag[j]) xa(j) = 0.0;
      }
      const double xn2 = xa.squaredNorm();
      if (xn2 > 0.0) v -= (v.dot(xa) / xn2) * xa;
      const double nrm = v.norm();
      if (nrm < 1e-8) {
        need_solve = true;
        ++diag.forced_resolves;
        continue;
      }
      v /= nrm;
    }

    x_prev = st.x;
    const StepResult sr = step(st, v);
    if (sr.truncated) ++diag.truncated_steps;
    dx = st.x - x_prev;
    touched.clear();
    bool moved_frozen = false;
    for (int j = 0; j < n; ++j) {
      if (dx(j) == 0.0) continue;
      if (alive_flag[j]) {
        touched.push_back(j);
      } else {
        moved_frozen = true;
      }
    }
    if (moved_frozen) ++diag.frozen_violations;
    for (int j : sr.newly_frozen) alive_flag[j] = 0;
    for (const auto& w : ctx.flat) diag.max_flat_drift = std::max(diag.max_flat_drift, std::abs(w.dot(dx)));
    diag.max_norm_gap = std::max(diag.max_norm_gap, std::abs(st.x.squaredNorm() - st.t));

    newly_blocked.clear();
    TraceRecord rec;
    StepInfo info{&dx, &touched, &sr.newly_frozen};
    policy.after_step(st, info, newly_blocked, trace ? &rec : nullptr);
    if (trace) {
      rec.step = st.steps_taken;
      rec.dt = sr.length * sr.length;
      (*trace)(rec);
    }

    if (fast) {
      for (const auto& b : newly_blocked) {
        if (!ctx.keys.insert(b.key).second) continue;
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        for (const auto& [j, val] : b.vec.entries) full(j) += val;
        for (int j = 0; j < n; ++j) {
          if (!alive_flag[j]) full(j) = 0.0;
        }
        if (linalg::append_orthonormal(ctx.Qb, ctx.used, full)) ++ctx.extra;
        if (b.flat) ctx.flat.push_back(b.vec);
      }
      for (int j : sr.newly_frozen) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        linalg::append_orthonormal(ctx.Qb, ctx.used, e);
      }
      if (ctx.rank + ctx.extra > policy.fail_ratio() * st.n_alive()) need_solve = true;
    }
    ++since_solve;
    if (st.steps_taken > step_cap) throw SolverError("walk exceeded its step budget");
  }

  rep.diagnostics.max_energy_increase = policy.max_energy_increase();
  rep.coloring = round_final(a, st.x);
  const auto d = disc_eval(a, rep.coloring);
  rep.disc_max = d.max_abs;
  rep.disc_per_row = d.per_row;
  rep.steps = st.steps_taken;
  rep.freeze_count = static_cast<long>(st.freeze_log.size());
  rep.final_time = st.t;
  rep.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace disc
