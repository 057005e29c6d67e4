#include "disc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "disc/error.hpp"

namespace disc {

SiCheck check_affine_si(const SparseRows& E, const Eigen::MatrixXd& U, double r, double eta_s, double tol) {
  if (!(eta_s > 0.0)) throw InputError("eta_s must be positive");
  SiCheck c;
  c.max_ratio = normalized_block_ratio(E, U);
  c.bound = r / eta_s;
  c.pass = c.max_ratio <= c.bound + tol;
  return c;
}

SiCheck check_affine_si(const Eigen::MatrixXd& E, const Eigen::MatrixXd& U, double r, double eta_s, double tol) {
  SparseRows S = E.sparseView();
  return check_affine_si(S, U, r, eta_s, tol);
}

void ProcessTrace::push(double step_dt, std::vector<std::pair<int, double>> inc) {
  for (const auto& [i, v] : inc) {
    if (i < 0) throw InputError("negative coordinate in trace");
    m = std::max(m, i + 1);
  }
  dt.push_back(step_dt);
  dz.push_back(std::move(inc));
}

TraceSink TraceCollector::sink() {
  return [this](const TraceRecord& rec) { trace_.push(rec.dt, rec.dz); };
}

namespace {

Interval percentile_interval(std::vector<double> v, double confidence) {
  Interval out;
  if (v.empty()) return out;
  std::sort(v.begin(), v.end());
  const double a = 0.5 * (1.0 - confidence);
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  out.lo = at(a);
  out.hi = at(1.0 - a);
  return out;
}

struct DriftStats {
  double alpha = 0.0;
  double theta = 0.0;
};

class DriftEvaluator {
 public:
  DriftEvaluator(const ProcessTrace& trace, const DriftOptions& opt) : trace_(trace), opt_(opt) {
    std::vector<int> obs(static_cast<std::size_t>(trace.m), 0);
    std::vector<double> s2(static_cast<std::size_t>(trace.m), 0.0);
    for (const auto& step : trace.dz) {
      for (const auto& [i, v] : step) {
        if (v != 0.0) ++obs[static_cast<std::size_t>(i)];
        s2[static_cast<std::size_t>(i)] += v * v;
      }
    }
    slot_.assign(static_cast<std::size_t>(trace.m), -1);
    for (int i = 0; i < trace.m; ++i) {
      if (obs[static_cast<std::size_t>(i)] >= opt.min_observations && s2[static_cast<std::size_t>(i)] > 1e-300) {
        slot_[static_cast<std::size_t>(i)] = d_++;
      } else if (obs[static_cast<std::size_t>(i)] > 0) {
        excluded_.push_back(i);
      }
    }
    dense_ = d_ <= opt.max_pair_dim;
    std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    signs_.resize(static_cast<std::size_t>(opt.random_vectors));
    for (auto& g : signs_) {
      g.resize(d_);
      for (int c = 0; c < d_; ++c) g(c) = (rng() & 1ULL) ? 1.0 : -1.0;
    }
  }

  int dim() const { return d_; }
  const std::vector<int>& excluded() const { return excluded_; }

  DriftStats eval(const std::vector<double>& w) const {
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(d_), s2 = Eigen::VectorXd::Zero(d_);
    Eigen::MatrixXd C;
    if (dense_) C = Eigen::MatrixXd::Zero(d_, d_);
    Eigen::MatrixXd proj;
    if (!dense_) proj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(signs_.size()) + 1, 1);
    std::vector<std::pair<int, double>> local;
    for (std::size_t t = 0; t < trace_.dz.size(); ++t) {
      const double wt = w[t];
      if (wt == 0.0) continue;
      local.clear();
      for (const auto& [i, v] : trace_.dz[t]) {
        const int c = slot_[static_cast<std::size_t>(i)];
        if (c < 0 || v == 0.0) continue;
        local.emplace_back(c, v);
        s1(c) += wt * v;
        s2(c) += wt * v * v;
      }
      if (dense_) {
        for (const auto& [a, va] : local) {
          for (const auto& [b, vb] : local) C(a, b) += wt * va * vb;
        }
      } else {
        double ones = 0.0;
        for (const auto& [a, va] : local) ones += va;
        proj(0, 0) += wt * ones * ones;
        for (std::size_t r = 0; r < signs_.size(); ++r) {
          double p = 0.0;
          for (const auto& [a, va] : local) p += signs_[r](a) * va;
          proj(static_cast<Eigen::Index>(r) + 1, 0) += wt * p * p;
        }
      }
    }
    DriftStats out;
    out.theta = std::numeric_limits<double>::infinity();
    const double total = s2.sum();
    for (int c = 0; c < d_; ++c) {
      if (s2(c) > 0.0) out.theta = std::min(out.theta, -s1(c) / s2(c));
    }
    if (!(total > 0.0)) return out;
    double alpha = 1.0;
    if (dense_) {
      for (int a = 0; a < d_; ++a) {
        for (int b = a + 1; b < d_; ++b) {
          const double den = C(a, a) + C(b, b);
          if (den > 0.0) alpha = std::max(alpha, (den + 2.0 * std::abs(C(a, b))) / den);
        }
      }
      alpha = std::max(alpha, C.sum() / total);
      for (const auto& g : signs_) alpha = std::max(alpha, g.dot(C * g) / total);
    } else {
      for (Eigen::Index r = 0; r < proj.rows(); ++r) alpha = std::max(alpha, proj(r, 0) / total);
    }
    out.alpha = alpha;
    return out;
  }

 private:
  const ProcessTrace& trace_;
  DriftOptions opt_;
  std::vector<int> slot_;
  std::vector<int> excluded_;
  int d_ = 0;
  bool dense_ = true;
  std::vector<Eigen::VectorXd> signs_;
};

}  // namespace

DriftEstimate estimate_drift(const ProcessTrace& trace, const DriftOptions& opt) {
  if (trace.steps() < 1000) throw InputError("estimate_drift needs at least 1000 steps");
  DriftEvaluator ev(trace, opt);
  DriftEstimate est;
  est.steps = trace.steps();
  est.excluded = ev.excluded();
  est.coordinates_used = ev.dim();
  if (ev.dim() == 0) throw InputError("estimate_drift: no coordinate has usable second moments");

  const std::size_t T = trace.steps();
  std::vector<double> w(T, 1.0);
  const DriftStats base = ev.eval(w);
  est.alpha_hat = base.alpha;
  est.theta_hat = base.theta;

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, T - 1);
  std::vector<double> alphas, thetas;
  for (int b = 0; b < opt.bootstrap; ++b) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t s = 0; s < T; ++s) w[pick(rng)] += 1.0;
    const DriftStats r = ev.eval(w);
    alphas.push_back(r.alpha);
    if (std::isfinite(r.theta)) thetas.push_back(r.theta);
  }
  est.alpha_ci = percentile_interval(alphas, opt.confidence);
  est.theta_ci = percentile_interval(thetas, opt.confidence);
  return est;
}

double synthetic_drift(double theta, double dt) {
  if (!(theta > 0.0)) return 0.0;
  const double disc = 1.0 - 4.0 * theta * theta * dt;
  if (disc < 0.0) throw InputError("synthetic_drift: dt too large for theta");
  // Smaller root of theta c^2 - c + theta dt = 0, written to avoid cancellation.
  return 2.0 * theta * dt / (1.0 + std::sqrt(disc));
}

ProcessTrace simulate_process(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.m < 1 || spec.blocksize < 1 || spec.m % spec.blocksize != 0) {
    throw InputError("synthetic process needs m divisible by blocksize");
  }
  if (!(spec.dt > 0.0) || !(spec.horizon > 0.0)) throw InputError("synthetic process needs positive dt and horizon");
  const double c = synthetic_drift(spec.theta, spec.dt);
  const double s = std::sqrt(spec.dt);
  const auto steps = static_cast<std::size_t>(std::ceil(spec.horizon / spec.dt - 1e-9));
  const int blocks = spec.m / spec.blocksize;
  std::mt19937_64 rng(seed);
  ProcessTrace tr;
  tr.m = spec.m;
  tr.dt.assign(steps, spec.dt);
  tr.dz.resize(steps);
  std::uint64_t bits = 0;
  int used = 64;
  for (std::size_t t = 0; t < steps; ++t) {
    auto& inc = tr.dz[t];
    inc.reserve(static_cast<std::size_t>(spec.m));
    for (int blk = 0; blk < blocks; ++blk) {
      if (used == 64) {
        bits = rng();
        used = 0;
      }
      const double v = ((bits >> used++) & 1ULL ? s : -s) - c;
      for (int q = 0; q < spec.blocksize; ++q) inc.emplace_back(blk * spec.blocksize + q, v);
    }
  }
  return tr;
}

int ever_bad(const ProcessTrace& trace, double B) {
  std::vector<double> z(static_cast<std::size_t>(trace.m), 0.0);
  std::vector<char> bad(static_cast<std::size_t>(trace.m), 0);
  for (const auto& step : trace.dz) {
    for (const auto& [i, v] : step) {
      auto& zi = z[static_cast<std::size_t>(i)];
      zi += v;
      if (zi >= B) bad[static_cast<std::size_t>(i)] = 1;
    }
  }
  return static_cast<int>(std::count(bad.begin(), bad.end(), 1));
}

void DecouplingParams::validate() const {
  if (!(alpha >= 1.0)) throw InputError("decoupling: alpha must be >= 1");
  if (!(theta > 0.0)) throw InputError("decoupling: theta must be positive");
  if (!(B >= 1.0)) throw InputError("decoupling: B must be >= 1");
  if (!(lambda > 0.0) || lambda > theta / 2.0 + 1e-15) throw InputError("decoupling: need 0 < lambda <= theta/2");
  if (n < 2 || lambda * B > std::log(static_cast<double>(n)) + 1e-12) throw InputError("decoupling: need lambda B <= ln n");
  if (m < 1) throw InputError("decoupling: m must be positive");
}

double DecouplingParams::bound() const {
  return m * std::exp(-lambda * B) + c_dec * lambda * alpha * std::log(static_cast<double>(n)) / theta;
}

DecouplingResult decoupling_experiment(const SyntheticSpec& spec, const DecouplingParams& params, int trials,
                                       std::uint64_t seed) {
  params.validate();
  if (trials < 1) throw InputError("decoupling: trials must be positive");
  DecouplingResult res;
  res.bound = params.bound();
  res.bad_counts.resize(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    res.bad_counts[static_cast<std::size_t>(t)] = ever_bad(simulate_process(spec, seed + static_cast<std::uint64_t>(t)), params.B);
  }
  int pass = 0;
  double sum = 0.0;
  for (int c : res.bad_counts) {
    pass += c <= res.bound ? 1 : 0;
    sum += c;
  }
  res.pass_rate = static_cast<double>(pass) / trials;
  res.mean_bad = sum / trials;
  return res;
}

double calibrate_c_dec(const SyntheticSpec& spec, DecouplingParams params, int trials, std::uint64_t seed,
                       double quantile) {
  params.c_dec = 0.0;
  const DecouplingResult r = decoupling_experiment(spec, params, trials, seed);
  std::vector<int> counts = r.bad_counts;
  std::sort(counts.begin(), counts.end());
  const auto idx = std::min(counts.size() - 1, static_cast<std::size_t>(std::ceil(quantile * counts.size())) - 1);
  const double excess = counts[idx] - params.m * std::exp(-params.lambda * params.B);
  if (excess <= 0.0) return 0.0;
  return excess * params.theta / (params.lambda * params.alpha * std::log(static_cast<double>(params.n)));
}

PotentialReport potential_monitor(const ProcessTrace& trace, double lambda, double B, double theta, int n,
                                  int bootstrap, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw InputError("potential: lambda must be positive");
  if (n > 1 && lambda * B > std::log(static_cast<double>(n)) + 1e-12) throw InputError("potential: need lambda B <= ln n");
  const double cap = std::exp(lambda * B);
  std::vector<double> z(static_cast<std::size_t>(trace.m), 0.0);
  PotentialReport rep;
  double W = static_cast<double>(trace.m);  // every coordinate starts at Z = 0
  rep.W.push_back(W);
  std::vector<double> dW, bound;
  dW.reserve(trace.steps());
  for (const auto& step : trace.dz) {
    double change = 0.0, b = 0.0;
    for (const auto& [i, v] : step) {
      double& zi = z[static_cast<std::size_t>(i)];
      const double before = std::min(std::exp(lambda * zi), cap);
      if (before < cap) b -= 0.5 * theta * lambda * std::exp(lambda * zi) * v * v;
      zi += v;
      change += std::min(std::exp(lambda * zi), cap) - before;
    }
    W += change;
    rep.W.push_back(W);
    dW.push_back(change);
    bound.push_back(b);
  }
  const double T = static_cast<double>(std::max<std::size_t>(dW.size(), 1));
  double s = 0.0, sb = 0.0;
  for (std::size_t t = 0; t < dW.size(); ++t) {
    s += dW[t];
    sb += bound[t];
  }
  rep.mean_dW = s / T;
  rep.mean_drift_bound = sb / T;
  if (!dW.empty() && bootstrap > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, dW.size() - 1);
    std::vector<double> means;
    for (int r = 0; r < bootstrap; ++r) {
      double acc = 0.0;
      for (std::size_t t = 0; t < dW.size(); ++t) acc += dW[pick(rng)];
      means.push_back(acc / T);
    }
    rep.mean_dW_ci = percentile_interval(means, 0.95);
  }
  return rep;
}

}  // namespace disc
