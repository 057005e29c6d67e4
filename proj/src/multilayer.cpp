#include "disc/multilayer.hpp"

#include <algorithm>
#include <cmath>

#include "disc/error.hpp"

namespace disc {

namespace {

int max_level_for(int k) {
  int l = 0;
  double cap = 100.0;
  while (cap <= k) {
    ++l;
    cap *= 100.0;
  }
  return l;
}

}  // namespace

double level_b(int n, double k_l, int level, double C, bool large_k) {
  const double scale = C * std::ldexp(1.0, level);
  if (large_k) return scale * std::sqrt(k_l);
  return scale * std::cbrt(k_l * std::log(static_cast<double>(std::max(n, 2))));
}

LevelParams level_params(int n, int k, double C) {
  if (k < 1) throw InputError("level_params needs k >= 1");
  if (!(C > 0.0)) throw InputError("level_params needs C > 0");
  LevelParams p;
  p.n = n;
  p.k = k;
  p.C = C;
  const double ln = std::log(static_cast<double>(std::max(n, 2)));
  p.large_k = k >= ln * ln;
  const double b0 = level_b(n, k, 0, C, p.large_k);
  p.mu = std::max(b0, b0 * b0 / ln);
  const double ratio = 10.0 * k / p.mu;
  p.raw_L = ratio > 1.0 ? static_cast<int>(std::ceil(std::log(ratio) / std::log(100.0) - 1e-12)) : 0;
  p.L = std::min(p.raw_L, max_level_for(k));
  for (int l = 0; l <= p.L; ++l) {
    const double kl = std::max(1.0, k / std::pow(100.0, l));
    const double two_l = std::ldexp(1.0, l);
    p.k_l.push_back(kl);
    p.b.push_back(level_b(n, kl, l, C, p.large_k));
    p.beta.push_back(p.b.back() / (two_l * 10.0 * kl));
    p.eta_l.push_back(p.eta / two_l);
    p.large.push_back(two_l * 10.0 * kl);
  }
  return p;
}

LayerScheme multilayer_scheme(const LevelParams& p) {
  LayerScheme s;
  s.L = p.L;
  s.N = 1;
  s.mu = p.mu;
  s.eta = p.eta;
  s.k = p.k_l;
  s.b = p.b;
  s.large = p.large;
  s.beta = p.beta;
  s.block_eta = p.eta_l;
  s.class_of = [](double, int) { return 1; };
  return s;
}

RunReport run_multilayer(const InstanceMatrix& a, int k, std::uint64_t seed, const WalkOptions& opt, double C,
                         const TraceSink* trace) {
  const LevelParams p = level_params(std::max(a.cols(), 2), k, C);
  RunReport rep = run_layered(a, multilayer_scheme(p), seed, opt, trace);
  rep.algo = "multilayer";
  rep.params = {{"k", k},      {"C", C},          {"L", p.L},         {"raw_L", p.raw_L},
                {"mu", p.mu},  {"b0", p.b.front()}, {"beta0", p.beta.front()}, {"large_k", p.large_k ? 1.0 : 0.0},
                {"kappa", 1.0 / 6.0}, {"eta", p.eta}, {"delta_cap", 1.0 / 3.0}};
  return rep;
}

}  // namespace disc
