#include "disc/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "disc/error.hpp"

namespace disc {

double ClassParams::class_cap(int level, int q) const {
  return 20.0 * L_eff * k_l[static_cast<std::size_t>(level)] / std::ldexp(1.0, q);
}

ClassParams class_params(int n, int k, double C) {
  if (k < 1) throw InputError("class_params needs k >= 1");
  if (!(C > 0.0)) throw InputError("class_params needs C > 0");
  ClassParams p;
  p.n = n;
  p.k = k;
  p.C = C;
  const double nn = static_cast<double>(std::max(n, 4));
  p.loglog_factor = 1.0 + std::max(0.0, std::log2(std::log2(nn)));
  const double sqrt_ln = std::sqrt(std::log(nn));
  auto b_of = [&](double kl) { return C * (std::sqrt(kl) + sqrt_ln) * p.loglog_factor; };
  p.mu = b_of(k);
  const double ratio = 10.0 * k / p.mu;
  p.raw_L = ratio > 1.0 ? static_cast<int>(std::ceil(std::log(ratio) / std::log(100.0) - 1e-12)) : 0;
  int max_level = 0;
  for (double cap = 100.0; cap <= k; cap *= 100.0) ++max_level;
  p.L = std::min(p.raw_L, max_level);
  p.L_eff = std::max(p.L, 1);
  p.N = k > p.mu ? std::max(1, static_cast<int>(std::ceil(std::log2(k / p.mu) - 1e-12))) : 1;
  p.eta_cell = p.eta / (p.N * (p.L + 1));
  for (int l = 0; l <= p.L; ++l) {
    const double kl = std::max(1.0, k / std::pow(100.0, l));
    p.k_l.push_back(kl);
    p.b.push_back(b_of(kl));
    p.large.push_back(10.0 * p.L_eff * kl);
  }
  return p;
}

int class_of(double size, int level, const ClassParams& p) {
  if (level < 0 || level > p.L) throw InputError("class_of: level out of range");
  const double top = p.large[static_cast<std::size_t>(level)];
  if (size < p.mu || size > top) {
    std::ostringstream os;
    os << "class_of: size " << size << " outside the medium range [" << p.mu << ", " << top << "]";
    throw InputError(os.str());
  }
  int q = 1;
  while (q < p.N && size <= p.class_cap(level, q + 1)) ++q;
  return q;
}

LayerScheme adaptive_scheme(const ClassParams& p) {
  LayerScheme s;
  s.L = p.L;
  s.N = p.N;
  s.mu = p.mu;
  s.eta = p.eta;
  s.reset_on_class_change = true;
  s.k = p.k_l;
  s.b = p.b;
  s.large = p.large;
  for (int l = 0; l <= p.L; ++l) {
    for (int q = 1; q <= p.N; ++q) {
      s.beta.push_back(p.b[static_cast<std::size_t>(l)] / p.class_cap(l, q));
      s.block_eta.push_back(p.eta_cell);
    }
  }
  s.class_of = [p](double size, int level) { return class_of(size, level, p); };
  return s;
}

RunReport run_adaptive(const InstanceMatrix& a, int k, std::uint64_t seed, const WalkOptions& opt, double C,
                       const TraceSink* trace) {
  const ClassParams p = class_params(std::max(a.cols(), 4), k, C);
  RunReport rep = run_layered(a, adaptive_scheme(p), seed, opt, trace);
  rep.algo = "adaptive";
  rep.params = {{"k", k},         {"C", C},       {"L", p.L},           {"raw_L", p.raw_L}, {"L_eff", p.L_eff},
                {"N", p.N},       {"mu", p.mu},   {"b0", p.b.front()},  {"kappa", 1.0 / 6.0},
                {"eta", p.eta},   {"eta_cell", p.eta_cell}, {"delta_cap", 1.0 / 3.0}};
  return rep;
}

}  // namespace disc
