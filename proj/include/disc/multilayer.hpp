#pragma once

#include <cstdint>
#include <vector>

#include "disc/layered.hpp"

namespace disc {

struct LevelParams {
  int n = 0;
  int k = 1;
  double C = 4.0;
  bool large_k = false;  ///< k >= ln^2 n selects b_l = C 2^l sqrt(k_l)
  int raw_L = 0;         ///< ceil(log_100(10k/mu)), at least 0
  int L = 0;             ///< raw_L clamped so that k/100^L >= 1
  double mu = 1.0;
  double eta = 1.0 / 6.0;
  std::vector<double> k_l, b, beta, eta_l, large;
};

/// b_l for either regime, with k_l = k/100^l.
double level_b(int n, double k_l, int level, double C, bool large_k);

LevelParams level_params(int n, int k, double C = 4.0);

LayerScheme multilayer_scheme(const LevelParams& p);

/// Multi-level walk for {0,+-1} matrices with column sparsity <= k.
RunReport run_multilayer(const InstanceMatrix& a, int k, std::uint64_t seed, const WalkOptions& opt, double C = 4.0,
                         const TraceSink* trace = nullptr);

}  // namespace disc
