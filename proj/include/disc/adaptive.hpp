#pragma once

#include <cstdint>
#include <vector>

#include "disc/layered.hpp"

namespace disc {

struct ClassParams {
  int n = 0;
  int k = 1;
  double C = 4.0;
  double loglog_factor = 1.0;  ///< 1 + log2 log2 n
  double mu = 1.0;             ///< b_0
  int raw_L = 0;
  int L = 0;       ///< clamped so that k/100^L >= 1
  int L_eff = 1;   ///< max(L, 1), used in the size thresholds
  int N = 1;       ///< ceil(log2(k/mu)), at least 1
  double eta = 1.0 / 6.0;
  double eta_cell = 1.0 / 6.0;  ///< eta / (N (L+1))
  std::vector<double> k_l, b, large;

  /// s_q at level l: 20 L_eff k_l / 2^q.
  double class_cap(int level, int q) const;
};

ClassParams class_params(int n, int k, double C = 4.0);

/// Size class of a medium row: the q with size in (T/2^(q+1), T/2^q],
/// T = 20 L_eff k_l, capped at N so the last class absorbs everything down
/// to mu. Throws InputError outside [mu, 10 L_eff k_l].
int class_of(double size, int level, const ClassParams& p);

LayerScheme adaptive_scheme(const ClassParams& p);

RunReport run_adaptive(const InstanceMatrix& a, int k, std::uint64_t seed, const WalkOptions& opt, double C = 4.0,
                       const TraceSink* trace = nullptr);

}  // namespace disc
