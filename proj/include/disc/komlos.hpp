#pragma once

#include <cstdint>
#include <vector>

#include "disc/core.hpp"
#include "disc/report.hpp"
#include "disc/walk.hpp"

namespace disc {

/// Dyadic split of a unit-column matrix. Scale p < P holds the entries with
/// |a| in (2^-p, 2^-p+1] multiplied by 2^(p-1); scale P holds the light
/// entries (|a| <= 1/log2^5 n), also multiplied by 2^(P-1). Scales are
/// 1-based; `scales[p-1]` is A^(p).
struct ScaleDecomposition {
  int P = 2;
  double light_cutoff = 0.0;
  std::vector<InstanceMatrix> scales;

  const InstanceMatrix& scale(int p) const { return scales[static_cast<std::size_t>(p - 1)]; }
  /// 2^-(p-1), the factor that maps A^(p) back to A.
  static double weight(int p);
};

/// 1 + ceil(5 log2 log2 n) with log2 log2 n floored at 1; at least 2.
int scale_count(int n);

/// Scale of a nonzero entry given P and the light cutoff.
int scale_of(double value, int P, double light_cutoff);

/// Throws InputError when a column has norm above 1 + 1e-9.
ScaleDecomposition scale_decompose(const InstanceMatrix& a);

struct ScaleParams {
  double k = 1.0;  ///< 4^p
  double b = 1.0;  ///< B(k_p) sqrt(P)
  double mu = 1.0;
  double beta = 0.1;
  double eta = 0.0;
  bool exempt = false;  ///< beta > 0.1: no danger blocking
};

struct KomlosParams {
  int n = 0;
  int P = 2;
  double C_b = 4.0;
  double kappa = 1.0 / 6.0;
  double eta = 1.0 / 6.0;
  double delta_cap = 1.0 / 3.0;
  std::vector<ScaleParams> scale;  ///< index p-1
  /// The algorithm proper stops at this many alive coordinates (10P); the
  /// walk then continues under the same rules down to WalkOptions::stop_alive
  /// and any FAIL in that stretch is reported separately.
  int main_stop = 20;
};

KomlosParams make_komlos_params(int n, int P, double C_b = 4.0);

/// Multi-scale walk for unit-column matrices. Extras: per-scale max
/// discrepancy, decomposition error, dangerous counts, tail FAIL steps.
RunReport run_komlos(const InstanceMatrix& a, std::uint64_t seed, const WalkOptions& opt, double C_b = 4.0,
                     const TraceSink* trace = nullptr);

}  // namespace disc
