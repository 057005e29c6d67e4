#pragma once

#include <cstdint>

#include "disc/core.hpp"
#include "disc/report.hpp"
#include "disc/walk.hpp"

namespace disc {

/// I.i.d. uniform signs from mt19937_64(seed).
Coloring random_coloring(int n, std::uint64_t seed);

/// Classical Beck-Fiala rounding: keeps the rows with more than k floating
/// variables at zero discrepancy by moving along kernel vectors, then rounds
/// the rest to sign. Guarantees max |<a_i, x>| <= 2k - 1.
Coloring iterative_rounding_bf(const InstanceMatrix& a, int k);

/// Walk that blocks every row with alive squared mass >= 4 and has no
/// E-blocks (kappa = eta = 1/4, FAIL above n_t/2). Extras: the largest
/// fraction of large rows to alive coordinates seen after any step.
RunReport banaszczyk_walk(const InstanceMatrix& a, std::uint64_t seed, const WalkOptions& opt,
                          const TraceSink* trace = nullptr);

/// Report for a coloring produced outside the walk.
RunReport coloring_report(const InstanceMatrix& a, const Coloring& x, const std::string& algo, std::uint64_t seed);

}  // namespace disc
