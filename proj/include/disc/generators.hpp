#pragma once

#include <cstdint>
#include <string>

#include "disc/core.hpp"

namespace disc {

/// Each column gets exactly k distinct uniformly random rows with uniform
/// +-1 entries.
InstanceMatrix gen_sparse_signs(int n, int m, int k, std::uint64_t seed);

enum class ColumnProfile { GaussianNormalized, DyadicMixture };

ColumnProfile parse_column_profile(const std::string& s);

/// Unit l2 columns. Gaussian: dense N(0,1) entries normalized. Dyadic
/// mixture: magnitudes 2^-p * (1 + U(0,1)) with p uniform in {0..6} and random
/// signs, then normalized, so entries spread over several dyadic scales.
InstanceMatrix gen_unit_columns(int n, int m, ColumnProfile profile, std::uint64_t seed);

enum class AdversarialKind { RepeatedRows, Hadamard, DisjointSupport };

AdversarialKind parse_adversarial_kind(const std::string& s);

/// RepeatedRows: k identical rows with random signs on every column (signs).
/// Hadamard: block diagonal Sylvester-Hadamard blocks of order k scaled by
/// 1/sqrt(k) (unit columns; k a power of two dividing n).
/// DisjointSupport: block diagonal k x k random sign blocks (k divides n).
InstanceMatrix gen_adversarial(AdversarialKind kind, int n, int k, std::uint64_t seed = 0);

}  // namespace disc
