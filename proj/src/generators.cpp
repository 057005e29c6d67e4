#include "disc/generators.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "disc/error.hpp"

namespace disc {

namespace {

double rand_sign(std::mt19937_64& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

// Unbiased integer in [0, bound) by rejection.
std::uint64_t below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

InstanceMatrix gen_sparse_signs(int n, int m, int k, std::uint64_t seed) {
  if (n < 0 || m < 0 || k < 0) throw InputError("negative generator size");
  if (k > m) throw InputError("k must not exceed m");
  std::mt19937_64 rng(seed);
  std::vector<int> rows(static_cast<std::size_t>(m));
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(n) * k);
  for (int j = 0; j < n; ++j) {
    std::iota(rows.begin(), rows.end(), 0);
    for (int t = 0; t < k; ++t) {
      const auto pick = t + static_cast<int>(below(rng, static_cast<std::uint64_t>(m - t)));
      std::swap(rows[t], rows[pick]);
      entries.push_back({rows[t], j, rand_sign(rng)});
    }
  }
  return InstanceMatrix(m, n, std::move(entries), InstanceKind::SignMatrix);
}

ColumnProfile parse_column_profile(const std::string& s) {
  if (s == "gaussian" || s == "gaussian-normalized") return ColumnProfile::GaussianNormalized;
  if (s == "dyadic" || s == "dyadic-mixture") return ColumnProfile::DyadicMixture;
  throw InputError("unknown column profile '" + s + "'");
}

InstanceMatrix gen_unit_columns(int n, int m, ColumnProfile profile, std::uint64_t seed) {
  if (n < 0 || m < 1) throw InputError("unit-column instances need m >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Entry> entries;
  std::vector<double> col(static_cast<std::size_t>(m));
  for (int j = 0; j < n; ++j) {
    double norm2 = 0.0;
    for (int i = 0; i < m; ++i) {
      if (profile == ColumnProfile::GaussianNormalized) {
        col[i] = gauss(rng);
      } else {
        const auto p = static_cast<int>(below(rng, 7));
        col[i] = rand_sign(rng) * std::ldexp(1.0 + unit_real(rng), -p);
      }
      norm2 += col[i] * col[i];
    }
    if (norm2 == 0.0) {
      col[0] = 1.0;
      norm2 = 1.0;
    }
    const double norm = std::sqrt(norm2);
    for (int i = 0; i < m; ++i) {
      if (col[i] != 0.0) entries.push_back({i, j, col[i] / norm});
    }
  }
  return InstanceMatrix(m, n, std::move(entries), InstanceKind::UnitColumns);
}

AdversarialKind parse_adversarial_kind(const std::string& s) {
  if (s == "repeated-rows") return AdversarialKind::RepeatedRows;
  if (s == "hadamard") return AdversarialKind::Hadamard;
  if (s == "disjoint-support") return AdversarialKind::DisjointSupport;
  throw InputError("unknown adversarial kind '" + s + "'");
}

InstanceMatrix gen_adversarial(AdversarialKind kind, int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 1) throw InputError("adversarial instances need n, k >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Entry> entries;
  switch (kind) {
    case AdversarialKind::RepeatedRows: {
      std::vector<double> signs(static_cast<std::size_t>(n));
      for (auto& s : signs) s = rand_sign(rng);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) entries.push_back({i, j, signs[j]});
      return InstanceMatrix(k, n, std::move(entries), InstanceKind::SignMatrix);
    }
    case AdversarialKind::Hadamard: {
      if ((k & (k - 1)) != 0) throw InputError("Hadamard block order must be a power of two");
      if (n % k != 0) throw InputError("Hadamard block order must divide n");
      const double s = 1.0 / std::sqrt(static_cast<double>(k));
      for (int b = 0; b < n / k; ++b)
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            // Sylvester construction: H(i,j) = (-1)^popcount(i & j)
            const double h = __builtin_popcount(static_cast<unsigned>(i & j)) % 2 ? -s : s;
            entries.push_back({b * k + i, b * k + j, h});
          }
      return InstanceMatrix(n, n, std::move(entries), InstanceKind::UnitColumns);
    }
    case AdversarialKind::DisjointSupport: {
      if (n % k != 0) throw InputError("block size k must divide n");
      for (int b = 0; b < n / k; ++b)
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) entries.push_back({b * k + i, b * k + j, rand_sign(rng)});
      return InstanceMatrix(n, n, std::move(entries), InstanceKind::SignMatrix);
    }
  }
  throw InputError("unknown adversarial kind");
}

}  // namespace disc
