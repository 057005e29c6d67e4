#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "disc/adaptive.hpp"
#include "disc/baselines.hpp"
#include "disc/bf_basic.hpp"
#include "disc/error.hpp"
#include "disc/generators.hpp"
#include "disc/komlos.hpp"
#include "disc/layered.hpp"
#include "disc/multilayer.hpp"
#include "disc/runner.hpp"
#include "oracles.hpp"

namespace disc {
namespace {

InstanceMatrix identity(int n, InstanceKind kind) {
  std::vector<Entry> e;
  for (int j = 0; j < n; ++j) e.push_back({j, j, 1.0});
  return InstanceMatrix(n, n, std::move(e), kind);
}

WalkOptions fidelity(double dt) {
  WalkOptions opt;
  opt.mode = WalkMode::Fidelity;
  opt.dt = dt;
  return opt;
}

// ---- bf_basic

TEST(TargetB, CappedAtK) {
  EXPECT_DOUBLE_EQ(target_b(1 << 16, 1.0, 1e6), 1.0);
  EXPECT_DOUBLE_EQ(target_b(1 << 16, 16.0, 4.0), 16.0);
}

TEST(TargetB, SatisfiesBothConditionsAndIsMinimal) {
  // Re-substitute into the two defining inequalities.
  auto holds = [](int n, double k, double C_b, double b) {
    const double l1 = std::log(static_cast<double>(n));
    const double l2 = std::max(1.0, std::log(l1));
    return b * b * std::max(1.0, b / l1) >= C_b * k * std::sqrt(l1 * l2) && b >= C_b * std::sqrt(k * l2);
  };
  for (int n : {64, 1024, 1 << 16}) {
    for (double k : {4.0, 16.0, 256.0, 4096.0}) {
      for (double C_b : {0.3, 1.0, 4.0}) {
        const double b = target_b(n, k, C_b);
        if (b >= k) continue;
        EXPECT_TRUE(holds(n, k, C_b, b)) << n << " " << k << " " << C_b;
        EXPECT_FALSE(holds(n, k, C_b, b - 1.5e-3)) << n << " " << k << " " << C_b;
      }
    }
  }
}

TEST(TargetB, MonotoneInK) {
  for (int n : {64, 4096})
    for (double k = 1; k <= 512; k *= 2) EXPECT_GE(target_b(n, 2 * k, 1.0), target_b(n, k, 1.0));
}

TEST(BfParams, DeskDefaults) {
  // b capped at k = 4; mu = max(4, 16 / ln 64) = 4; beta = 4 / 40.
  const BfParams p = make_bf_params(64, 4);
  EXPECT_DOUBLE_EQ(p.b, 4.0);
  EXPECT_DOUBLE_EQ(p.mu, 4.0);
  EXPECT_DOUBLE_EQ(p.beta, 0.1);
}

TEST(ClassifySize, Thresholds) {
  EXPECT_EQ(classify_size(0, 10, 2), RowStatus::Tiny);
  EXPECT_EQ(classify_size(12, 10, 2), RowStatus::Large);
  EXPECT_EQ(classify_size(10, 10, 2), RowStatus::Medium);
  EXPECT_EQ(classify_size(2, 10, 2), RowStatus::Medium);
}

TEST(RegularizedDisc, Arithmetic) {
  // a = (1,1), x = (0.5,-0.5): disc 0, G = 2 * 0.75 = 1.5.
  EXPECT_DOUBLE_EQ(regularized_disc(0.0, 1.5, 0.1), 0.15);
}

TEST(BuildEt, Formula) {
  InstanceMatrix a(1, 3, {{0, 0, 1}, {0, 1, -1}}, InstanceKind::SignMatrix);
  Coloring x(3);
  x << 0.5, 0.0, 0.0;
  const SparseRows E = build_Et(a, x, {0, 1, 2}, {0}, 0.1);
  ASSERT_EQ(E.rows(), 1);
  ASSERT_EQ(E.cols(), 3);
  EXPECT_DOUBLE_EQ(E.coeff(0, 0), 0.9);
  EXPECT_DOUBLE_EQ(E.coeff(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(E.coeff(0, 2), 0.0);
}

TEST(BuildEt, RestrictsToAliveAndBoundsEntries) {
  std::mt19937_64 rng(3);
  const InstanceMatrix a = testing::random_sign_instance(rng, 6, 10, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Coloring x(10);
  for (int j = 0; j < 10; ++j) x(j) = u(rng);
  const std::vector<int> alive = {1, 3, 4, 8};
  const SparseRows E0 = build_Et(a, Coloring::Zero(10), alive, {0, 2, 5}, 0.1);
  const SparseRows E = build_Et(a, x, alive, {0, 2, 5}, 0.1);
  const Eigen::MatrixXd A = a.dense();
  const int rows[] = {0, 2, 5};
  for (int r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < alive.size(); ++c) {
      const double aij = A(rows[r], alive[c]);
      EXPECT_DOUBLE_EQ(E0.coeff(r, static_cast<int>(c)), aij);
      EXPECT_LE(std::abs(E.coeff(r, static_cast<int>(c))), 1.2 * std::abs(aij) + 1e-15);
    }
}

TEST(RequireSignMatrix, RejectsBadInput) {
  InstanceMatrix two(2, 1, {{0, 0, 1}, {1, 0, 1}}, InstanceKind::SignMatrix);
  EXPECT_THROW(require_sign_matrix(two, 1), InputError);
  EXPECT_NO_THROW(require_sign_matrix(two, 2));
  InstanceMatrix half(1, 1, {{0, 0, 0.5}}, InstanceKind::General);
  EXPECT_THROW(require_sign_matrix(half, 1), InputError);
}

TEST(BfBasic, SingletonRowsGiveDiscOne) {
  const InstanceMatrix a = identity(8, InstanceKind::SignMatrix);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RunReport rep = run_bf_basic(a, make_bf_params(8, 1), seed, fidelity(0.05));
    EXPECT_DOUBLE_EQ(rep.disc_max, 1.0);
  }
}

TEST(BfBasic, BruteForceSandwich) {
  const InstanceMatrix a = gen_sparse_signs(16, 16, 3, 77);
  const double opt = testing::brute_force_disc(a);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RunReport rep = run_bf_basic(a, make_bf_params(16, 3), seed, fidelity(0.05));
    EXPECT_GE(rep.disc_max, opt);
    EXPECT_LE(rep.disc_max, 5.0);
    EXPECT_EQ(testing::walk_invariant_failures(rep, 16, 0.05), "");
  }
}

TEST(BfBasic, TracksEnergyBoundAndEntryExcess) {
  const InstanceMatrix a = gen_sparse_signs(48, 24, 4, 5);
  const RunReport rep = run_bf_basic(a, make_bf_params(48, 4), 2, fidelity(0.05));
  EXPECT_EQ(testing::walk_invariant_failures(rep, 48, 0.05), "");
  // On becoming medium Y <= disc + b.
  EXPECT_LE(rep.extras.at("max_entry_excess")[0], 1e-9);
}

// ---- komlos

TEST(Komlos, ScaleCount) {
  EXPECT_EQ(scale_count(128), 16);  // 1 + ceil(5 log2 7)
  EXPECT_EQ(scale_count(4), 6);     // log2 log2 4 = 1
  EXPECT_EQ(scale_count(2), 6);     // floored at 1
  EXPECT_EQ(scale_count(1 << 16), 21);
}

TEST(Komlos, ScaleOfExamples) {
  const int P = 16;
  const double cut = 1.0 / std::pow(7.0, 5);
  EXPECT_EQ(scale_of(0.6, P, cut), 1);
  EXPECT_EQ(scale_of(-0.6, P, cut), 1);
  EXPECT_EQ(scale_of(1.0, P, cut), 1);
  EXPECT_EQ(scale_of(0.3, P, cut), 2);
  EXPECT_EQ(scale_of(0.5, P, cut), 2);
  EXPECT_EQ(scale_of(0.25, P, cut), 3);
  EXPECT_EQ(scale_of(cut, P, cut), P);
  EXPECT_EQ(scale_of(std::ldexp(1.0, -20), 8, 1e-9), 8);  // heavy but past the last scale
}

TEST(Komlos, DecomposeScalesAndReconstructs) {
  InstanceMatrix a(2, 1, {{0, 0, 0.6}, {1, 0, 0.3}}, InstanceKind::UnitColumns);
  const ScaleDecomposition d = scale_decompose(a);
  ASSERT_EQ(d.scale(1).nnz(), 1u);
  EXPECT_DOUBLE_EQ(d.scale(1).entries()[0].value, 0.6);
  ASSERT_EQ(d.scale(2).nnz(), 1u);
  EXPECT_DOUBLE_EQ(d.scale(2).entries()[0].value, 0.6);
  EXPECT_DOUBLE_EQ(ScaleDecomposition::weight(2), 0.5);

  for (const char* profile : {"gaussian-normalized", "dyadic-mixture"}) {
    const InstanceMatrix u = gen_unit_columns(16, 16, parse_column_profile(profile), 3);
    const ScaleDecomposition s = scale_decompose(u);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(16, 16);
    for (int p = 1; p <= s.P; ++p) {
      sum += ScaleDecomposition::weight(p) * s.scale(p).dense();
      for (const auto& e : s.scale(p).entries()) EXPECT_LE(std::abs(e.value), 1.0);
    }
    EXPECT_LE((sum - u.dense()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Komlos, RejectsLongColumns) {
  InstanceMatrix a(2, 1, {{0, 0, 1}, {1, 0, 1}}, InstanceKind::SignMatrix);
  EXPECT_THROW(scale_decompose(a), InputError);
}

TEST(Komlos, IdentityHasDiscOne) {
  const InstanceMatrix a = identity(32, InstanceKind::UnitColumns);
  const RunReport rep = run_komlos(a, 1, fidelity(0.05));
  EXPECT_DOUBLE_EQ(rep.disc_max, 1.0);
  EXPECT_EQ(testing::walk_invariant_failures(rep, 32, 0.05), "");
}

TEST(Komlos, PerScaleDiscrepanciesRecombine) {
  const InstanceMatrix a = gen_unit_columns(48, 48, ColumnProfile::DyadicMixture, 8);
  const RunReport rep = run_komlos(a, 4, fidelity(0.05));
  EXPECT_LE(rep.extras.at("decomposition_error")[0], 1e-9);
  EXPECT_EQ(testing::walk_invariant_failures(rep, 48, 0.05), "");
}

// ---- multilayer

TEST(Multilayer, LevelBFormula) {
  EXPECT_DOUBLE_EQ(level_b(1 << 20, 100.0, 1, 1.0, true), 20.0);
  // Small-k branch: C 2^l cbrt(k_l ln n).
  const double ln = std::log(1024.0);
  EXPECT_NEAR(level_b(1024, 8.0, 0, 1.0, false), std::cbrt(8.0 * ln), 1e-12);
}

TEST(Multilayer, LevelParamsLargeK) {
  const LevelParams p = level_params(1 << 20, 10000, 1.0);
  EXPECT_TRUE(p.large_k);
  ASSERT_GE(p.L, 1);
  EXPECT_DOUBLE_EQ(p.k_l[1], 100.0);
  EXPECT_DOUBLE_EQ(p.b[1], 20.0);
  EXPECT_DOUBLE_EQ(p.beta[1], 20.0 / (2.0 * 10.0 * 100.0));
  EXPECT_DOUBLE_EQ(p.large[1], 2000.0);
  EXPECT_DOUBLE_EQ(p.eta_l[1], p.eta / 2.0);
}

TEST(Multilayer, NumberOfLevelsFromRatio) {
  // ln n = 10 makes mu = b0^2 / ln n = 1000 and k / mu = 10.
  const int n = 22026;
  const LevelParams p = level_params(n, 10000, 1.0);
  EXPECT_NEAR(10000.0 / p.mu, 10.0, 1e-3);
  EXPECT_EQ(p.raw_L, 1);
  EXPECT_EQ(p.L, 1);
}

TEST(Multilayer, RegimeBoundary) {
  const int n = 1 << 16;
  const double ln2 = std::pow(std::log(static_cast<double>(n)), 2);
  const int below = static_cast<int>(std::floor(ln2));
  const int above = below + 1;
  EXPECT_FALSE(level_params(n, below).large_k);
  EXPECT_TRUE(level_params(n, above).large_k);
}

TEST(Multilayer, KOneCollapsesToOneLevel) {
  EXPECT_EQ(level_params(64, 1).L, 0);
  const LevelParams p = level_params(64, 4);
  for (double kl : p.k_l) EXPECT_GE(kl, 1.0);
}

TEST(Multilayer, BruteForceSandwichAndTelescoping) {
  const InstanceMatrix a = gen_sparse_signs(16, 16, 3, 78);
  const double opt = testing::brute_force_disc(a);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RunReport rep = run_multilayer(a, 3, seed, fidelity(0.05));
    EXPECT_GE(rep.disc_max, opt);
    EXPECT_LE(rep.disc_max, 5.0);
    EXPECT_LE(rep.extras.at("telescoping_error")[0], 1e-9);
    EXPECT_EQ(testing::walk_invariant_failures(rep, 16, 0.05), "");
  }
}

// A two-level scheme on a hand-built instance: the row leaves level 0 and
// re-enters at level 1 with Y = beta_1 G.
TEST(Layered, UpgradeStartsNewSegment) {
  std::vector<Entry> e;
  for (int j = 0; j < 6; ++j) e.push_back({0, j, 1.0});
  const InstanceMatrix doubled = append_negations(InstanceMatrix(1, 6, e, InstanceKind::SignMatrix));
  LayerScheme s;
  s.L = 1;
  s.N = 1;
  s.mu = 2;
  s.k = {6, 3};
  s.b = {1, 1};
  s.large = {60, 30};
  s.beta = {0.05, 0.1};
  s.block_eta = {0.1, 0.05};
  s.class_of = [](double, int) { return 1; };
  LayeredPolicy pol(doubled, s);
  WalkState st(6, 0.01, 1);
  st.x << 0.5, 0.5, 0.0, 0.0, -0.5, 0.0;
  pol.init(st);
  EXPECT_EQ(pol.tracker().level[0], 0);
  // disc = 0.5, G = 3 * 0.75 + 3 = 5.25; the segment started at disc 0.5.
  EXPECT_NEAR(pol.Y(0), 0.05 * 5.25, 1e-12);
  pol.upgrade_level(0, st);
  EXPECT_EQ(pol.tracker().level[0], 1);
  EXPECT_NEAR(pol.Y(0), 0.1 * 5.25, 1e-12);
  EXPECT_EQ(pol.tracker().boundaries[0].size(), 2u);
  EXPECT_THROW(pol.upgrade_level(0, st), InputError);
  ASSERT_EQ(pol.arrivals().size(), 2u);
  EXPECT_EQ(pol.arrivals()[1], std::vector<int>{0});
}

// ---- adaptive

ClassParams two_level_classes() {
  ClassParams p;
  p.L = 2;
  p.L_eff = 2;
  p.N = 6;
  p.mu = 10;
  p.k_l = {10000, 100, 1};
  for (double kl : p.k_l) p.large.push_back(10.0 * p.L_eff * kl);
  return p;
}

TEST(Adaptive, ClassOfExamples) {
  const ClassParams p = two_level_classes();
  EXPECT_EQ(class_of(1500, 1, p), 1);  // (1000, 2000]
  EXPECT_EQ(class_of(2000, 1, p), 1);  // the large threshold itself
  EXPECT_EQ(class_of(1000, 1, p), 2);
  EXPECT_EQ(class_of(600, 1, p), 2);
  EXPECT_EQ(class_of(10.5, 1, p), p.N);  // just above mu
  EXPECT_THROW(class_of(2001, 1, p), InputError);
  EXPECT_THROW(class_of(9, 1, p), InputError);
}

TEST(Adaptive, ClassOfMatchesIntervalOracle) {
  const ClassParams p = two_level_classes();
  for (double size = p.mu; size <= p.large[1]; size += 0.5) {
    const double T = 20.0 * p.L_eff * p.k_l[1];
    int q = 1;
    while (!(size > T / std::ldexp(1.0, q + 1) && size <= T / std::ldexp(1.0, q))) ++q;
    EXPECT_EQ(class_of(size, 1, p), std::min(q, p.N)) << size;
  }
}

TEST(Adaptive, ParamsAndSchemeShapes) {
  const ClassParams p = class_params(1 << 12, 64, 1.0);
  EXPECT_GE(p.N, 1);
  EXPECT_EQ(p.L_eff, std::max(p.L, 1));
  EXPECT_DOUBLE_EQ(p.mu, p.b[0]);
  EXPECT_DOUBLE_EQ(p.eta_cell, p.eta / (p.N * (p.L + 1)));
  const LayerScheme s = adaptive_scheme(p);
  EXPECT_EQ(s.beta.size(), static_cast<std::size_t>((p.L + 1) * p.N));
  // Entering a class, beta s_q = b_l bounds the energy term.
  for (int l = 0; l <= p.L; ++l)
    for (int q = 1; q <= p.N; ++q) EXPECT_NEAR(s.beta_at(l, q) * p.class_cap(l, q), p.b[l], 1e-9);
}

TEST(Adaptive, BruteForceSandwich) {
  const InstanceMatrix a = gen_sparse_signs(16, 16, 3, 79);
  const double opt = testing::brute_force_disc(a);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RunReport rep = run_adaptive(a, 3, seed, fidelity(0.05));
    EXPECT_GE(rep.disc_max, opt);
    EXPECT_LE(rep.disc_max, 5.0);
    EXPECT_LE(rep.extras.at("telescoping_error")[0], 1e-9);
    EXPECT_EQ(testing::walk_invariant_failures(rep, 16, 0.05), "");
  }
}

// ---- baselines

TEST(RandomColoring, ReproducibleAndCentered) {
  EXPECT_EQ(random_coloring(50, 3), random_coloring(50, 3));
  EXPECT_NE(random_coloring(50, 3), random_coloring(50, 4));
  const InstanceMatrix a = gen_sparse_signs(64, 32, 4, 1);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(32);
  const int runs = 4000;
  for (int s = 0; s < runs; ++s) mean += disc_eval(a, random_coloring(64, s)).per_row;
  mean /= runs;
  // A row sum's variance is its size: 8 on average here, 16 is generous.
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 5.0 * std::sqrt(16.0 / runs));
}

TEST(IterativeRounding, BoundHoldsOnRandomInstances) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    const int m = 4 + static_cast<int>(rng() % 40);
    const int n = 4 + static_cast<int>(rng() % 60);
    const InstanceMatrix a = testing::random_sign_instance(rng, m, n, std::min(k, m));
    const Coloring x = iterative_rounding_bf(a, std::min(k, m));
    ASSERT_TRUE(is_full_coloring(x));
    EXPECT_LE(disc_eval(a, x).max_abs, 2.0 * std::min(k, m) - 1.0) << trial;
  }
}

TEST(IterativeRounding, KOneAndBruteForceFloor) {
  const InstanceMatrix id = identity(10, InstanceKind::SignMatrix);
  EXPECT_LE(disc_eval(id, iterative_rounding_bf(id, 1)).max_abs, 1.0);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    const InstanceMatrix a = testing::random_sign_instance(rng, 8, 12, 2);
    const double d = disc_eval(a, iterative_rounding_bf(a, 2)).max_abs;
    EXPECT_GE(d, testing::brute_force_disc(a));
    EXPECT_LE(d, 3.0);
  }
}

TEST(Banaszczyk, IdentityHasDiscOne) {
  const RunReport rep = banaszczyk_walk(identity(16, InstanceKind::UnitColumns), 3, fidelity(0.05));
  EXPECT_DOUBLE_EQ(rep.disc_max, 1.0);
}

TEST(Banaszczyk, LargeRowsAtMostQuarterOfAlive) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const InstanceMatrix a = gen_unit_columns(48, 12, ColumnProfile::GaussianNormalized, seed);
    const RunReport rep = banaszczyk_walk(a, seed, fidelity(0.05));
    EXPECT_LE(rep.extras.at("max_large_fraction")[0], 0.25 + 1e-12);
    EXPECT_EQ(testing::walk_invariant_failures(rep, 48, 0.05), "");
    EXPECT_FALSE(rep.failed());
  }
}

TEST(Banaszczyk, SignInstancesAreScaledDown) {
  const InstanceMatrix a = gen_sparse_signs(32, 32, 4, 2);
  const RunReport rep = banaszczyk_walk(a, 1, fidelity(0.05));
  EXPECT_DOUBLE_EQ(rep.params.at("column_scale"), 0.5);
  EXPECT_DOUBLE_EQ(rep.disc_max, disc_eval(a, rep.coloring).max_abs);
  EXPECT_EQ(rep.disc_max, std::round(rep.disc_max));
}

TEST(Banaszczyk, WithinThreeTimesKomlos) {
  double ban = 0, kom = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const InstanceMatrix a = gen_unit_columns(64, 64, ColumnProfile::GaussianNormalized, 100 + seed);
    WalkOptions opt;
    opt.dt = 0.5;
    ban += banaszczyk_walk(a, seed, opt).disc_max;
    kom += run_komlos(a, seed, opt).disc_max;
  }
  EXPECT_TRUE(std::isfinite(ban));
  EXPECT_LE(ban, 3.0 * kom);
  EXPECT_LE(kom, 3.0 * ban);
}

// ---- every walk algorithm through the dispatcher

TEST(AllWalks, InvariantsInFidelityMode) {
  for (const char* algo : {"banaszczyk", "bf-basic", "komlos", "multilayer", "adaptive"}) {
    const bool unit = std::string(algo) == "komlos";
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const InstanceMatrix a = unit ? gen_unit_columns(40, 40, ColumnProfile::DyadicMixture, seed)
                                    : gen_sparse_signs(40, 40, 4, seed);
      AlgoConfig cfg;
      cfg.walk = fidelity(0.05);
      cfg.walk.check_spectral_independence = true;
      const RunReport rep = run_algorithm(algo, a, cfg, seed);
      EXPECT_EQ(testing::walk_invariant_failures(rep, 40, 0.05), "") << algo << " seed " << seed;
      EXPECT_LE(rep.diagnostics.max_si_excess, 1e-6) << algo;
    }
  }
}

}  // namespace
}  // namespace disc
