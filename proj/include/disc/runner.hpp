#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "disc/core.hpp"
#include "disc/report.hpp"
#include "disc/walk.hpp"

namespace disc {

/// Knobs shared by every algorithm. k = 0 means the column sparsity of the
/// instance.
struct AlgoConfig {
  int k = 0;
  double C_b = 4.0;          ///< bf-basic and komlos
  double C = 4.0;            ///< multilayer
  double C_adaptive = 4.0;   ///< adaptive
  WalkOptions walk;
};

/// Algorithm names accepted by run_algorithm.
const std::vector<std::string>& algorithm_names();

/// banaszczyk | bf-basic | komlos | multilayer | adaptive | random | iter-round.
RunReport run_algorithm(const std::string& algo, const InstanceMatrix& a, const AlgoConfig& cfg, std::uint64_t seed,
                        const TraceSink* trace = nullptr);

struct InstanceSpec {
  std::string kind = "sparse-signs";  ///< sparse-signs | unit-columns | adversarial
  int n = 64;
  int m = 64;
  int k = 4;
  std::string variant;  ///< column profile or adversarial kind
  std::uint64_t seed = 0;
};

InstanceMatrix generate(const InstanceSpec& s);

struct BenchRow {
  InstanceSpec instance;
  std::string algo;
  std::uint64_t seed = 0;
  double disc = 0.0;
  bool fail = false;
  long steps = 0;
  double wallclock_ms = 0.0;
  std::string error;  ///< non-empty when the run threw
};

struct BenchSuite {
  std::vector<InstanceSpec> instances;
  std::vector<std::string> algos;
  std::vector<std::uint64_t> seeds;
  AlgoConfig config;
};

/// {"instances":[{kind,n,m,k,variant?,seed}], "algos":[...], "seeds":[...],
///  "config":{dt, mode, resolve_every, C_b, C, C_adaptive}}.
BenchSuite parse_suite(const nlohmann::json& j);

/// Worker count: DISC_THREADS when set (>= 1), else hardware concurrency.
int bench_threads();

/// Runs instances x algos x seeds across workers; rows come back in suite order.
std::vector<BenchRow> run_bench(const BenchSuite& suite, int threads);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace disc
