#include "disc/runner.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "disc/adaptive.hpp"
#include "disc/baselines.hpp"
#include "disc/bf_basic.hpp"
#include "disc/error.hpp"
#include "disc/generators.hpp"
#include "disc/io.hpp"
#include "disc/komlos.hpp"
#include "disc/multilayer.hpp"

namespace disc {

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {"banaszczyk", "bf-basic", "komlos",   "multilayer",
                                                 "adaptive",   "random",   "iter-round"};
  return names;
}

RunReport run_algorithm(const std::string& algo, const InstanceMatrix& a, const AlgoConfig& cfg, std::uint64_t seed,
                        const TraceSink* trace) {
  const int k = cfg.k > 0 ? cfg.k : std::max(1, column_sparsity(a));
  if (algo == "bf-basic") return run_bf_basic(a, make_bf_params(std::max(a.cols(), 4), k, cfg.C_b), seed, cfg.walk, trace);
  if (algo == "multilayer") return run_multilayer(a, k, seed, cfg.walk, cfg.C, trace);
  if (algo == "adaptive") return run_adaptive(a, k, seed, cfg.walk, cfg.C_adaptive, trace);
  if (algo == "komlos") return run_komlos(a, seed, cfg.walk, cfg.C_b, trace);
  if (algo == "banaszczyk") return banaszczyk_walk(a, seed, cfg.walk, trace);
  if (algo == "random") return coloring_report(a, random_coloring(a.cols(), seed), "random", seed);
  if (algo == "iter-round") {
    RunReport rep = coloring_report(a, iterative_rounding_bf(a, k), "iter-round", seed);
    rep.params["k"] = k;
    return rep;
  }
  throw InputError("unknown algorithm '" + algo + "'");
}

InstanceMatrix generate(const InstanceSpec& s) {
  if (s.kind == "sparse-signs") return gen_sparse_signs(s.n, s.m, s.k, s.seed);
  if (s.kind == "unit-columns") {
    return gen_unit_columns(s.n, s.m, parse_column_profile(s.variant.empty() ? "gaussian-normalized" : s.variant), s.seed);
  }
  if (s.kind == "adversarial") {
    return gen_adversarial(parse_adversarial_kind(s.variant.empty() ? "repeated-rows" : s.variant), s.n, s.k, s.seed);
  }
  throw InputError("unknown instance kind '" + s.kind + "'");
}

BenchSuite parse_suite(const nlohmann::json& j) {
  BenchSuite s;
  try {
    for (const auto& in : j.at("instances")) {
      InstanceSpec spec;
      spec.kind = in.value("kind", spec.kind);
      spec.n = in.at("n").get<int>();
      spec.m = in.value("m", spec.n);
      spec.k = in.value("k", spec.k);
      spec.variant = in.value("variant", std::string());
      spec.seed = in.value("seed", std::uint64_t{0});
      s.instances.push_back(spec);
    }
    s.algos = j.at("algos").get<std::vector<std::string>>();
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    const auto cfg = j.value("config", nlohmann::json::object());
    s.config.walk.dt = cfg.value("dt", 0.0);
    s.config.walk.mode = parse_walk_mode(cfg.value("mode", std::string("fast")));
    s.config.walk.resolve_every = cfg.value("resolve_every", 64);
    s.config.C_b = cfg.value("C_b", 4.0);
    s.config.C = cfg.value("C", 4.0);
    s.config.C_adaptive = cfg.value("C_adaptive", 4.0);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed suite: ") + e.what());
  }
  for (const auto& a : s.algos) {
    if (std::find(algorithm_names().begin(), algorithm_names().end(), a) == algorithm_names().end()) {
      throw InputError("unknown algorithm '" + a + "' in suite");
    }
  }
  return s;
}

int bench_threads() {
  if (const char* env = std::getenv("DISC_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<BenchRow> run_bench(const BenchSuite& suite, int threads) {
  std::vector<BenchRow> rows;
  for (const auto& inst : suite.instances) {
    for (const auto& algo : suite.algos) {
      for (auto seed : suite.seeds) {
        BenchRow r;
        r.instance = inst;
        r.algo = algo;
        r.seed = seed;
        rows.push_back(std::move(r));
      }
    }
  }
  std::vector<InstanceMatrix> mats;
  for (const auto& inst : suite.instances) mats.push_back(generate(inst));
  const std::size_t per_instance = suite.algos.size() * suite.seeds.size();

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t idx = next++; idx < rows.size(); idx = next++) {
      BenchRow& r = rows[idx];
      try {
        const RunReport rep = run_algorithm(r.algo, mats[idx / per_instance], suite.config, r.seed);
        r.disc = rep.disc_max;
        r.fail = rep.failed();
        r.steps = rep.steps;
        r.wallclock_ms = rep.wallclock_ms;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "kind,n,m,k,variant,instance_seed,algo,seed,disc,fail,steps,wallclock_ms,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << r.instance.kind << ',' << r.instance.n << ',' << r.instance.m << ',' << r.instance.k << ','
       << r.instance.variant << ',' << r.instance.seed << ',' << r.algo << ',' << r.seed << ','
       << format_double(r.disc) << ',' << (r.fail ? 1 : 0) << ',' << r.steps << ',' << format_double(r.wallclock_ms)
       << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace disc
