#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "disc/analysis.hpp"
#include "disc/error.hpp"
#include "disc/io.hpp"
#include "disc/runner.hpp"
#include "disc/sdp.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailOutcome = 2;
constexpr int kInputError = 3;
constexpr int kInternalError = 4;

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw disc::InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw disc::InputError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw disc::InputError(path + ": " + e.what());
  }
}

json interval(const disc::Interval& i) { return json::array({i.lo, i.hi}); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrepancy minimization walks and experiments"};
  app.require_subcommand(1);

  disc::InstanceSpec gen;
  std::string gen_out;
  auto* g = app.add_subcommand("gen", "Generate an instance file");
  g->add_option("--kind", gen.kind, "sparse-signs | unit-columns | adversarial")->required();
  g->add_option("--n", gen.n, "columns")->required();
  g->add_option("--m", gen.m, "rows");
  g->add_option("--k", gen.k, "column sparsity (sparse-signs) or block size (adversarial)");
  g->add_option("--variant", gen.variant, "column profile or adversarial kind");
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen_out)->required();

  std::string algo, input, report_out, trace_out, mode = "fast";
  std::uint64_t seed = 0;
  bool per_row = false;
  disc::AlgoConfig cfg;
  auto* s = app.add_subcommand("solve", "Run one algorithm on an instance");
  s->add_option("--algo", algo)->required();
  s->add_option("--input", input)->required();
  s->add_option("--seed", seed);
  s->add_option("--dt", cfg.walk.dt, "step size (0: 1/(8n))");
  s->add_option("--mode", mode, "fidelity | fast");
  s->add_option("--resolve-every", cfg.walk.resolve_every);
  s->add_option("--k", cfg.k, "sparsity bound (0: from the instance)");
  s->add_option("--C-b", cfg.C_b);
  s->add_option("--C", cfg.C, "multilayer constant");
  s->add_option("--C-adaptive", cfg.C_adaptive);
  s->add_flag("--per-row", per_row, "include per-row discrepancies");
  s->add_option("--out", report_out);
  s->add_option("--trace", trace_out);

  std::string spec_path;
  double tol = 1e-6;
  auto* v = app.add_subcommand("verify-sdp", "Check (or solve and check) an SDP spec");
  v->add_option("--spec", spec_path)->required();
  v->add_option("--tol", tol);

  std::string suite_path, bench_out;
  auto* b = app.add_subcommand("bench", "Run a benchmark suite to CSV");
  b->add_option("--suite", suite_path)->required();
  b->add_option("--out", bench_out)->required();

  std::string trace_in, check, analyze_out;
  disc::DecouplingParams dp;
  auto* an = app.add_subcommand("analyze", "Analyze a binary trace");
  an->add_option("--trace", trace_in)->required();
  an->add_option("--check", check, "drift | decoupling | potential")->required();
  an->add_option("--out", analyze_out);
  an->add_option("--alpha", dp.alpha);
  an->add_option("--theta", dp.theta);
  an->add_option("--B", dp.B);
  an->add_option("--lambda", dp.lambda);
  an->add_option("--n", dp.n);
  an->add_option("--c-dec", dp.c_dec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*g) {
      disc::save_instance(gen_out, disc::generate(gen));
      return kOk;
    }
    if (*s) {
      cfg.walk.mode = disc::parse_walk_mode(mode);
      const disc::InstanceMatrix a = disc::load_instance(input);
      std::ofstream trace_file;
      std::unique_ptr<disc::TraceWriter> writer;
      disc::TraceSink sink;
      if (!trace_out.empty()) {
        trace_file.open(trace_out, std::ios::binary);
        if (!trace_file) throw disc::InputError("cannot write " + trace_out);
        writer = std::make_unique<disc::TraceWriter>(trace_file);
        sink = writer->sink();
      }
      disc::RunReport rep = disc::run_algorithm(algo, a, cfg, seed, sink ? &sink : nullptr);
      rep.include_per_row = per_row;
      disc::self_check(a, rep);
      write_json(report_out, disc::report_to_json(rep, disc::instance_hash(a)));
      return rep.failed() ? kFailOutcome : kOk;
    }
    if (*v) {
      const json j = read_json(spec_path);
      const disc::SdpSpec spec = disc::sdp_spec_from_json(j);
      json out;
      out["h"] = spec.h;
      out["margin"] = spec.margin;
      bool pass = false;
      if (j.contains("U")) {
        Eigen::MatrixXd U(spec.h, spec.h);
        const auto rows = j["U"].get<std::vector<std::vector<double>>>();
        if (static_cast<int>(rows.size()) != spec.h) throw disc::InputError("U has the wrong size");
        for (int r = 0; r < spec.h; ++r) {
          if (static_cast<int>(rows[r].size()) != spec.h) throw disc::InputError("U has the wrong size");
          for (int c = 0; c < spec.h; ++c) U(r, c) = rows[r][c];
        }
        const auto res = disc::verify(spec, U, tol);
        out["residuals"] = disc::residuals_to_json(res, spec.h, tol);
        pass = res.passes(spec.h, tol);
      } else {
        disc::SdpOptions opt;
        opt.tol = tol;
        const auto res = disc::solve(spec, opt);
        out["feasible"] = res.feasible;
        out["reason"] = disc::to_string(res.reason);
        if (res.feasible) {
          const auto r = disc::verify(spec, res.solution.U(), tol);
          out["stage"] = disc::to_string(res.solution.stage);
          out["residuals"] = disc::residuals_to_json(r, spec.h, tol);
          pass = r.passes(spec.h, tol);
        } else {
          out["residuals"] = disc::residuals_to_json(res.best, spec.h, tol);
        }
      }
      out["pass"] = pass;
      std::cout << out.dump(2) << '\n';
      return pass ? kOk : kFailOutcome;
    }
    if (*b) {
      const disc::BenchSuite suite = disc::parse_suite(read_json(suite_path));
      const auto rows = disc::run_bench(suite, disc::bench_threads());
      std::ofstream out(bench_out);
      if (!out) throw disc::InputError("cannot write " + bench_out);
      out << disc::bench_csv(rows);
      return kOk;
    }
    if (*an) {
      const disc::ProcessTrace tr = disc::load_trace(trace_in);
      json out;
      out["steps"] = tr.steps();
      out["m"] = tr.m;
      if (check == "drift") {
        const auto est = disc::estimate_drift(tr);
        out["alpha_hat"] = est.alpha_hat;
        out["alpha_ci"] = interval(est.alpha_ci);
        out["theta_hat"] = est.theta_hat;
        out["theta_ci"] = interval(est.theta_ci);
        out["coordinates_used"] = est.coordinates_used;
        out["excluded"] = est.excluded;
      } else if (check == "decoupling") {
        dp.m = tr.m;
        dp.validate();
        const int bad = disc::ever_bad(tr, dp.B);
        out["ever_bad"] = bad;
        out["bound"] = dp.bound();
        out["within_bound"] = bad <= dp.bound();
      } else if (check == "potential") {
        const auto pr = disc::potential_monitor(tr, dp.lambda, dp.B, dp.theta, dp.n);
        out["W_first"] = pr.W.front();
        out["W_last"] = pr.W.back();
        out["mean_dW"] = pr.mean_dW;
        out["mean_dW_ci"] = interval(pr.mean_dW_ci);
        out["mean_drift_bound"] = pr.mean_drift_bound;
      } else {
        throw disc::InputError("unknown check '" + check + "'");
      }
      write_json(analyze_out, out);
      return kOk;
    }
  } catch (const disc::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternalError;
  }
  return kOk;
}
