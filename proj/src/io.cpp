#include "disc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "disc/error.hpp"

namespace disc {

using nlohmann::json;

std::string kind_token(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::SignMatrix: return "signs";
    case InstanceKind::UnitColumns: return "unit";
    case InstanceKind::General: return "general";
  }
  return "general";
}

InstanceKind parse_kind_token(const std::string& s) {
  if (s == "signs") return InstanceKind::SignMatrix;
  if (s == "unit") return InstanceKind::UnitColumns;
  if (s == "general") return InstanceKind::General;
  throw InputError("unknown instance kind '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_instance(std::ostream& out, const InstanceMatrix& a) {
  out << "disc-instance v1 " << a.rows() << ' ' << a.cols() << ' ' << kind_token(a.kind()) << '\n';
  for (int j = 0; j < a.cols(); ++j) {
    for (const auto& ce : a.col(j)) out << ce.row << ' ' << j << ' ' << format_double(ce.value) << '\n';
  }
}

namespace {

[[noreturn]] void bad_line(long line, const std::string& what) {
  std::ostringstream os;
  os << "line " << line << ": " << what;
  throw InputError(os.str());
}

template <typename T>
bool parse_number(const std::string& tok, T& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

InstanceMatrix read_instance(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) bad_line(1, "missing header");
  ++lineno;
  const auto head = split_ws(line);
  int m = 0, n = 0;
  if (head.size() != 5 || head[0] != "disc-instance" || head[1] != "v1" || !parse_number(head[2], m) ||
      !parse_number(head[3], n) || m < 0 || n < 0) {
    bad_line(lineno, "expected 'disc-instance v1 <m> <n> <kind>'");
  }
  InstanceKind kind;
  try {
    kind = parse_kind_token(head[4]);
  } catch (const InputError& e) {
    bad_line(lineno, e.what());
  }
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    Entry e;
    if (tok.size() != 3 || !parse_number(tok[0], e.row) || !parse_number(tok[1], e.col) ||
        !parse_number(tok[2], e.value)) {
      bad_line(lineno, "expected 'i j value'");
    }
    if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n) bad_line(lineno, "index out of range");
    if (!std::isfinite(e.value)) bad_line(lineno, "non-finite value");
    entries.push_back(e);
  }
  try {
    return InstanceMatrix(m, n, std::move(entries), kind);
  } catch (const InputError& e) {
    throw InputError(std::string("instance rejected: ") + e.what());
  }
}

void save_instance(const std::string& path, const InstanceMatrix& a) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  write_instance(out, a);
}

InstanceMatrix load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  return read_instance(in);
}

std::string instance_hash(const InstanceMatrix& a) {
  std::ostringstream os;
  write_instance(os, a);
  const std::string s = os.str();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

void self_check(const InstanceMatrix& a, const RunReport& rep) {
  if (rep.coloring.size() != a.cols()) throw InputError("report coloring does not match the instance");
  if (!is_full_coloring(rep.coloring)) throw InputError("report coloring is not a full coloring");
  const auto d = disc_eval(a, rep.coloring);
  if (std::abs(d.max_abs - rep.disc_max) > 1e-9 * std::max(1.0, d.max_abs)) {
    std::ostringstream os;
    os << "report disc_max " << rep.disc_max << " disagrees with the coloring (" << d.max_abs << ")";
    throw InputError(os.str());
  }
  if (rep.disc_per_row.size() > 0) {
    if (rep.disc_per_row.size() != d.per_row.size() || (rep.disc_per_row - d.per_row).cwiseAbs().maxCoeff() > 1e-9) {
      throw InputError("report disc_per_row disagrees with the coloring");
    }
  }
}

json report_to_json(const RunReport& rep, const std::string& hash) {
  json j;
  j["instance_hash"] = hash;
  j["algo"] = rep.algo;
  j["params"] = rep.params;
  j["seed"] = rep.seed;
  j["dt"] = rep.dt;
  j["mode"] = rep.mode;
  j["disc_max"] = rep.disc_max;
  if (rep.include_per_row) j["disc_per_row"] = std::vector<double>(rep.disc_per_row.begin(), rep.disc_per_row.end());
  std::vector<int> col(static_cast<std::size_t>(rep.coloring.size()));
  for (Eigen::Index i = 0; i < rep.coloring.size(); ++i) col[static_cast<std::size_t>(i)] = rep.coloring(i) < 0 ? -1 : 1;
  j["coloring"] = col;
  j["fail_events"] = json::array();
  for (const auto& f : rep.fail_events) j["fail_events"].push_back({{"step", f.step}, {"dimW", f.dim_w}, {"n_t", f.n_alive}});
  j["steps"] = rep.steps;
  j["resolves"] = rep.resolves;
  j["wallclock_ms"] = rep.wallclock_ms;
  j["freeze_count"] = rep.freeze_count;
  j["final_time"] = rep.final_time;
  const auto& d = rep.diagnostics;
  j["diagnostics"] = {{"max_flat_drift", d.max_flat_drift},
                      {"max_energy_increase", d.max_energy_increase},
                      {"max_norm_gap", d.max_norm_gap},
                      {"frozen_violations", d.frozen_violations},
                      {"truncated_steps", d.truncated_steps},
                      {"si_checks", d.si_checks},
                      {"forced_resolves", d.forced_resolves},
                      {"unit_norm_violations", d.unit_norm_violations}};
  if (d.si_checks > 0) j["diagnostics"]["max_si_excess"] = d.max_si_excess;
  json extras = json::object();
  for (const auto& [k, v] : rep.extras) {
    json arr = json::array();
    for (double x : v) arr.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    extras[k] = arr;
  }
  j["extras"] = extras;
  j["tool_version"] = kToolVersion;
  return j;
}

RunReport report_from_json(const json& j, const InstanceMatrix* a) {
  RunReport rep;
  try {
    rep.algo = j.at("algo").get<std::string>();
    rep.params = j.value("params", std::map<std::string, double>{});
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.dt = j.value("dt", 0.0);
    rep.mode = j.value("mode", std::string());
    rep.disc_max = j.at("disc_max").get<double>();
    if (j.contains("disc_per_row")) {
      const auto v = j["disc_per_row"].get<std::vector<double>>();
      rep.disc_per_row = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      rep.include_per_row = true;
    }
    if (j.contains("coloring")) {
      const auto c = j["coloring"].get<std::vector<int>>();
      rep.coloring.resize(static_cast<Eigen::Index>(c.size()));
      for (std::size_t i = 0; i < c.size(); ++i) rep.coloring(static_cast<Eigen::Index>(i)) = c[i];
    }
    for (const auto& f : j.value("fail_events", json::array())) {
      rep.fail_events.push_back({f.at("step").get<long>(), f.at("dimW").get<int>(), f.at("n_t").get<int>()});
    }
    rep.steps = j.value("steps", 0L);
    rep.resolves = j.value("resolves", 0L);
    rep.wallclock_ms = j.value("wallclock_ms", 0.0);
    rep.freeze_count = j.value("freeze_count", 0L);
    rep.final_time = j.value("final_time", 0.0);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
  if (a) {
    self_check(*a, rep);
  } else if (rep.disc_per_row.size() > 0) {
    if (std::abs(rep.disc_per_row.cwiseAbs().maxCoeff() - rep.disc_max) > 1e-9 * std::max(1.0, rep.disc_max)) {
      throw InputError("report disc_max disagrees with disc_per_row");
    }
  }
  return rep;
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("truncated trace");
  return v;
}

constexpr std::uint32_t kTraceVersion = 1;

}  // namespace

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {
  out_.write("DTRC", 4);
  put<std::uint32_t>(out_, kTraceVersion);
}

void TraceWriter::write(const TraceRecord& rec) {
  put<std::uint64_t>(out_, static_cast<std::uint64_t>(rec.step));
  put<double>(out_, rec.dt);
  put<std::uint32_t>(out_, static_cast<std::uint32_t>(rec.dz.size()));
  for (const auto& [i, v] : rec.dz) {
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(i));
    put<double>(out_, v);
  }
  put<std::uint32_t>(out_, static_cast<std::uint32_t>(rec.status.size()));
  for (const auto& [i, s] : rec.status) {
    put<std::uint32_t>(out_, static_cast<std::uint32_t>(i));
    put<std::int32_t>(out_, s);
  }
}

TraceSink TraceWriter::sink() {
  return [this](const TraceRecord& rec) { write(rec); };
}

ProcessTrace read_trace(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DTRC", 4) != 0) throw InputError("not a trace file (bad magic)");
  if (get<std::uint32_t>(in) != kTraceVersion) throw InputError("unsupported trace version");
  ProcessTrace tr;
  while (in.peek() != std::char_traits<char>::eof()) {
    get<std::uint64_t>(in);
    const double dt = get<double>(in);
    const auto nd = get<std::uint32_t>(in);
    std::vector<std::pair<int, double>> dz;
    dz.reserve(nd);
    for (std::uint32_t k = 0; k < nd; ++k) {
      const auto i = get<std::uint32_t>(in);
      dz.emplace_back(static_cast<int>(i), get<double>(in));
    }
    const auto ns = get<std::uint32_t>(in);
    for (std::uint32_t k = 0; k < ns; ++k) {
      get<std::uint32_t>(in);
      get<std::int32_t>(in);
    }
    tr.push(dt, std::move(dz));
  }
  return tr;
}

ProcessTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return read_trace(in);
}

namespace {

Eigen::MatrixXd rows_matrix(const json& rows, int cols, const char* what) {
  if (!rows.is_array()) throw InputError(std::string(what) + " must be an array of rows");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto v = rows[r].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != cols) throw InputError(std::string(what) + " row has the wrong length");
    for (int c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), c) = v[static_cast<std::size_t>(c)];
  }
  return M;
}

}  // namespace

SdpSpec sdp_spec_from_json(const json& j) {
  try {
    const int h = j.at("h").get<int>();
    if (h < 1) throw InputError("h must be positive");
    const Eigen::MatrixXd Wrows = rows_matrix(j.value("W", json::array()), h, "W");
    std::vector<BlockInput> blocks;
    for (const auto& b : j.value("blocks", json::array())) {
      const Eigen::MatrixXd E = rows_matrix(b.at("E"), h, "E");
      blocks.push_back({E.sparseView(), b.value("eta", 0.25), b.value("scale_by_rows", true)});
    }
    return build_spec(h, Wrows.transpose(), std::move(blocks), j.value("kappa", 0.25), j.value("eta", 0.25));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed SDP spec: ") + e.what());
  }
}

json residuals_to_json(const ResidualReport& r, int h, double tol) {
  json j = {{"diag_excess", r.diag_excess},
            {"trace_deficit", r.trace_deficit},
            {"subspace", r.subspace},
            {"psd_violation", r.psd_violation},
            {"spectral_violation", r.spectral_violation},
            {"spectral_ratio", r.spectral_ratio},
            {"trace", r.trace},
            {"worst", r.worst(h)},
            {"tol", tol},
            {"pass", r.passes(h, tol)}};
  j["blocks"] = json::array();
  for (const auto& b : r.blocks) j["blocks"].push_back({{"violation", b.violation}, {"ratio", b.ratio}});
  return j;
}

}  // namespace disc
