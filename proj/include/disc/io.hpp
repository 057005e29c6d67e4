#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "disc/analysis.hpp"
#include "disc/core.hpp"
#include "disc/report.hpp"
#include "disc/sdp.hpp"
#include "disc/walk.hpp"

namespace disc {

inline constexpr const char* kToolVersion = "0.1.0";

/// "signs", "unit", "general".
std::string kind_token(InstanceKind kind);
InstanceKind parse_kind_token(const std::string& s);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Text format: `disc-instance v1 <m> <n> <kind>` then `i j value` per entry,
/// sorted by (j, i). Reading reports malformed lines with their line number.
void write_instance(std::ostream& out, const InstanceMatrix& a);
InstanceMatrix read_instance(std::istream& in);
void save_instance(const std::string& path, const InstanceMatrix& a);
InstanceMatrix load_instance(const std::string& path);

/// FNV-1a 64 of the canonical text form, as 16 hex digits.
std::string instance_hash(const InstanceMatrix& a);

/// Checks that disc_max (and disc_per_row when present) match disc_eval of
/// the coloring; throws InputError otherwise.
void self_check(const InstanceMatrix& a, const RunReport& rep);

nlohmann::json report_to_json(const RunReport& rep, const std::string& instance_hash);
/// Parses a report. With `a`, re-evaluates the coloring and rejects a
/// report whose stored discrepancy disagrees; without it, checks disc_max
/// against the stored per-row values when present.
RunReport report_from_json(const nlohmann::json& j, const InstanceMatrix* a = nullptr);

/// Binary trace: "DTRC", u32 version, then per step: u64 step, f64 dt,
/// u32 count, count x (u32 index, f64 dz), u32 count, count x (u32 index, i32 status).
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void write(const TraceRecord& rec);
  TraceSink sink();

 private:
  std::ostream& out_;
};

ProcessTrace read_trace(std::istream& in);
ProcessTrace load_trace(const std::string& path);

/// SDP spec as JSON: {h, kappa, eta, W: [[h values]...], blocks: [{E: [[...]], eta, scale_by_rows}], U?}.
SdpSpec sdp_spec_from_json(const nlohmann::json& j);
nlohmann::json residuals_to_json(const ResidualReport& r, int h, double tol);

}  // namespace disc
