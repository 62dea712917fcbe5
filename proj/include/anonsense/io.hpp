#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "anonsense/config.hpp"
#include "anonsense/estimation.hpp"
#include "anonsense/fisher.hpp"
#include "anonsense/protocol.hpp"

namespace anonsense {

using Json = nlohmann::ordered_json;

/// Input that failed validation; `path` locates the offending field
/// ("protocol.q[2]") or the byte/line position of a syntax error.
class InputError : public std::runtime_error {
 public:
  InputError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Contents of a run configuration file (JSON, unknown keys rejected).
///
///   protocol: {n, m_est, t, a, q0 | q, c}
///   scenario: {sender_positions, omegas}
///   run:      {rounds, seed, backend}
///   scan:     {n, q0, theta1, theta2, a}
struct RunConfigFile {
  ProtocolConfig protocol;
  std::optional<SenderAssignment> scenario;
  std::optional<std::int64_t> rounds;
  std::uint64_t seed = 0;
  Backend backend = Backend::automatic;
  bool has_run = false;
  std::optional<ScanSpec> scan;
};

RunConfigFile parse_run_config(const Json& doc);
RunConfigFile load_run_config(const std::filesystem::path& path);
/// Parses JSON text; syntax errors become InputError with the position.
Json parse_json_text(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);

/// Normalized form: q as a full vector, c as the list of active labels.
Json to_json(const ProtocolConfig& config);
Json to_json(const RunConfigFile& file);
Json to_json(const OutcomeCounts& counts);
Json to_json(const EstimateReport& report);
Json to_json(const Transcript& transcript);
Json to_json(const TracelessnessReport& report);

/// {"counts": {"0+": 12, ...}}; also accepts a transcript document.
OutcomeCounts parse_counts(const Json& doc);

/// Axis specs: "0.5,1,2", "lin:START:STOP:COUNT" (inclusive), "pi" and
/// "pi/k" accepted as numbers.
std::vector<double> parse_axis(const std::string& spec);
/// n axes additionally accept "log:START:STOP:COUNT" (rounded, deduplicated)
/// and "inf".
std::vector<std::int64_t> parse_n_axis(const std::string& spec);

/// %.17g; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double value);

/// Header n,a,q0,theta1,theta2,j22,log10_j22,flag; one line per row.
std::string scan_csv(const std::vector<ScanRow>& rows);

}  // namespace anonsense
