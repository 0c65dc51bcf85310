#pragma once

// Artifact formats. CSV files start with '#' lines carrying the version
// string and the effective config; JSON reports embed both as fields.

#include <ostream>
#include <string>

#include "json.hpp"

#include "gfl/simulation.hpp"

namespace gfl {

/// "# gfl x.y.z" and "# config: {...}" lines.
void write_csv_preamble(std::ostream& out, const nlohmann::json& config);

/// Columns seed,round,client,accuracy,loss,aggregator; one row per record.
void write_metrics_rows(std::ostream& out, const RunReport& report, const std::string& aggregator);
void write_metrics_header(std::ostream& out);

nlohmann::json report_to_json(const RunReport& report, const std::string& aggregator);

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_number(double x);
std::string format_hash(std::uint64_t h);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_file(const std::string& path, const std::string& text);

}  // namespace gfl
