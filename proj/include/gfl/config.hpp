#pragma once

// JSON experiment files. Unknown keys are rejected; missing keys take the
// defaults of FLConfig. The effective (fully expanded) document is written
// next to every artifact.

#include <string>
#include <vector>

#include "json.hpp"

#include "gfl/simulation.hpp"

namespace gfl {

inline constexpr const char* kVersion = "gfl 0.1.0";

struct ExperimentFile {
  FLConfig fl;
  std::vector<Aggregator> aggregators;  // compare
  std::vector<double> noise_levels;     // compare; empty means {fl.noise_scale}
  std::vector<double> missing_rates;    // sweep-missing; empty means 0.00, 0.01, ..., 0.10
  std::string out_dir;                  // empty means unset
};

/// Throws ConfigError naming the offending key.
ExperimentFile experiment_from_json(const nlohmann::json& doc);
nlohmann::json experiment_to_json(const ExperimentFile& e);

/// Reads and parses a file. Throws IoError / ConfigError.
nlohmann::json read_json_file(const std::string& path);

/// Applies "a.b.c=value" to a document. The value is parsed as JSON when
/// possible and taken as a string otherwise. Throws ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace gfl
