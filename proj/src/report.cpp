#include "gfl/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "gfl/config.hpp"
#include "gfl/errors.hpp"

namespace gfl {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

std::string format_hash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_csv_preamble(std::ostream& out, const nlohmann::json& config) {
  out << "# " << kVersion << "\n# config: " << config.dump() << "\n";
}

void write_metrics_header(std::ostream& out) {
  out << "seed,round,client,accuracy,loss,aggregator\n";
}

void write_metrics_rows(std::ostream& out, const RunReport& report, const std::string& aggregator) {
  for (const auto& run : report.runs) {
    for (const auto& r : run.records) {
      out << run.seed << ',' << r.round << ',' << r.client << ',' << format_number(r.accuracy) << ','
          << format_number(r.loss) << ',' << aggregator << '\n';
    }
  }
}

nlohmann::json report_to_json(const RunReport& report, const std::string& aggregator) {
  auto num = [](double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); };
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : report.runs) {
    nlohmann::json curve = nlohmann::json::array();
    for (double a : run.mean_accuracy) curve.push_back(num(a));
    runs.push_back({{"seed", run.seed},
                    {"failed", run.failed},
                    {"error", run.error},
                    {"final_accuracy", num(run.final_accuracy())},
                    {"mean_accuracy_per_round", curve},
                    {"partition_hash", format_hash(run.partition_hash)},
                    {"init_hash", format_hash(run.init_hash)},
                    {"channel_hash", format_hash(run.channel_hash)},
                    {"solver_warnings", run.solver_warnings}});
  }
  return {{"aggregator", aggregator},
          {"final_mean_accuracy", num(report.final_mean)},
          {"final_std_accuracy", num(report.final_std)},
          {"failures", report.failures},
          {"runs", runs}};
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace gfl
