#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gfl/config.hpp"
#include "gfl/errors.hpp"
#include "gfl/report.hpp"
#include "gfl/simulation.hpp"

namespace gfl::cli {
namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

struct Loaded {
  ExperimentFile exp;
  json effective;
  std::filesystem::path out;
};

Loaded load(const Options& o) {
  json doc;
  try {
    doc = read_json_file(o.config_path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& ov : o.overrides) apply_override(doc, ov);
  Loaded l;
  l.exp = experiment_from_json(doc);
  if (o.seed) l.exp.fl.seeds = {*o.seed};
  std::string dir = o.out_dir;
  if (dir.empty()) dir = l.exp.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("GFL_OUT_DIR");
    dir = env && *env ? env : "gfl_out";
  }
  l.exp.out_dir = dir;
  l.out = dir;
  // The output location is not part of the experiment; leaving it out keeps
  // artifacts of identical runs byte-identical wherever they are written.
  l.effective = experiment_to_json(l.exp);
  l.effective.erase("out_dir");
  return l;
}

void write_json(const std::filesystem::path& p, const json& j) { write_file(p.string(), j.dump(2) + "\n"); }

json with_header(const json& effective, json body) {
  body["version"] = kVersion;
  body["config"] = effective;
  return body;
}

int cmd_run(const Options& o) {
  const Loaded l = load(o);
  write_json(l.out / "effective_config.json", with_header(l.effective, json::object()));
  const std::string agg = to_string(l.exp.fl.server.aggregator);
  const RunReport rep = run_experiment(l.exp.fl);

  std::ostringstream csv;
  write_csv_preamble(csv, l.effective);
  write_metrics_header(csv);
  write_metrics_rows(csv, rep, agg);
  write_file((l.out / "metrics.csv").string(), csv.str());
  write_json(l.out / "report.json", with_header(l.effective, report_to_json(rep, agg)));

  std::cout << agg << ": final accuracy " << format_number(rep.final_mean) << " +- "
            << format_number(rep.final_std) << " over " << rep.runs.size() - rep.failures
            << " seed(s)\n";
  for (const auto& r : rep.runs) {
    if (r.failed) std::cerr << "seed " << r.seed << " failed: " << r.error << "\n";
  }
  return rep.failures == 0 ? kOk : kRuntimeError;
}

int cmd_compare(const Options& o) {
  const Loaded l = load(o);
  if (l.exp.aggregators.size() < 2) throw ConfigError("compare needs at least two aggregators");
  std::vector<double> levels = l.exp.noise_levels;
  if (levels.empty()) levels.push_back(l.exp.fl.noise_scale);
  write_json(l.out / "effective_config.json", with_header(l.effective, json::object()));

  std::ostringstream table;
  write_csv_preamble(table, l.effective);
  table << "aggregator,noise_scale,mean_accuracy,std_accuracy,failures\n";
  std::ostringstream metrics;
  write_csv_preamble(metrics, l.effective);
  metrics << "noise_scale,";
  write_metrics_header(metrics);

  json cells = json::array();
  bool shared = true;
  std::size_t failures = 0;
  for (double s : levels) {
    FLConfig fl = l.exp.fl;
    fl.noise_scale = s;
    // Draw fingerprints per seed from the first aggregator, to compare against.
    std::vector<std::string> reference;
    for (std::size_t ai = 0; ai < l.exp.aggregators.size(); ++ai) {
      fl.server.aggregator = l.exp.aggregators[ai];
      const std::string agg = to_string(fl.server.aggregator);
      const RunReport rep = run_experiment(fl);
      failures += rep.failures;
      table << agg << ',' << format_number(s) << ',' << format_number(rep.final_mean) << ','
            << format_number(rep.final_std) << ',' << rep.failures << '\n';
      std::ostringstream rows;
      write_metrics_rows(rows, rep, agg);
      std::istringstream lines(rows.str());
      for (std::string line; std::getline(lines, line);) metrics << format_number(s) << ',' << line << '\n';

      for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const auto& r = rep.runs[i];
        const std::string key = format_hash(r.partition_hash) + format_hash(r.init_hash) +
                                format_hash(r.channel_hash);
        if (ai == 0) {
          reference.push_back(key);
        } else if (!r.failed && reference[i] != key) {
          shared = false;
        }
      }
      json cell = report_to_json(rep, agg);
      cell["noise_scale"] = s;
      cells.push_back(cell);
    }
  }
  write_file((l.out / "compare.csv").string(), table.str());
  write_file((l.out / "metrics.csv").string(), metrics.str());
  write_json(l.out / "compare.json",
             with_header(l.effective, {{"shared_randomness", shared}, {"cells", cells}}));
  std::cout << table.str();
  if (!shared) {
    std::cerr << "random draws differ across aggregators\n";
    return kRuntimeError;
  }
  return failures == 0 ? kOk : kRuntimeError;
}

int cmd_sweep(const Options& o) {
  const Loaded l = load(o);
  if (l.exp.fl.server.aggregator != Aggregator::jgesr) {
    throw ConfigError("sweep-missing needs aggregator = jgesr");
  }
  std::vector<double> rates = l.exp.missing_rates;
  if (rates.empty()) {
    for (int i = 0; i <= 10; ++i) rates.push_back(i / 100.0);
  }
  write_json(l.out / "effective_config.json", with_header(l.effective, json::object()));

  std::ostringstream table;
  write_csv_preamble(table, l.effective);
  table << "missing_rate,noise_scale,mean_accuracy,std_accuracy,failures\n";
  json rows = json::array();
  std::size_t failures = 0;
  for (double m : rates) {
    FLConfig fl = l.exp.fl;
    fl.missing_rate = m;
    const RunReport rep = run_experiment(fl);
    failures += rep.failures;
    table << format_number(m) << ',' << format_number(fl.noise_scale) << ','
          << format_number(rep.final_mean) << ',' << format_number(rep.final_std) << ','
          << rep.failures << '\n';
    json cell = report_to_json(rep, "jgesr");
    cell["missing_rate"] = m;
    rows.push_back(cell);
  }
  write_file((l.out / "sweep_missing.csv").string(), table.str());
  write_json(l.out / "sweep_missing.json", with_header(l.effective, {{"rows", rows}}));
  std::cout << table.str();
  return failures == 0 ? kOk : kRuntimeError;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Graph-based federated aggregation experiments"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("config", o.config_path, "experiment JSON file")->required();
    sub->add_option("--seed", o.seed, "run a single seed instead of the configured list");
    sub->add_option("--out-dir", o.out_dir, "artifact directory (default: $GFL_OUT_DIR or gfl_out)");
    sub->add_option("--override", o.overrides, "key=value, dotted keys for nested fields");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "run one aggregator over the configured seeds");
  CLI::App* compare_cmd = app.add_subcommand("compare", "run several aggregators on identical draws");
  CLI::App* sweep_cmd = app.add_subcommand("sweep-missing", "accuracy against the missing rate");
  for (auto* s : {run_cmd, compare_cmd, sweep_cmd}) add_common(s);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(o);
    if (compare_cmd->parsed()) return cmd_compare(o);
    return cmd_sweep(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace gfl::cli
