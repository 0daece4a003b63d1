// fleetmon command line: simulate, analyze, baseline, report.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "fleetmon/error.hpp"
#include "fleetmon/fleetsim.hpp"
#include "fleetmon/pipeline.hpp"
#include "fleetmon/report.hpp"

namespace fs = std::filesystem;
using fleetmon::Error;
using fleetmon::ErrorCode;
using Json = nlohmann::json;

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;

constexpr const char* kCsvName = "fleet.csv";
constexpr const char* kSidecarName = "scenario.json";

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "config '" + path + "': " + e.what());
  }
}

Json section(const Json& config, const char* key) {
  return config.contains(key) ? config.at(key) : Json::object();
}

fs::path csv_path(const fs::path& data) { return fs::is_directory(data) ? data / kCsvName : data; }

std::optional<fleetmon::GroundTruth> load_truth(const fs::path& data, const std::string& truth_path) {
  fs::path p = truth_path;
  if (p.empty()) {
    p = (fs::is_directory(data) ? data : data.parent_path()) / kSidecarName;
    if (!fs::exists(p)) return std::nullopt;
  }
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + p.string() + "'");
  try {
    const Json j = Json::parse(in);
    return fleetmon::truth_from_json(j.contains("ground_truth") ? j.at("ground_truth") : j);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

struct VariantFlags {
  std::string variant;
  std::optional<double> thr_cc;
  std::optional<double> thr_ad;
  std::optional<int> debounce_n;
};

void add_variant_flags(CLI::App* cmd, VariantFlags& f) {
  cmd->add_option("--variant", f.variant, "waveform | harmonic | spectrogram | vibration_features");
  cmd->add_option("--thr-cc", f.thr_cc, "cophenetic correlation threshold");
  cmd->add_option("--thr-ad", f.thr_ad, "anomaly score threshold");
  cmd->add_option("--debounce", f.debounce_n, "consecutive anomalous windows before a fault");
}

fleetmon::VariantConfig variant_config(const Json& config, const VariantFlags& f) {
  Json j = section(config, "variant");
  if (!f.variant.empty()) j["variant"] = f.variant;
  if (f.thr_cc) j["thr_cc"] = *f.thr_cc;
  if (f.thr_ad) j["thr_ad"] = *f.thr_ad;
  if (f.debounce_n) j["debounce_n"] = *f.debounce_n;
  return fleetmon::variant_config_from_json(j);
}

std::string scenario_label(const fleetmon::RunResult& r) { return to_string(r.config.variant); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleet-based condition monitoring by hierarchical clustering of machines"};
  app.require_subcommand(1);
  std::string config_path;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic fleet");
  std::string sim_out = "data";
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> sim_rpm;
  simulate->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--seed", sim_seed, "random seed");
  simulate->add_option("--rpm", sim_rpm, "stationary speed");

  auto* analyze = app.add_subcommand("analyze", "run a framework variant over a recording");
  std::string data_path = "data";
  std::string truth_path;
  std::string out_dir = "results";
  bool with_structures = false;
  VariantFlags vflags;
  analyze->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  analyze->add_option("--data", data_path, "CSV file or simulate output directory");
  analyze->add_option("--truth", truth_path, "ground truth JSON (default: scenario.json next to the data)");
  analyze->add_option("--out", out_dir, "output directory");
  analyze->add_flag("--matrices", with_structures, "include matrices, dendrograms and partitions");
  add_variant_flags(analyze, vflags);

  auto* baseline = app.add_subcommand("baseline", "run the sigma-band baseline");
  std::vector<double> sigma_grid;
  baseline->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  baseline->add_option("--data", data_path, "CSV file or simulate output directory");
  baseline->add_option("--truth", truth_path, "ground truth JSON");
  baseline->add_option("--out", out_dir, "output directory");
  baseline->add_option("--sigma-grid", sigma_grid, "sigma values")->delimiter(',');

  auto* report = app.add_subcommand("report", "render the five-panel figure of one window");
  std::size_t window = 0;
  std::string report_out = "report.svg";
  report->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  report->add_option("--data", data_path, "CSV file or simulate output directory");
  report->add_option("--window", window, "window index")->required();
  report->add_option("--out", report_out, "SVG path; the numbers go next to it as .json");
  add_variant_flags(report, vflags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  spdlog::set_level(quiet ? spdlog::level::err : spdlog::level::warn);

  try {
    const Json config = load_config(config_path);

    if (*simulate) {
      Json j = section(config, "scenario");
      if (sim_seed) j["seed"] = *sim_seed;
      if (sim_rpm) j["speed"] = {{"type", "stationary"}, {"rpm", *sim_rpm}};
      const auto scenario = fleetmon::scenario_from_json(j);
      const auto [recording, truth] = fleetmon::generate(scenario);
      fs::create_directories(sim_out);
      fleetmon::export_csv(recording, fs::path(sim_out) / kCsvName);
      fleetmon::write_sidecar(scenario, truth, fs::path(sim_out) / kSidecarName);
      fmt::print("wrote {} machines x {} samples to {}\n", recording.machine_ids.size(), recording.length(),
                 (fs::path(sim_out) / kCsvName).string());
    } else if (*analyze) {
      const auto vc = variant_config(config, vflags);
      const auto recording = fleetmon::ingest_csv(csv_path(data_path));
      const auto truth = load_truth(data_path, truth_path);
      const auto result = fleetmon::run_variant(recording, vc, truth);
      const fs::path out = fs::path(out_dir) / (to_string(vc.variant) + ".json");
      write_json(out, fleetmon::to_json(result, with_structures));
      if (result.metrics) {
        fmt::print("thr_cc {:g}: precision {:.3f} recall {:.3f} F1 {:.3f}\n", vc.thr_cc, result.metrics->precision,
                   result.metrics->recall, result.metrics->f1);
        fmt::print("{}", result.thr_cc_sweep->render(scenario_label(result)));
      }
      fmt::print("wrote {}\n", out.string());
    } else if (*baseline) {
      Json j = section(config, "baseline");
      if (!sigma_grid.empty()) j["sigma_grid"] = sigma_grid;
      const auto bc = fleetmon::baseline_config_from_json(j);
      const auto recording = fleetmon::ingest_csv(csv_path(data_path));
      const auto truth = load_truth(data_path, truth_path);
      if (!truth) throw Error(ErrorCode::InvalidConfig, "the baseline needs ground truth (--truth)");
      const auto result = fleetmon::run_baseline(recording, bc, *truth);
      const fs::path out = fs::path(out_dir) / "baseline.json";
      write_json(out, fleetmon::to_json(result));
      fmt::print("{}", result.table.render("baseline"));
      fmt::print("wrote {}\n", out.string());
    } else if (*report) {
      const auto vc = variant_config(config, vflags);
      const auto recording = fleetmon::ingest_csv(csv_path(data_path));
      const auto result = fleetmon::run_variant(recording, vc, std::nullopt, {.retain_signals = true});
      fs::path svg = report_out;
      if (svg.has_parent_path()) fs::create_directories(svg.parent_path());
      fs::path json = svg;
      json.replace_extension(".json");
      fleetmon::emit_report(result, window, svg, json);
      fmt::print("wrote {} and {}\n", svg.string(), json.string());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig ? kConfigError : kDataError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
