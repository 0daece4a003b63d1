#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "fleetmon/pipeline.hpp"

namespace fleetmon {

struct ReportFiles {
  std::filesystem::path svg;
  std::filesystem::path json;
};

/// Numbers behind the figure of one window: member signals, matrix,
/// dendrogram, partition, scores and verdicts. Throws InvalidArgument when
/// the window does not exist or was skipped.
nlohmann::json report_data(const RunResult& result, std::size_t window_index);

/// Five-panel SVG (signals, dissimilarity heatmap, dendrogram, partition,
/// anomaly scores with the thr_ad line).
std::string render_report_svg(const RunResult& result, std::size_t window_index);

/// Writes window_<k>.svg and window_<k>.json into out_dir. Throws IoError.
ReportFiles emit_report(const RunResult& result, std::size_t window_index, const std::filesystem::path& out_dir);

/// Same, to explicit file names.
ReportFiles emit_report(const RunResult& result, std::size_t window_index, const std::filesystem::path& svg_path,
                        const std::filesystem::path& json_path);

}  // namespace fleetmon
