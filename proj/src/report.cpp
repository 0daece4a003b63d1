#include "fleetmon/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fleetmon/error.hpp"

namespace fleetmon {

namespace {

using Json = nlohmann::json;

constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#17becf",
                                    "#bcbd22", "#7f7f7f", "#e377c2", "#ff7f0e", "#aec7e8"};
constexpr const char* kFlagged = "#d62728";

struct Box {
  double x, y, w, h;
};

const WindowResult& find_window(const RunResult& result, std::size_t window_index) {
  for (const auto& w : result.windows) {
    if (w.window_index != window_index) continue;
    if (w.skipped) throw Error(ErrorCode::InvalidArgument, fmt::format("window {} was skipped", window_index));
    return w;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("no window {} in the result", window_index));
}

const char* cluster_color(int cluster) {
  return kPalette[static_cast<std::size_t>(std::max(cluster, 0)) % std::size(kPalette)];
}

// Display curve of a preprocessed signal: the waveform itself, the mean
// spectrum of a spectrogram, or the components of a feature vector.
std::vector<double> display_curve(const Series& s) {
  if (s.dim() == 1) return s.channel(0);
  if (s.size() == 1) return std::vector<double>(s.data().begin(), s.data().end());
  std::vector<double> mean(s.dim(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t d = 0; d < s.dim(); ++d) mean[d] += s.value(i, d);
  }
  for (double& v : mean) v /= static_cast<double>(s.size());
  return mean;
}

// Linear blend through a dark-to-light sequential scale.
std::string heat_color(double t) {
  static const int stops[][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const auto k = std::min(static_cast<int>(t), 3);
  const double f = t - k;
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

void panel_frame(std::string& svg, const Box& b, const std::string& title) {
  svg += fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#999"/>)", b.x, b.y, b.w, b.h);
  svg += fmt::format(R"(<text x="{}" y="{}" font-size="13" font-weight="bold">{}</text>)", b.x, b.y - 6, title);
  svg += '\n';
}

void signals_panel(std::string& svg, const Box& b, const WindowResult& w, const std::vector<int>& clusters) {
  panel_frame(svg, b, "a. preprocessed signals");
  if (w.signals.empty()) {
    svg += fmt::format(R"(<text x="{}" y="{}" font-size="12">signals not retained</text>)", b.x + 10, b.y + 20);
    return;
  }
  std::vector<std::vector<double>> curves;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& s : w.signals) {
    curves.push_back(display_curve(s));
    for (double v : curves.back()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const std::size_t stride = std::max<std::size_t>(1, c.size() / 400);
    std::string points;
    for (std::size_t k = 0; k < c.size(); k += stride) {
      const double x = b.x + b.w * (c.size() > 1 ? static_cast<double>(k) / static_cast<double>(c.size() - 1) : 0.5);
      const double y = b.y + b.h - b.h * (c[k] - lo) / span;
      points += fmt::format("{:.2f},{:.2f} ", x, y);
    }
    svg += fmt::format(R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="1" opacity="0.8"/>)", points,
                       cluster_color(clusters[i]));
    svg += '\n';
  }
}

void heatmap_panel(std::string& svg, const Box& b, const DissimilarityMatrix& m) {
  panel_frame(svg, b, "b. pairwise dissimilarities");
  const std::size_t n = m.size();
  const double top = *std::max_element(m.values().begin(), m.values().end());
  const double cell = std::min(b.w, b.h) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      svg += fmt::format(R"(<rect class="cell" x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="{}"/>)",
                         b.x + cell * j, b.y + cell * i, cell, cell, heat_color(top > 0.0 ? m.at(i, j) / top : 0.0));
    }
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="9" text-anchor="end">{}</text>)", b.x - 2,
                       b.y + cell * (i + 0.6), m.machine_ids()[i]);
    svg += '\n';
  }
  svg += fmt::format(R"(<text x="{}" y="{}" font-size="10">scale 0 .. {:.4g}</text>)", b.x, b.y + b.h + 14, top);
  svg += '\n';
}

void dendrogram_panel(std::string& svg, const Box& b, const Dendrogram& d, const std::vector<std::string>& ids) {
  panel_frame(svg, b, "c. dendrogram");
  const auto& nodes = d.nodes();
  std::vector<double> xs(nodes.size(), 0.0);
  std::size_t next = 0;
  const double step = b.w / static_cast<double>(d.leaf_count());
  const auto place = [&](auto&& self, int node) -> void {
    const auto& nd = nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) {
      xs[static_cast<std::size_t>(node)] = b.x + step * (static_cast<double>(next++) + 0.5);
      return;
    }
    self(self, nd.left);
    self(self, nd.right);
    xs[static_cast<std::size_t>(node)] = 0.5 * (xs[static_cast<std::size_t>(nd.left)] + xs[static_cast<std::size_t>(nd.right)]);
  };
  place(place, static_cast<int>(nodes.size()) - 1);
  const double top = d.root().height > 0.0 ? d.root().height : 1.0;
  const auto y_of = [&](std::size_t node) {
    return b.y + b.h - 20.0 - (b.h - 30.0) * (nodes[node].is_leaf() ? 0.0 : nodes[node].height / top);
  };
  for (std::size_t i = d.leaf_count(); i < nodes.size(); ++i) {
    const auto l = static_cast<std::size_t>(nodes[i].left);
    const auto r = static_cast<std::size_t>(nodes[i].right);
    svg += fmt::format(R"(<polyline points="{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}" fill="none" stroke="#333"/>)",
                       xs[l], y_of(l), xs[l], y_of(i), xs[r], y_of(i), xs[r], y_of(r));
    svg += '\n';
  }
  for (std::size_t i = 0; i < d.leaf_count(); ++i) {
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="9" text-anchor="middle">{}</text>)", xs[i],
                       b.y + b.h - 6, ids[nodes[i].leaf]);
  }
  svg += '\n';
}

void partition_panel(std::string& svg, const Box& b, const RunResult& result, const WindowResult& w,
                     const std::vector<int>& clusters) {
  panel_frame(svg, b, "d. cluster partition");
  const double cell = b.w / static_cast<double>(w.members.size());
  for (std::size_t i = 0; i < w.members.size(); ++i) {
    const bool flagged = w.verdict.machines[w.members[i]].debounced_faulty;
    svg += fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="{}" stroke="{}" stroke-width="{}"/>)",
                       b.x + cell * i + 2, b.y + 8, cell - 4, b.h - 28, cluster_color(clusters[i]),
                       flagged ? kFlagged : "#fff", flagged ? 3 : 1);
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="9" text-anchor="middle">{}</text>)",
                       b.x + cell * (i + 0.5), b.y + b.h - 6, result.machine_ids[w.members[i]]);
  }
  svg += '\n';
}

void score_panel(std::string& svg, const Box& b, const RunResult& result, const WindowResult& w) {
  panel_frame(svg, b, "e. anomaly scores");
  const double cell = b.w / static_cast<double>(w.members.size());
  const auto y_of = [&](double s) { return b.y + b.h - 20.0 - (b.h - 30.0) * s; };
  for (std::size_t i = 0; i < w.members.size(); ++i) {
    const auto& v = w.verdict.machines[w.members[i]];
    const double y = y_of(v.score);
    svg += fmt::format(R"(<rect class="{}" x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="{}"/>)",
                       v.debounced_faulty ? "flagged" : "normal", b.x + cell * i + 3, y, cell - 6, y_of(0.0) - y,
                       v.debounced_faulty ? kFlagged : "#888");
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="9" text-anchor="middle">{}</text>)",
                       b.x + cell * (i + 0.5), b.y + b.h - 6, result.machine_ids[w.members[i]]);
  }
  const double t = y_of(result.config.thr_ad);
  svg += fmt::format(R"(<line class="thr_ad" x1="{}" y1="{:.2f}" x2="{}" y2="{:.2f}" stroke="{}" stroke-dasharray="6,4"/>)",
                     b.x, t, b.x + b.w, t, kFlagged);
  svg += fmt::format(R"(<text x="{}" y="{:.2f}" font-size="10" text-anchor="end">thr_ad {:.3f}</text>)", b.x + b.w - 4,
                     t - 4, result.config.thr_ad);
  svg += '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace

Json report_data(const RunResult& result, std::size_t window_index) {
  const WindowResult& w = find_window(result, window_index);
  Json signals = Json::array();
  for (const auto& s : w.signals) {
    signals.push_back({{"dim", s.dim()}, {"sample_rate", s.sample_rate()}, {"samples", s.data()}});
  }
  Json machines = Json::array();
  for (std::size_t m : w.members) {
    const auto& v = w.verdict.machines[m];
    machines.push_back({{"id", result.machine_ids[m]},
                        {"score", v.score},
                        {"cluster", v.cluster},
                        {"instant_anomalous", v.instant_anomalous},
                        {"debounced_faulty", v.debounced_faulty}});
  }
  Json clusters = Json::array();
  for (const auto& c : w.partition->clusters) {
    Json ids = Json::array();
    for (std::size_t i : c) ids.push_back(w.matrix->machine_ids()[i]);
    clusters.push_back(std::move(ids));
  }
  return {{"window_index", w.window_index},
          {"variant", to_string(result.config.variant)},
          {"thr_cc", result.config.thr_cc},
          {"thr_ad", result.config.thr_ad},
          {"signals", signals},
          {"matrix", to_json(*w.matrix)},
          {"dendrogram", to_json(*w.dendrogram, w.matrix->machine_ids())},
          {"partition", clusters},
          {"machines", machines}};
}

std::string render_report_svg(const RunResult& result, std::size_t window_index) {
  const WindowResult& w = find_window(result, window_index);
  const auto clusters = w.partition->assignment(w.members.size());
  std::string svg = R"(<svg xmlns="http://www.w3.org/2000/svg" width="1240" height="760" font-family="sans-serif">)";
  svg += "\n<rect width=\"1240\" height=\"760\" fill=\"#fff\"/>\n";
  svg += fmt::format(R"(<text x="20" y="22" font-size="15">{} variant, window {} (thr_cc {:g})</text>)",
                     to_string(result.config.variant), w.window_index, result.config.thr_cc);
  svg += '\n';
  signals_panel(svg, {20, 50, 560, 300}, w, clusters);
  heatmap_panel(svg, {700, 50, 300, 300}, *w.matrix);
  dendrogram_panel(svg, {20, 400, 560, 200}, *w.dendrogram, w.matrix->machine_ids());
  partition_panel(svg, {20, 650, 560, 80}, result, w, clusters);
  score_panel(svg, {640, 400, 560, 330}, result, w);
  svg += "</svg>\n";
  return svg;
}

ReportFiles emit_report(const RunResult& result, std::size_t window_index, const std::filesystem::path& svg_path,
                        const std::filesystem::path& json_path) {
  const std::string svg = render_report_svg(result, window_index);
  const std::string json = report_data(result, window_index).dump(2) + "\n";
  write_text(svg_path, svg);
  write_text(json_path, json);
  return {svg_path, json_path};
}

ReportFiles emit_report(const RunResult& result, std::size_t window_index, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
  const std::string stem = fmt::format("window_{}", window_index);
  return emit_report(result, window_index, out_dir / (stem + ".svg"), out_dir / (stem + ".json"));
}

}  // namespace fleetmon
