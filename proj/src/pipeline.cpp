#include "fleetmon/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fleetmon/error.hpp"

namespace fleetmon {

namespace {

using Json = nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

template <typename T>
void read_key(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Puts the arguments in a label-independent order so that measures whose
// tie-breaking is not symmetric still give the same value for (x, y) and (y, x).
Measure symmetric(Measure inner) {
  return [inner = std::move(inner)](const Series& x, const Series& y) {
    const auto a = x.data();
    const auto b = y.data();
    if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end())) return inner(y, x);
    return inner(x, y);
  };
}

double median_of(std::vector<double> v) { return quantile(std::move(v), 0.5); }

Series minmax_whole(const Series& s) {
  const auto d = s.data();
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double range = *hi - *lo;
  if (range < 1e-12) throw Error(ErrorCode::DegenerateScale, "constant spectrogram");
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = (d[i] - *lo) / range;
  return Series(std::move(out), s.dim(), s.sample_rate(), s.bin_hz());
}

Series log_series(const Series& s, double floor) {
  std::vector<double> out(s.data().begin(), s.data().end());
  for (double& v : out) v = std::log10(std::max(v, floor));
  return Series(std::move(out), s.dim(), s.sample_rate(), s.bin_hz());
}

Series axis(const Series& s, std::size_t d) { return Series::scalar(s.channel(d), s.sample_rate()); }

double window_fundamental(const Series& s, const std::optional<double>& rpm, int pole_pairs) {
  if (rpm && *rpm > 0.0) return speed_to_fundamental(*rpm, pole_pairs);
  return estimate_fundamental(fft_magnitude(axis(s, 0)));
}

std::vector<double> harmonic_features(const Series& s, double f0, int first, int last, double hw) {
  std::vector<double> out;
  for (std::size_t d = 0; d < s.dim(); ++d) {
    const Spectrum spec = fft_magnitude(axis(s, d));
    for (int k = first; k <= last; ++k) out.push_back(harmonic_amplitude(spec, f0, k, hw));
  }
  return out;
}

void require_kind(const FleetRecording& rec, SignalKind kind, const std::string& what) {
  if (rec.kind != kind) config_error(what + " needs " + to_string(kind) + " data");
}

using Prepared = std::vector<std::optional<Series>>;

template <typename F>
Prepared per_machine(const FleetWindow& w, F&& fn) {
  Prepared out(w.series.size());
  for (std::size_t m = 0; m < w.series.size(); ++m) {
    try {
      out[m] = fn(w.series[m]);
    } catch (const Error& e) {
      spdlog::warn("window {}: machine {} excluded: {}", w.window_index, w.machine_ids[m], e.what());
    }
  }
  return out;
}

Prepared preprocess(const FleetWindow& w, const VariantConfig& c) {
  switch (c.variant) {
    case Variant::waveform: {
      std::vector<double> estimates;
      for (const auto& s : w.series) {
        try {
          estimates.push_back(estimate_fundamental(fft_magnitude(s)));
        } catch (const Error&) {
        }
      }
      if (estimates.empty()) return Prepared(w.series.size());
      const double f0 = median_of(estimates);
      return per_machine(w, [&](const Series& s) {
        return downsample_per_period(normalize(s, c.effective_normalization()), f0, c.samples_per_period);
      });
    }
    case Variant::harmonic:
      return per_machine(w, [&](const Series& s) {
        const Spectrum raw = fft_magnitude(s);
        const double f0 = estimate_fundamental(raw);
        const Spectrum logged = log_scale(raw, c.log_floor);
        const Series scaled = normalize(spectrum_as_series(logged), c.effective_normalization());
        const Spectrum spec{std::vector<double>(scaled.data().begin(), scaled.data().end()), raw.bin_hz,
                            raw.source_length};
        return Series::scalar({harmonic_amplitude(spec, f0, c.harmonic_k, c.half_window_hz)}, 1.0);
      });
    case Variant::spectrogram:
      return per_machine(w, [&](const Series& s) {
        const Series spec = lowpass_truncate(spectrogram(s, c.frame_s), c.lowpass_hz);
        const Series logged = log_series(spec, c.log_floor);
        if (c.effective_normalization() == NormMode::minmax) return minmax_whole(logged);
        return normalize(logged, c.effective_normalization());
      });
    case Variant::vibration_features: {
      Prepared raw = per_machine(w, [&](const Series& s) {
        const double f0 = window_fundamental(s, w.speed_rpm, c.pole_pairs);
        auto f = harmonic_features(s, f0, c.harmonic_first, c.harmonic_last, c.half_window_hz);
        const std::size_t dims = f.size();
        return Series(std::move(f), dims, 1.0);
      });
      // Fleet-wise scaling of every feature dimension; a dimension without
      // spread carries no information and is zeroed.
      std::vector<std::size_t> ok;
      for (std::size_t m = 0; m < raw.size(); ++m) {
        if (raw[m]) ok.push_back(m);
      }
      if (ok.size() < 2) return raw;
      const std::size_t dims = raw[ok.front()]->dim();
      std::vector<std::vector<double>> scaled(raw.size(), std::vector<double>(dims, 0.0));
      for (std::size_t d = 0; d < dims; ++d) {
        std::vector<double> samples;
        for (std::size_t m : ok) samples.push_back(raw[m]->value(0, d));
        try {
          const Series column = normalize(Series::scalar(samples, 1.0), c.effective_normalization());
          for (std::size_t i = 0; i < ok.size(); ++i) scaled[ok[i]][d] = column.value(i);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateScale) throw;
        }
      }
      Prepared out(raw.size());
      for (std::size_t m : ok) out[m] = Series(std::move(scaled[m]), dims, 1.0);
      return out;
    }
  }
  return Prepared(w.series.size());
}

Measure variant_measure(const VariantConfig& c) {
  switch (c.variant) {
    case Variant::waveform:
      return symmetric([psi = c.psi, cost = c.cost](const Series& x, const Series& y) {
        return warping_amount(dtw(x, y, psi, cost).path, true);
      });
    case Variant::harmonic:
      return [cost = c.cost](const Series& x, const Series& y) { return euclidean(x, y, cost); };
    case Variant::spectrogram:
      return symmetric([cost = c.cost](const Series& x, const Series& y) { return dtw(x, y, 0, cost).distance; });
    case Variant::vibration_features:
      return [](const Series& x, const Series& y) { return feature_euclidean(x.point(0), y.point(0)); };
  }
  return {};
}

// Instant verdicts per fleet machine; nullopt for excluded machines.
std::vector<std::optional<bool>> instant_verdicts(const WindowResult& w, const Partition& p, double thr_ad,
                                                  std::size_t machine_count) {
  std::vector<std::optional<bool>> out(machine_count);
  if (w.skipped) return out;
  const auto scores = score(p, w.members.size());
  const auto anomalous = classify(scores, thr_ad);
  for (std::size_t i = 0; i < w.members.size(); ++i) out[w.members[i]] = anomalous[i];
  return out;
}

std::vector<std::vector<bool>> debounced(const std::vector<std::vector<std::optional<bool>>>& history, int n,
                                         std::size_t machine_count) {
  Debouncer state(machine_count, n);
  std::vector<std::vector<bool>> out;
  out.reserve(history.size());
  for (const auto& h : history) out.push_back(state.update(h));
  return out;
}

std::size_t warmup_of(int debounce_n) { return static_cast<std::size_t>(debounce_n - 1); }

}  // namespace

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::waveform: return "waveform";
    case Variant::harmonic: return "harmonic";
    case Variant::spectrogram: return "spectrogram";
    case Variant::vibration_features: return "vibration_features";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  for (auto v : {Variant::waveform, Variant::harmonic, Variant::spectrogram, Variant::vibration_features}) {
    if (to_string(v) == name) return v;
  }
  config_error("unknown variant '" + name + "'");
}

NormMode VariantConfig::effective_normalization() const {
  if (normalization) return *normalization;
  return variant == Variant::vibration_features ? NormMode::percentile : NormMode::minmax;
}

void VariantConfig::validate() const {
  if (!(thr_cc >= 0.0 && thr_cc <= 1.0)) config_error("thr_cc must lie in [0, 1]");
  if (!(thr_ad >= 0.0 && thr_ad < 1.0)) config_error("thr_ad must lie in [0, 1)");
  if (debounce_n < 1) config_error("debounce_n must be >= 1");
  if (!(window_s > 0.0)) config_error("window_s must be positive");
  for (double t : thr_cc_grid) {
    if (!(t >= 0.0 && t <= 1.0)) config_error("thr_cc_grid values must lie in [0, 1]");
  }
  if (samples_per_period < 2) config_error("samples_per_period must be >= 2");
  if (harmonic_k < 1) config_error("harmonic_k must be >= 1");
  if (!(half_window_hz >= 0.0)) config_error("half_window_hz must be >= 0");
  if (!(log_floor > 0.0)) config_error("log_floor must be positive");
  if (!(frame_s > 0.0) || frame_s > window_s) config_error("frame_s must lie in (0, window_s]");
  if (!(lowpass_hz > 0.0)) config_error("lowpass_hz must be positive");
  if (harmonic_first < 1 || harmonic_last < harmonic_first) config_error("invalid harmonic range");
  if (pole_pairs < 1) config_error("pole_pairs must be >= 1");
}

Json to_json(const VariantConfig& c) {
  Json j{
      {"variant", to_string(c.variant)},
      {"thr_cc", c.thr_cc},
      {"thr_ad", c.thr_ad},
      {"debounce_n", c.debounce_n},
      {"window_s", c.window_s},
      {"linkage", to_string(c.linkage)},
      {"cost", to_string(c.cost)},
      {"thr_cc_grid", c.thr_cc_grid},
      {"psi", c.psi},
      {"samples_per_period", c.samples_per_period},
      {"harmonic_k", c.harmonic_k},
      {"half_window_hz", c.half_window_hz},
      {"log_floor", c.log_floor},
      {"frame_s", c.frame_s},
      {"lowpass_hz", c.lowpass_hz},
      {"harmonic_first", c.harmonic_first},
      {"harmonic_last", c.harmonic_last},
      {"pole_pairs", c.pole_pairs},
      {"normalization", to_string(c.effective_normalization())},
  };
  return j;
}

VariantConfig variant_config_from_json(const Json& j) {
  VariantConfig c;
  try {
    if (!j.is_object()) config_error("variant config must be a JSON object");
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
    read_key(j, "thr_cc", c.thr_cc);
    read_key(j, "thr_ad", c.thr_ad);
    read_key(j, "debounce_n", c.debounce_n);
    read_key(j, "window_s", c.window_s);
    if (j.contains("linkage")) c.linkage = linkage_from_string(j.at("linkage").get<std::string>());
    if (j.contains("cost")) c.cost = cost_mode_from_string(j.at("cost").get<std::string>());
    read_key(j, "thr_cc_grid", c.thr_cc_grid);
    read_key(j, "psi", c.psi);
    read_key(j, "samples_per_period", c.samples_per_period);
    read_key(j, "harmonic_k", c.harmonic_k);
    read_key(j, "half_window_hz", c.half_window_hz);
    read_key(j, "log_floor", c.log_floor);
    read_key(j, "frame_s", c.frame_s);
    read_key(j, "lowpass_hz", c.lowpass_hz);
    read_key(j, "harmonic_first", c.harmonic_first);
    read_key(j, "harmonic_last", c.harmonic_last);
    read_key(j, "pole_pairs", c.pole_pairs);
    if (j.contains("normalization")) c.normalization = norm_mode_from_string(j.at("normalization").get<std::string>());
  } catch (const Json::exception& e) {
    config_error(std::string("variant config: ") + e.what());
  } catch (const Error& e) {
    config_error(e.what());
  }
  c.validate();
  return c;
}

void BaselineConfig::validate() const {
  if (sigma_grid.empty()) config_error("sigma_grid must not be empty");
  for (double s : sigma_grid) {
    if (!(s > 0.0)) config_error("sigma values must be positive");
  }
  if (debounce_n < 1) config_error("debounce_n must be >= 1");
  if (!(window_s > 0.0)) config_error("window_s must be positive");
  if (harmonic_k < 1 || harmonic_first < 1 || harmonic_last < harmonic_first) config_error("invalid harmonic range");
  if (!(half_window_hz >= 0.0)) config_error("half_window_hz must be >= 0");
  if (pole_pairs < 1) config_error("pole_pairs must be >= 1");
}

Json to_json(const BaselineConfig& c) {
  return {
      {"sigma_grid", c.sigma_grid},         {"debounce_n", c.debounce_n},
      {"window_s", c.window_s},             {"harmonic_k", c.harmonic_k},
      {"harmonic_first", c.harmonic_first}, {"harmonic_last", c.harmonic_last},
      {"half_window_hz", c.half_window_hz}, {"pole_pairs", c.pole_pairs},
      {"leave_one_out", c.leave_one_out},
  };
}

BaselineConfig baseline_config_from_json(const Json& j) {
  BaselineConfig c;
  try {
    if (!j.is_object()) config_error("baseline config must be a JSON object");
    read_key(j, "sigma_grid", c.sigma_grid);
    read_key(j, "debounce_n", c.debounce_n);
    read_key(j, "window_s", c.window_s);
    read_key(j, "harmonic_k", c.harmonic_k);
    read_key(j, "harmonic_first", c.harmonic_first);
    read_key(j, "harmonic_last", c.harmonic_last);
    read_key(j, "half_window_hz", c.half_window_hz);
    read_key(j, "pole_pairs", c.pole_pairs);
    read_key(j, "leave_one_out", c.leave_one_out);
  } catch (const Json::exception& e) {
    config_error(std::string("baseline config: ") + e.what());
  }
  c.validate();
  return c;
}

FleetRecording ingest_csv(const std::filesystem::path& path) { return read_fleet_csv(path); }

std::vector<FleetWindow> make_windows(const FleetRecording& recording, double window_s) {
  recording.validate();
  std::vector<std::vector<Series>> split;
  for (const auto& s : recording.streams) split.push_back(split_windows(s, window_s));
  const std::size_t count = split.front().size();
  const auto len = static_cast<std::size_t>(std::llround(window_s * recording.sample_rate()));

  std::vector<FleetWindow> out;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    FleetWindow fw;
    fw.window_index = w;
    fw.duration_s = window_s;
    fw.machine_ids = recording.machine_ids;
    for (auto& per_machine : split) fw.series.push_back(std::move(per_machine[w]));
    if (recording.rpm) {
      const auto first = recording.rpm->begin() + static_cast<std::ptrdiff_t>(w * len);
      fw.speed_rpm = std::accumulate(first, first + static_cast<std::ptrdiff_t>(len), 0.0) / static_cast<double>(len);
    }
    out.push_back(std::move(fw));
  }
  return out;
}

std::vector<bool> align_truth(const std::vector<std::string>& machine_ids, const GroundTruth& truth) {
  std::vector<bool> out;
  for (const auto& id : machine_ids) {
    const auto it = std::find(truth.machine_ids.begin(), truth.machine_ids.end(), id);
    if (it == truth.machine_ids.end()) throw Error(ErrorCode::UnknownMachine, "no ground truth for '" + id + "'");
    out.push_back(truth.faulty[static_cast<std::size_t>(it - truth.machine_ids.begin())]);
  }
  return out;
}

RunResult run_variant(const FleetRecording& recording, const VariantConfig& config,
                      const std::optional<GroundTruth>& truth, const RunOptions& options) {
  config.validate();
  recording.validate();
  const std::size_t n = recording.machine_ids.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "the framework needs at least three machines");
  if (config.variant == Variant::vibration_features) {
    require_kind(recording, SignalKind::vibration, "variant vibration_features");
  } else {
    require_kind(recording, SignalKind::current, "variant " + to_string(config.variant));
  }

  RunResult result;
  result.config = config;
  result.machine_ids = recording.machine_ids;
  if (truth) result.truth = align_truth(recording.machine_ids, *truth);

  const Measure measure = variant_measure(config);
  const std::string tag = to_string(config.variant);
  for (const auto& window : make_windows(recording, config.window_s)) {
    WindowResult wr;
    wr.window_index = window.window_index;
    wr.verdict.window_index = window.window_index;
    wr.verdict.machines.assign(n, MachineVerdict{false, 0.0, -1, false, false});

    Prepared prepared = preprocess(window, config);
    FleetWindow sub;
    sub.window_index = window.window_index;
    sub.duration_s = window.duration_s;
    sub.speed_rpm = window.speed_rpm;
    for (std::size_t m = 0; m < n; ++m) {
      if (!prepared[m]) continue;
      wr.members.push_back(m);
      sub.machine_ids.push_back(window.machine_ids[m]);
      sub.series.push_back(std::move(*prepared[m]));
    }
    if (2 * wr.members.size() < n || wr.members.size() < 2) {
      spdlog::warn("window {} skipped: only {} of {} machines usable", window.window_index, wr.members.size(), n);
      wr.skipped = true;
      wr.members.clear();
      result.windows.push_back(std::move(wr));
      continue;
    }

    wr.matrix = build_matrix(sub, measure, tag);
    wr.dendrogram = agglomerate(*wr.matrix, config.linkage);
    wr.partition = partition(*wr.dendrogram, *wr.matrix, config.thr_cc);
    const auto scores = score(*wr.partition, wr.members.size());
    const auto anomalous = classify(scores, config.thr_ad);
    const auto clusters = wr.partition->assignment(wr.members.size());
    for (std::size_t i = 0; i < wr.members.size(); ++i) {
      auto& v = wr.verdict.machines[wr.members[i]];
      v.included = true;
      v.score = scores[i];
      v.cluster = clusters[i];
      v.instant_anomalous = anomalous[i];
    }
    if (options.retain_signals) wr.signals = std::move(sub.series);
    result.windows.push_back(std::move(wr));
  }

  // Debounce runs serially over window order.
  Debouncer state(n, config.debounce_n);
  std::vector<std::vector<bool>> predictions;
  for (auto& w : result.windows) {
    std::vector<std::optional<bool>> instant(n);
    for (std::size_t m = 0; m < n; ++m) {
      if (w.verdict.machines[m].included) instant[m] = w.verdict.machines[m].instant_anomalous;
    }
    const auto faulty = state.update(instant);
    for (std::size_t m = 0; m < n; ++m) w.verdict.machines[m].debounced_faulty = faulty[m];
    predictions.push_back(faulty);
  }

  if (result.truth) {
    const std::size_t warmup = warmup_of(config.debounce_n);
    const SweepTable own = sweep("thr_cc", {config.thr_cc}, {predictions}, *result.truth, warmup);
    result.counts = own.rows.front().counts;
    result.metrics = own.rows.front().metrics;

    std::vector<std::vector<std::vector<bool>>> grid_predictions;
    for (double thr : config.thr_cc_grid) {
      std::vector<std::vector<std::optional<bool>>> history;
      for (const auto& w : result.windows) {
        if (w.skipped) {
          history.emplace_back(n);
          continue;
        }
        const Partition p = partition(*w.dendrogram, *w.matrix, thr);
        history.push_back(instant_verdicts(w, p, config.thr_ad, n));
      }
      grid_predictions.push_back(debounced(history, config.debounce_n, n));
    }
    result.thr_cc_sweep = sweep("thr_cc", config.thr_cc_grid, grid_predictions, *result.truth, warmup);
  }
  return result;
}

BaselineResult run_baseline(const FleetRecording& recording, const BaselineConfig& config, const GroundTruth& truth) {
  config.validate();
  recording.validate();
  const std::size_t n = recording.machine_ids.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "the baseline needs at least three machines");
  const std::vector<bool> labels = align_truth(recording.machine_ids, truth);
  const bool vibration = recording.kind == SignalKind::vibration;

  // indicators[window][machine], empty when the machine failed.
  std::vector<std::vector<std::optional<std::vector<double>>>> indicators;
  for (const auto& w : make_windows(recording, config.window_s)) {
    std::vector<std::optional<std::vector<double>>> row(n);
    for (std::size_t m = 0; m < n; ++m) {
      try {
        if (vibration) {
          const double f0 = window_fundamental(w.series[m], w.speed_rpm, config.pole_pairs);
          row[m] = harmonic_features(w.series[m], f0, config.harmonic_first, config.harmonic_last,
                                     config.half_window_hz);
        } else {
          const Spectrum spec = fft_magnitude(w.series[m]);
          row[m] = std::vector<double>{
              harmonic_amplitude(spec, estimate_fundamental(spec), config.harmonic_k, config.half_window_hz)};
        }
      } catch (const Error& e) {
        spdlog::warn("window {}: machine {} excluded from the baseline: {}", w.window_index, w.machine_ids[m],
                     e.what());
      }
    }
    indicators.push_back(std::move(row));
  }

  std::vector<std::vector<std::vector<bool>>> grid_predictions;
  for (double sigma : config.sigma_grid) {
    std::vector<std::vector<std::optional<bool>>> history;
    for (const auto& row : indicators) {
      std::vector<std::optional<bool>> instant(n);
      std::vector<std::size_t> ok;
      std::vector<std::vector<double>> values;
      for (std::size_t m = 0; m < n; ++m) {
        if (!row[m]) continue;
        ok.push_back(m);
        values.push_back(*row[m]);
      }
      if (2 * ok.size() >= n && ok.size() >= 2) {
        const auto band = sigma_band_baseline(values, sigma, {config.leave_one_out});
        for (std::size_t i = 0; i < ok.size(); ++i) instant[ok[i]] = static_cast<bool>(band.faulty[i]);
      }
      history.push_back(std::move(instant));
    }
    grid_predictions.push_back(debounced(history, config.debounce_n, n));
  }

  BaselineResult result;
  result.config = config;
  result.machine_ids = recording.machine_ids;
  result.window_count = indicators.size();
  result.table = sweep("sigma", config.sigma_grid, grid_predictions, labels, warmup_of(config.debounce_n));
  return result;
}

Json to_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

Json to_json(const Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"degenerate", m.degenerate}};
}

Json to_json(const SweepTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"parameter", r.parameter}, {"counts", to_json(r.counts)}, {"metrics", to_json(r.metrics)}});
  }
  return {{"parameter", table.parameter_name}, {"rows", rows}, {"best_row", table.best_row()}};
}

Json to_json(const DissimilarityMatrix& matrix) {
  return {{"measure", matrix.measure_tag()}, {"machine_ids", matrix.machine_ids()}, {"values", matrix.values()}};
}

Json to_json(const Dendrogram& dendrogram, const std::vector<std::string>& leaf_ids) {
  const auto& nodes = dendrogram.nodes();
  const auto nested = [&](auto&& self, int node) -> Json {
    const auto& nd = nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) return {{"leaf", leaf_ids.at(nd.leaf)}};
    return {{"height", nd.height}, {"children", {self(self, nd.left), self(self, nd.right)}}};
  };
  Json merges = Json::array();
  for (std::size_t i = dendrogram.leaf_count(); i < nodes.size(); ++i) {
    merges.push_back({{"left", nodes[i].left}, {"right", nodes[i].right}, {"height", nodes[i].height}});
  }
  return {{"linkage", to_string(dendrogram.linkage())},
          {"leaves", leaf_ids},
          {"merges", merges},
          {"tree", nested(nested, static_cast<int>(nodes.size()) - 1)}};
}

Json to_json(const RunResult& result, bool include_structures) {
  Json windows = Json::array();
  for (const auto& w : result.windows) {
    Json machines = Json::array();
    for (std::size_t m = 0; m < result.machine_ids.size(); ++m) {
      const auto& v = w.verdict.machines[m];
      Json jm{{"id", result.machine_ids[m]}, {"included", v.included}};
      if (v.included) {
        jm["score"] = v.score;
        jm["cluster"] = v.cluster;
        jm["instant_anomalous"] = v.instant_anomalous;
      }
      jm["debounced_faulty"] = v.debounced_faulty;
      machines.push_back(std::move(jm));
    }
    Json jw{{"window_index", w.window_index}, {"skipped", w.skipped}, {"machines", machines}};
    if (include_structures && !w.skipped) {
      jw["matrix"] = to_json(*w.matrix);
      jw["dendrogram"] = to_json(*w.dendrogram, w.matrix->machine_ids());
      Json clusters = Json::array();
      for (const auto& c : w.partition->clusters) {
        Json ids = Json::array();
        for (std::size_t i : c) ids.push_back(w.matrix->machine_ids()[i]);
        clusters.push_back(std::move(ids));
      }
      jw["partition"] = std::move(clusters);
    }
    windows.push_back(std::move(jw));
  }
  Json j{{"config", to_json(result.config)}, {"machine_ids", result.machine_ids}, {"windows", windows}};
  if (result.truth) {
    Json truth = Json::object();
    for (std::size_t m = 0; m < result.machine_ids.size(); ++m) truth[result.machine_ids[m]] = static_cast<bool>((*result.truth)[m]);
    j["ground_truth"] = truth;
  }
  if (result.counts) j["counts"] = to_json(*result.counts);
  if (result.metrics) j["metrics"] = to_json(*result.metrics);
  if (result.thr_cc_sweep) j["thr_cc_sweep"] = to_json(*result.thr_cc_sweep);
  return j;
}

Json to_json(const BaselineResult& result) {
  return {{"config", to_json(result.config)},
          {"machine_ids", result.machine_ids},
          {"window_count", result.window_count},
          {"sigma_sweep", to_json(result.table)}};
}

}  // namespace fleetmon
