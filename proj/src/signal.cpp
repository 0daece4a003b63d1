#include "fleetmon/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "fleetmon/error.hpp"

namespace fleetmon {

namespace {

constexpr double kMinScale = 1e-12;

// FFTW planning is not thread-safe; execution with new-array functions is.
class PlanCache {
 public:
  fftw_plan get(std::size_t n) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::unordered_map<std::size_t, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

struct FftwDeleter {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

std::vector<double> amplitude_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<double, FftwDeleter> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwDeleter> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute_dft_r2c(plan_cache().get(n), in.get(), out.get());

  std::vector<double> amps(bins);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < bins; ++k) {
    const double mag = std::hypot(out.get()[k][0], out.get()[k][1]);
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    amps[k] = (edge ? 1.0 : 2.0) * mag * scale;
  }
  return amps;
}

void require_scalar(const Series& s, const char* what) {
  if (s.dim() != 1) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " expects a 1-dimensional series, got dim " +
                    std::to_string(s.dim()));
  }
}

}  // namespace

Series::Series(std::vector<double> samples, std::size_t dim, double sample_rate,
               std::optional<double> bin_hz)
    : samples_(std::move(samples)), dim_(dim), sample_rate_(sample_rate), bin_hz_(bin_hz) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "series dimension must be >= 1");
  if (samples_.empty()) throw Error(ErrorCode::InvalidArgument, "series must hold >= 1 point");
  if (samples_.size() % dim_ != 0) {
    throw Error(ErrorCode::InvalidArgument, "sample count is not a multiple of the dimension");
  }
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  if (bin_hz_ && !(*bin_hz_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "bin_hz must be positive");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorCode::NonFiniteInput, "non-finite sample at point " + std::to_string(i / dim_));
    }
  }
}

std::vector<double> Series::channel(std::size_t d) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i, d);
  return out;
}

Series Series::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > size()) {
    throw Error(ErrorCode::InvalidArgument, "slice out of range");
  }
  std::vector<double> part(samples_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                           samples_.begin() + static_cast<std::ptrdiff_t>((first + count) * dim_));
  return Series(std::move(part), dim_, sample_rate_, bin_hz_);
}

void FleetWindow::validate() const {
  if (series.size() != machine_ids.size()) {
    throw Error(ErrorCode::InvalidArgument, "machine id / series count mismatch");
  }
  if (series.size() < 2) throw Error(ErrorCode::InvalidArgument, "a fleet window needs >= 2 machines");
  const Series& ref = series.front();
  for (const Series& s : series) {
    if (s.size() != ref.size() || s.dim() != ref.dim() || s.sample_rate() != ref.sample_rate()) {
      throw Error(ErrorCode::InvalidArgument, "fleet window series differ in shape or rate");
    }
  }
}

std::string to_string(NormMode mode) {
  switch (mode) {
    case NormMode::minmax: return "minmax";
    case NormMode::zscore: return "zscore";
    case NormMode::percentile: return "percentile";
  }
  return "minmax";
}

NormMode norm_mode_from_string(const std::string& name) {
  if (name == "minmax") return NormMode::minmax;
  if (name == "zscore") return NormMode::zscore;
  if (name == "percentile") return NormMode::percentile;
  throw Error(ErrorCode::InvalidConfig, "unknown normalization '" + name + "'");
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty set");
  if (q < 0.0 || q > 1.0) throw Error(ErrorCode::InvalidArgument, "quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Series normalize(const Series& series, NormMode mode) {
  const std::size_t n = series.size();
  const std::size_t m = series.dim();
  std::vector<double> out(series.data().begin(), series.data().end());
  for (std::size_t d = 0; d < m; ++d) {
    const std::vector<double> col = series.channel(d);
    double offset = 0.0;
    double scale = 0.0;
    switch (mode) {
      case NormMode::minmax: {
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        offset = *lo;
        scale = *hi - *lo;
        break;
      }
      case NormMode::zscore: {
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        offset = mean;
        scale = std::sqrt(ss / static_cast<double>(n));
        break;
      }
      case NormMode::percentile: {
        offset = quantile(col, 0.5);
        scale = quantile(col, 0.75) - quantile(col, 0.25);
        break;
      }
    }
    if (!(scale >= kMinScale)) {
      throw Error(ErrorCode::DegenerateScale,
                  to_string(mode) + " scale of dimension " + std::to_string(d) + " is degenerate");
    }
    for (std::size_t i = 0; i < n; ++i) out[i * m + d] = (col[i] - offset) / scale;
  }
  return Series(std::move(out), m, series.sample_rate(), series.bin_hz());
}

std::vector<Series> split_windows(const Series& stream, double duration_s) {
  const double exact = duration_s * stream.sample_rate();
  if (!(exact >= 2.0)) {
    throw Error(ErrorCode::WindowTooShort, "window holds fewer than 2 samples");
  }
  const auto len = static_cast<std::size_t>(std::llround(exact));
  std::vector<Series> windows;
  for (std::size_t first = 0; first + len <= stream.size(); first += len) {
    windows.push_back(stream.slice(first, len));
  }
  return windows;
}

Spectrum fft_magnitude(const Series& series) {
  require_scalar(series, "fft_magnitude");
  const std::size_t n = series.size();
  return Spectrum{amplitude_spectrum(series.data()), series.sample_rate() / static_cast<double>(n), n};
}

Spectrum log_scale(const Spectrum& spectrum, double floor) {
  if (!(floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "log floor must be positive");
  Spectrum out = spectrum;
  for (double& a : out.amplitudes) a = std::log10(std::max(a, floor));
  return out;
}

Series spectrogram(const Series& series, double frame_s) {
  require_scalar(series, "spectrogram");
  const double exact = frame_s * series.sample_rate();
  if (!(exact >= 2.0)) throw Error(ErrorCode::WindowTooShort, "spectrogram frame holds fewer than 2 samples");
  const auto len = static_cast<std::size_t>(std::llround(exact));
  const std::size_t frames = series.size() / len;
  if (frames == 0) throw Error(ErrorCode::WindowTooShort, "series shorter than one spectrogram frame");

  const std::size_t bins = len / 2 + 1;
  std::vector<double> out;
  out.reserve(frames * bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto amps = amplitude_spectrum(series.data().subspan(f * len, len));
    out.insert(out.end(), amps.begin(), amps.end());
  }
  const double frame_rate = series.sample_rate() / static_cast<double>(len);
  return Series(std::move(out), bins, frame_rate, frame_rate);
}

Series lowpass_truncate(const Series& spec_series, double cutoff_hz) {
  const auto bin_hz = spec_series.bin_hz();
  if (!bin_hz) throw Error(ErrorCode::InvalidArgument, "lowpass_truncate needs a spectrogram series");
  if (cutoff_hz < *bin_hz) {
    throw Error(ErrorCode::CutoffBelowResolution, "cutoff below the frequency resolution");
  }
  const std::size_t all = spec_series.dim();
  // Relative slack so that a cutoff landing exactly on a bin keeps it.
  const auto keep = std::min<std::size_t>(
      all, static_cast<std::size_t>(std::floor(cutoff_hz / *bin_hz + 1e-9)) + 1);
  if (keep == all) return spec_series;
  std::vector<double> out;
  out.reserve(spec_series.size() * keep);
  for (std::size_t i = 0; i < spec_series.size(); ++i) {
    const auto p = spec_series.point(i);
    out.insert(out.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return Series(std::move(out), keep, spec_series.sample_rate(), bin_hz);
}

double estimate_fundamental(const Spectrum& spectrum) {
  const auto& a = spectrum.amplitudes;
  if (a.size() < 2) throw Error(ErrorCode::FlatSpectrum, "spectrum has no non-DC bins");
  const auto peak = std::max_element(a.begin() + 1, a.end());
  const auto low = std::min_element(a.begin() + 1, a.end());
  if (*peak == *low) throw Error(ErrorCode::FlatSpectrum, "all non-DC bins are equal");
  return static_cast<double>(peak - a.begin()) * spectrum.bin_hz;
}

double harmonic_amplitude(const Spectrum& spectrum, double fundamental_hz, int k,
                          double half_window_hz) {
  if (k < 1 || !(fundamental_hz > 0.0) || half_window_hz < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "harmonic search needs k >= 1 and a positive fundamental");
  }
  const double centre = k * fundamental_hz;
  const double lo = centre - half_window_hz;
  const double hi = centre + half_window_hz;
  if (hi > spectrum.nyquist_hz() + 1e-9) {
    throw Error(ErrorCode::HarmonicOutOfRange,
                "harmonic " + std::to_string(k) + " band exceeds the Nyquist frequency");
  }
  const double bin = spectrum.bin_hz;
  const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(lo / bin - 1e-9)));
  const auto last = std::min(spectrum.amplitudes.size() - 1,
                             static_cast<std::size_t>(std::floor(hi / bin + 1e-9)));
  if (first > last) {
    // Band narrower than a bin: fall back to the nearest bin.
    const auto nearest = std::min(spectrum.amplitudes.size() - 1,
                                  static_cast<std::size_t>(std::llround(centre / bin)));
    return spectrum.amplitudes[nearest];
  }
  return *std::max_element(spectrum.amplitudes.begin() + static_cast<std::ptrdiff_t>(first),
                           spectrum.amplitudes.begin() + static_cast<std::ptrdiff_t>(last) + 1);
}

Series downsample_per_period(const Series& series, double fundamental_hz, int samples_per_period) {
  require_scalar(series, "downsample_per_period");
  if (!(fundamental_hz > 0.0) || samples_per_period < 1) {
    throw Error(ErrorCode::InvalidArgument, "downsampling needs a positive fundamental and period size");
  }
  const double target_rate = fundamental_hz * samples_per_period;
  if (!(series.sample_rate() > target_rate)) {
    throw Error(ErrorCode::UpsamplingRequested, "target rate is not below the source rate");
  }
  // Output instants t_j = j / target_rate within the span of the source.
  const double ratio = series.sample_rate() / target_rate;  // source samples per output sample
  const double last = static_cast<double>(series.size() - 1);
  const auto count = static_cast<std::size_t>(std::floor(last / ratio + 1e-9)) + 1;
  std::vector<double> out(count);
  const auto x = series.data();
  for (std::size_t j = 0; j < count; ++j) {
    const double pos = std::min(static_cast<double>(j) * ratio, last);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    out[j] = (i + 1 < x.size()) ? x[i] + frac * (x[i + 1] - x[i]) : x[i];
  }
  return Series::scalar(std::move(out), target_rate);
}

Series spectrum_as_series(const Spectrum& spectrum) {
  return Series::scalar(spectrum.amplitudes, 1.0 / spectrum.bin_hz);
}

}  // namespace fleetmon
