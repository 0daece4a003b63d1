#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fleetmon {

/// Uniformly sampled signal of n points, each an m-dimensional vector.
///
/// Samples are stored row-major (point after point). A spectrogram is a
/// Series whose points are frame spectra; it additionally records the
/// frequency spacing of its dimensions in bin_hz().
class Series {
 public:
  /// Throws InvalidArgument for empty data, dim == 0, ragged data or a
  /// non-positive rate, and NonFiniteInput for NaN/Inf samples.
  Series(std::vector<double> samples, std::size_t dim, double sample_rate,
         std::optional<double> bin_hz = std::nullopt);

  static Series scalar(std::vector<double> samples, double sample_rate) {
    return Series(std::move(samples), 1, sample_rate);
  }

  std::size_t size() const noexcept { return samples_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  double sample_rate() const noexcept { return sample_rate_; }
  double duration() const noexcept { return static_cast<double>(size()) / sample_rate_; }
  std::optional<double> bin_hz() const noexcept { return bin_hz_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {samples_.data() + i * dim_, dim_};
  }
  double value(std::size_t i, std::size_t d = 0) const noexcept { return samples_[i * dim_ + d]; }
  std::span<const double> data() const noexcept { return samples_; }

  /// Copy of one dimension as a contiguous vector.
  std::vector<double> channel(std::size_t d) const;

  /// Points [first, first + count) as a new Series with the same rate.
  Series slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::vector<double> samples_;
  std::size_t dim_;
  double sample_rate_;
  std::optional<double> bin_hz_;
};

/// One analysis window across the fleet. Every Series shares n, m and rate.
struct FleetWindow {
  std::size_t window_index = 0;
  double duration_s = 0.5;
  std::vector<std::string> machine_ids;
  std::vector<Series> series;
  std::optional<double> speed_rpm;

  /// Throws InvalidArgument when the fleet invariants do not hold.
  void validate() const;
};

/// Single-sided amplitude spectrum. Interior bins hold 2|X_k|/n and the DC
/// (and, for even n, Nyquist) bins hold |X_k|/n, so a unit sine reads 1.0
/// at its bin.
struct Spectrum {
  std::vector<double> amplitudes;
  double bin_hz = 0.0;
  std::size_t source_length = 0;

  double nyquist_hz() const noexcept {
    return bin_hz * static_cast<double>(source_length) / 2.0;
  }
};

enum class NormMode { minmax, zscore, percentile };

std::string to_string(NormMode mode);
NormMode norm_mode_from_string(const std::string& name);

/// Linear interpolation between order statistics (q in [0, 1]).
double quantile(std::vector<double> values, double q);

/// Scales every dimension independently. Throws DegenerateScale when the
/// denominator of any dimension is below 1e-12.
Series normalize(const Series& series, NormMode mode);

/// Consecutive non-overlapping windows of round(duration_s * rate) points;
/// the trailing partial window is dropped.
std::vector<Series> split_windows(const Series& stream, double duration_s);

Spectrum fft_magnitude(const Series& series);

/// log10(max(amplitude, floor)) per bin.
Spectrum log_scale(const Spectrum& spectrum, double floor);

/// Magnitude spectra of non-overlapping frames; dim = frame/2 + 1 bins.
Series spectrogram(const Series& series, double frame_s);

/// Keeps the spectrogram dimensions whose centre frequency is <= cutoff_hz.
Series lowpass_truncate(const Series& spec_series, double cutoff_hz);

/// Frequency of the strongest non-DC bin.
double estimate_fundamental(const Spectrum& spectrum);

/// Largest amplitude within [k*f0 - hw, k*f0 + hw].
double harmonic_amplitude(const Spectrum& spectrum, double fundamental_hz, int k,
                          double half_window_hz = 5.0);

/// Linear resampling to samples_per_period points per fundamental period.
Series downsample_per_period(const Series& series, double fundamental_hz,
                             int samples_per_period = 50);

/// Views a spectrum as a 1-D series over frequency (rate = 1 / bin_hz).
Series spectrum_as_series(const Spectrum& spectrum);

}  // namespace fleetmon
