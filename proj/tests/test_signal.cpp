#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fleetmon/error.hpp"
#include "fleetmon/signal.hpp"
#include "oracles.hpp"

using namespace fleetmon;

namespace {

std::vector<double> tone(double f, double rate, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * f * i / rate + phase);
  return x;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("series invariants") {
  CHECK(code_of([] { Series({}, 1, 10.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Series({1, 2, 3}, 2, 10.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Series({1, 2}, 1, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Series({1, NAN}, 1, 1.0); }) == ErrorCode::NonFiniteInput);
  const Series s({1, 2, 3, 4, 5, 6}, 2, 4.0);
  CHECK(s.size() == 3);
  CHECK(s.value(2, 1) == 6);
  CHECK(s.channel(0) == std::vector<double>{1, 3, 5});
  CHECK(s.duration() == doctest::Approx(0.75));
}

TEST_CASE("normalize examples") {
  const auto mm = normalize(Series::scalar({1, 2, 3}, 1.0), NormMode::minmax);
  CHECK(mm.channel(0) == std::vector<double>{0, 0.5, 1});
  CHECK(code_of([] { normalize(Series::scalar({5, 5, 5}, 1.0), NormMode::zscore); }) == ErrorCode::DegenerateScale);
  CHECK(code_of([] { normalize(Series::scalar({5, 5, 5}, 1.0), NormMode::minmax); }) == ErrorCode::DegenerateScale);

  std::vector<double> ramp(101);
  for (int i = 0; i <= 100; ++i) ramp[i] = i;
  const auto pct = normalize(Series::scalar(ramp, 1.0), NormMode::percentile);
  CHECK(pct.value(50) == 0.0);
  const double med = oracle::percentile(ramp, 0.5);
  const double iqr = oracle::percentile(ramp, 0.75) - oracle::percentile(ramp, 0.25);
  for (int i = 0; i <= 100; ++i) CHECK(pct.value(i) == doctest::Approx((ramp[i] - med) / iqr).epsilon(1e-12));
}

TEST_CASE("zscore uses the population deviation") {
  const auto z = normalize(Series::scalar({2, 4, 4, 4, 5, 5, 7, 9}, 1.0), NormMode::zscore);
  double mean = 0, var = 0;
  for (double v : z.channel(0)) mean += v / 8;
  for (double v : z.channel(0)) var += (v - mean) * (v - mean) / 8;
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(var == doctest::Approx(1.0));
  CHECK(z.value(0) == doctest::Approx(-1.5));
}

TEST_CASE("quantile agrees with the percentile oracle") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + rng() % 30);
    for (double& x : v) x = nd(rng);
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      CHECK(quantile(v, q) == doctest::Approx(oracle::percentile(v, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalize properties") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 50;
    const std::size_t m = 1 + rng() % 3;
    std::vector<double> x(n * m);
    for (double& v : x) v = u(rng);
    const Series s(x, m, 100.0);
    const double a = std::exp(u(rng));
    const double b = u(rng) * 10;
    std::vector<double> y(x);
    for (double& v : y) v = a * v + b;
    const auto nx = normalize(s, NormMode::minmax);
    const auto ny = normalize(Series(y, m, 100.0), NormMode::minmax);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(nx.data()[i] - ny.data()[i]) <= 1e-9);
    for (std::size_t d = 0; d < m; ++d) {
      const auto c = nx.channel(d);
      CHECK(*std::min_element(c.begin(), c.end()) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(*std::max_element(c.begin(), c.end()) == doctest::Approx(1.0).epsilon(1e-12));
      const auto raw = s.channel(d);
      const auto argmax = std::max_element(raw.begin(), raw.end()) - raw.begin();
      const auto argmin = std::min_element(raw.begin(), raw.end()) - raw.begin();
      for (auto mode : {NormMode::minmax, NormMode::zscore, NormMode::percentile}) {
        const auto out = normalize(s, mode).channel(d);
        CHECK(std::max_element(out.begin(), out.end()) - out.begin() == argmax);
        CHECK(std::min_element(out.begin(), out.end()) - out.begin() == argmin);
      }
    }
  }
}

TEST_CASE("split_windows") {
  const Series one_s = Series::scalar(std::vector<double>(100, 1.0), 100.0);
  const auto w = split_windows(one_s, 0.5);
  REQUIRE(w.size() == 2);
  CHECK(w[0].size() == 50);
  CHECK(split_windows(Series::scalar(std::vector<double>(49, 1.0), 100.0), 0.5).empty());
  const auto big = split_windows(Series::scalar(std::vector<double>(32000, 0.0), 25600.0), 0.5);
  REQUIRE(big.size() == 2);
  CHECK(big[1].size() == 12800);
  CHECK(code_of([&] { split_windows(one_s, 0.01); }) == ErrorCode::WindowTooShort);

  std::vector<double> x(1037);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * i);
  const auto parts = split_windows(Series::scalar(x, 200.0), 0.5);
  std::vector<double> joined;
  for (const auto& p : parts) joined.insert(joined.end(), p.data().begin(), p.data().end());
  CHECK(std::equal(joined.begin(), joined.end(), x.begin()));
  CHECK(x.size() - joined.size() < 100);
}

TEST_CASE("fft_magnitude") {
  const auto spec = fft_magnitude(Series::scalar(tone(50, 1000, 1000), 1000));
  CHECK(spec.amplitudes.size() == 501);
  CHECK(spec.bin_hz == 1.0);
  const auto peak = std::max_element(spec.amplitudes.begin(), spec.amplitudes.end()) - spec.amplitudes.begin();
  CHECK(peak == 50);
  CHECK(spec.amplitudes[50] == doctest::Approx(1.0));

  const auto zero = fft_magnitude(Series::scalar(std::vector<double>(64, 0.0), 64));
  for (double a : zero.amplitudes) CHECK(a == 0.0);

  auto two = tone(50, 1000, 1000);
  const auto h = tone(150, 1000, 1000, 0.2);
  for (std::size_t i = 0; i < two.size(); ++i) two[i] += h[i];
  const auto s2 = fft_magnitude(Series::scalar(two, 1000));
  const auto ref = oracle::dft_amplitudes(two);
  CHECK(s2.amplitudes[150] / s2.amplitudes[50] == doctest::Approx(ref[150] / ref[50]).epsilon(1e-9));
  CHECK(s2.amplitudes[150] / s2.amplitudes[50] == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("fft_magnitude matches the naive DFT for arbitrary lengths") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (std::size_t n : {2u, 3u, 7u, 16u, 45u, 100u, 257u}) {
    std::vector<double> x(n);
    for (double& v : x) v = nd(rng);
    const auto spec = fft_magnitude(Series::scalar(x, 10.0));
    const auto ref = oracle::dft_amplitudes(x);
    REQUIRE(spec.amplitudes.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(spec.amplitudes[k] == doctest::Approx(ref[k]).epsilon(1e-9));
    // Parseval in single-sided amplitude form.
    double energy = 0.0;
    for (double v : x) energy += v * v;
    double spectral = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
      spectral += edge ? spec.amplitudes[k] * spec.amplitudes[k] : 0.5 * spec.amplitudes[k] * spec.amplitudes[k];
    }
    CHECK(static_cast<double>(n) * spectral == doctest::Approx(energy).epsilon(1e-6));
  }
}

TEST_CASE("log_scale") {
  const Spectrum s{{1, 10, 100}, 1.0, 4};
  CHECK(log_scale(s, 1e-12).amplitudes == std::vector<double>{0, 1, 2});
  CHECK(log_scale(Spectrum{{0}, 1.0, 1}, 1e-12).amplitudes[0] == doctest::Approx(-12));
  const Spectrum r{{3, 0.5, 7, 2}, 1.0, 6};
  const auto l = log_scale(r, 1e-9).amplitudes;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK((r.amplitudes[i] < r.amplitudes[j]) == (l[i] < l[j]));
  }
}

TEST_CASE("spectrogram") {
  const Series window = Series::scalar(tone(60, 25600, 12800), 25600);
  const auto sg = spectrogram(window, 0.05);
  CHECK(sg.size() == 10);
  CHECK(sg.dim() == 641);
  REQUIRE(sg.bin_hz());
  CHECK(*sg.bin_hz() == doctest::Approx(20.0));
  for (std::size_t f = 0; f < sg.size(); ++f) {
    const auto p = sg.point(f);
    CHECK(std::max_element(p.begin(), p.end()) - p.begin() == 3);
    const auto direct = fft_magnitude(window.slice(f * 1280, 1280));
    CHECK(std::equal(p.begin(), p.end(), direct.amplitudes.begin()));
  }

  // Linear chirp: the dominant bin climbs frame by frame.
  const double rate = 8000;
  std::vector<double> chirp(8000);
  for (std::size_t i = 0; i < chirp.size(); ++i) {
    const double t = i / rate;
    chirp[i] = std::sin(2.0 * std::numbers::pi * (100 * t + 0.5 * 2000 * t * t));
  }
  const auto cs = spectrogram(Series::scalar(chirp, rate), 0.1);
  std::ptrdiff_t last = -1;
  for (std::size_t f = 0; f < cs.size(); ++f) {
    const auto p = cs.point(f);
    const auto arg = std::max_element(p.begin(), p.end()) - p.begin();
    CHECK(arg > last);
    last = arg;
  }
  CHECK(code_of([] { spectrogram(Series::scalar({1, 2, 3}, 10.0), 0.1); }) == ErrorCode::WindowTooShort);
}

TEST_CASE("lowpass_truncate") {
  // 1280-sample frames at 25600 Hz: bins every 20 Hz up to 12800 Hz.
  const auto sg = spectrogram(Series::scalar(tone(60, 25600, 12800), 25600), 0.05);
  const auto lp = lowpass_truncate(sg, 200);
  CHECK(lp.dim() == 11);
  CHECK(lp.size() == sg.size());
  CHECK(lp.value(3, 5) == sg.value(3, 5));
  CHECK(lowpass_truncate(sg, 20000) == sg);
  CHECK(code_of([&] { lowpass_truncate(sg, 10); }) == ErrorCode::CutoffBelowResolution);
}

TEST_CASE("estimate_fundamental") {
  const auto pure = fft_magnitude(Series::scalar(tone(50, 1000, 500), 1000));
  CHECK(std::abs(estimate_fundamental(pure) - 50.0) <= pure.bin_hz / 2);
  auto mix = tone(50, 1000, 1000);
  const auto h = tone(150, 1000, 1000, 0.2);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += h[i] + 10.0;
  CHECK(estimate_fundamental(fft_magnitude(Series::scalar(mix, 1000))) == 50.0);
  CHECK(code_of([] { estimate_fundamental(fft_magnitude(Series::scalar(std::vector<double>(16, 2.0), 16))); }) ==
        ErrorCode::FlatSpectrum);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = tone(20 + rng() % 200, 1000, 800, 1.0, 0.3 * trial);
    const double f = estimate_fundamental(fft_magnitude(Series::scalar(x, 1000)));
    const double c = 0.01 + (rng() % 1000);
    for (double& v : x) v *= c;
    CHECK(estimate_fundamental(fft_magnitude(Series::scalar(x, 1000))) == f);
  }
}

TEST_CASE("harmonic_amplitude") {
  const auto pure = fft_magnitude(Series::scalar(tone(50, 1000, 1000), 1000));
  CHECK(harmonic_amplitude(pure, 50, 1) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(harmonic_amplitude(pure, 50, 3) < harmonic_amplitude(pure, 50, 1));
  CHECK(harmonic_amplitude(pure, 50, 3) < 1e-9);

  auto mix = tone(50, 1000, 1000);
  const auto h = tone(150, 1000, 1000, 0.2);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += h[i];
  const auto ref = oracle::dft_amplitudes(mix);
  CHECK(harmonic_amplitude(fft_magnitude(Series::scalar(mix, 1000)), 50, 3) == doctest::Approx(ref[150]));
  CHECK(code_of([&] { harmonic_amplitude(pure, 50, 10); }) == ErrorCode::HarmonicOutOfRange);
}

TEST_CASE("downsample_per_period") {
  const auto x = tone(50, 25600, 12800);
  const auto d = downsample_per_period(Series::scalar(x, 25600), 50, 50);
  CHECK(d.size() == 1250);
  CHECK(d.sample_rate() == 2500.0);
  const auto ref = oracle::resample_linear(x, 25600, 2500);
  REQUIRE(ref.size() == d.size());
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(ref[i] - d.value(i)) <= 1e-9);

  const auto c = downsample_per_period(Series::scalar(std::vector<double>(1000, 3.5), 1000), 7.3, 11);
  for (double v : c.data()) CHECK(v == 3.5);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r(200 + rng() % 500);
    for (double& v : r) v = nd(rng);
    const double f0 = 1.0 + (rng() % 1000) / 100.0;
    const auto got = downsample_per_period(Series::scalar(r, 1000), f0, 37);
    const auto want = oracle::resample_linear(r, 1000, f0 * 37);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got.value(i) - want[i]) <= 1e-9);
  }
  CHECK(code_of([&] { downsample_per_period(Series::scalar(x, 25600), 1000, 50); }) ==
        ErrorCode::UpsamplingRequested);
}
