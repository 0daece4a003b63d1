#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <spdlog/spdlog.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>

#include "fleetmon/error.hpp"
#include "fleetmon/fleetsim.hpp"
#include "fleetmon/pipeline.hpp"
#include "fleetmon/report.hpp"
#include "scenarios.hpp"

using namespace fleetmon;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file, std::ios::binary) << text;
    return path / file;
  }
};

ScenarioConfig short_current(double duration_s = 3.0) {
  auto c = scenarios::stationary(820.0);
  c.duration_s = duration_s;
  return c;
}

ScenarioConfig short_vibration(double duration_s = 3.0) {
  auto c = short_current(duration_s);
  c.signal = SignalKind::vibration;
  return c;
}

VariantConfig variant(Variant v) {
  VariantConfig c;
  c.variant = v;
  c.debounce_n = 2;
  return c;
}

FleetRecording permuted(const FleetRecording& rec, const std::vector<std::size_t>& order) {
  FleetRecording out = rec;
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.machine_ids[k] = rec.machine_ids[order[k]];
    out.streams[k] = rec.streams[order[k]];
  }
  return out;
}

// Per machine id: (included, score, instant, debounced) per window.
std::map<std::string, std::vector<std::tuple<bool, double, bool, bool>>> by_id(const RunResult& r) {
  std::map<std::string, std::vector<std::tuple<bool, double, bool, bool>>> out;
  for (const auto& w : r.windows) {
    for (std::size_t m = 0; m < r.machine_ids.size(); ++m) {
      const auto& v = w.verdict.machines[m];
      out[r.machine_ids[m]].emplace_back(v.included, v.score, v.instant_anomalous, v.debounced_faulty);
    }
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLEETMON_CLI) + " -q " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("CSV ingestion errors") {
  TempDir dir("fleetmon_test_csv");
  CHECK(code_of([&] { ingest_csv(dir.path / "missing.csv"); }) == ErrorCode::IoError);
  CHECK(code_of([&] { ingest_csv(dir.write("a.csv", "time,a,b\n0,1,2\n1,1,2\n")); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv(dir.write("b.csv", "t,a,b\n0,1,2\n0.5,1\n")); }) == ErrorCode::RaggedColumns);
  CHECK(code_of([&] { ingest_csv(dir.write("c.csv", "t,a,b\n0,1,2\n0.5,1,x\n")); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv(dir.write("d.csv", "t,a,b\n0,1,2\n0.5,1,2\n0.7,1,2\n")); }) == ErrorCode::RateMismatch);
  CHECK(code_of([&] { ingest_csv(dir.write("e.csv", "t,a:X,a:Y\n0,1,2\n0.5,1,2\n")); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv(dir.write("f.csv", "")); }) == ErrorCode::ParseError);

  const auto ok = ingest_csv(dir.write("g.csv", "t,a,b,rpm\n0,1,2,10\n0.25,3,4,20\n0.5,5,6,30\n"));
  CHECK(ok.kind == SignalKind::current);
  CHECK(ok.machine_ids == std::vector<std::string>{"a", "b"});
  CHECK(ok.sample_rate() == 4.0);
  CHECK(ok.streams[1].value(2) == 6.0);
  REQUIRE(ok.rpm);
  CHECK(ok.rpm->back() == 30.0);
}

TEST_CASE("windowing") {
  const auto [rec, truth] = generate(short_current(2.3));
  const auto windows = make_windows(rec, 0.5);
  REQUIRE(windows.size() == 4);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    CHECK(windows[k].window_index == k);
    CHECK(windows[k].series[0].size() == 12800);
    REQUIRE(windows[k].speed_rpm);
    CHECK(*windows[k].speed_rpm == doctest::Approx(820.0));
  }
  CHECK(windows[2].series[3].value(0) == rec.streams[3].value(25600));
  CHECK(code_of([&] { align_truth({"D1_1", "nope"}, truth); }) == ErrorCode::UnknownMachine);
}

TEST_CASE("variant configuration") {
  VariantConfig c;
  CHECK(c.effective_normalization() == NormMode::minmax);
  c.variant = Variant::vibration_features;
  CHECK(c.effective_normalization() == NormMode::percentile);
  const auto back = variant_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(code_of([] { variant_config_from_json({{"variant", "nonsense"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { variant_config_from_json({{"thr_cc", 1.5}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { variant_config_from_json({{"debounce_n", 0}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { variant_config_from_json({{"psi", "x"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { baseline_config_from_json({{"sigma_grid", {-1.0}}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("identical machines are never anomalous") {
  const auto [rec, truth] = generate(short_current(1.5));
  FleetRecording same = rec;
  for (auto& s : same.streams) s = rec.streams[0];
  for (const auto v : {Variant::waveform, Variant::harmonic, Variant::spectrogram}) {
    const auto r = run_variant(same, variant(v));
    for (const auto& w : r.windows) {
      CHECK_FALSE(w.skipped);
      REQUIRE(w.partition);
      CHECK(w.partition->clusters.size() == 1);
      for (const auto& m : w.verdict.machines) {
        CHECK(m.score == 0.0);
        CHECK_FALSE(m.instant_anomalous);
      }
    }
  }
}

TEST_CASE("results do not depend on machine order") {
  const auto [rec, truth] = generate(short_current(2.0));
  const auto [vib, vtruth] = generate(short_vibration(2.0));
  std::vector<std::size_t> order(rec.machine_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  for (const auto v : {Variant::waveform, Variant::harmonic, Variant::spectrogram, Variant::vibration_features}) {
    const auto& base = v == Variant::vibration_features ? vib : rec;
    const auto a = run_variant(base, variant(v));
    const auto b = run_variant(permuted(base, order), variant(v));
    CHECK(by_id(a) == by_id(b));
  }
}

TEST_CASE("variants share the window grid and the evaluation protocol") {
  const auto [rec, truth] = generate(short_current(3.0));
  std::vector<std::size_t> counts;
  for (const auto v : {Variant::waveform, Variant::harmonic, Variant::spectrogram}) {
    auto cfg = variant(v);
    cfg.thr_cc_grid = {0.8, cfg.thr_cc};
    const auto r = run_variant(rec, cfg, truth);
    counts.push_back(r.windows.size());
    REQUIRE(r.counts);
    CHECK(r.counts->total() == (r.windows.size() - (cfg.debounce_n - 1)) * rec.machine_ids.size());
    REQUIRE(r.thr_cc_sweep);
    CHECK(r.thr_cc_sweep->rows.back().counts == *r.counts);
    for (std::size_t k = 0; k < r.windows.size(); ++k) CHECK(r.windows[k].window_index == k);
  }
  CHECK(std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 6; }));

  const auto [vib, vtruth] = generate(short_vibration(3.0));
  const auto rv = run_variant(vib, variant(Variant::vibration_features), vtruth);
  CHECK(rv.windows.size() == 6);
  CHECK(code_of([&] { run_variant(vib, variant(Variant::harmonic)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { run_variant(rec, variant(Variant::vibration_features)); }) == ErrorCode::InvalidConfig);

  const auto b = run_baseline(rec, BaselineConfig{}, truth);
  CHECK(b.window_count == 6);
  CHECK(b.table.rows.size() == default_sigma_grid().size());
  CHECK(b.table.rows[0].counts.total() == (6 - 4) * rec.machine_ids.size());
}

TEST_CASE("a broken machine is excluded, not fatal") {
  spdlog::set_level(spdlog::level::off);
  auto [rec, truth] = generate(short_current(1.0));
  rec.streams[4] = Series::scalar(std::vector<double>(rec.length(), 0.0), rec.sample_rate());
  const auto r = run_variant(rec, variant(Variant::harmonic));
  for (const auto& w : r.windows) {
    CHECK_FALSE(w.skipped);
    CHECK_FALSE(w.verdict.machines[4].included);
    CHECK(w.members.size() == rec.machine_ids.size() - 1);
  }
  for (std::size_t m = 0; m < 6; ++m) {
    rec.streams[m] = Series::scalar(std::vector<double>(rec.length(), 0.0), rec.sample_rate());
  }
  const auto skipped = run_variant(rec, variant(Variant::harmonic));
  for (const auto& w : skipped.windows) CHECK(w.skipped);
  spdlog::set_level(spdlog::level::warn);

  FleetRecording two = rec;
  two.machine_ids.resize(2);
  two.streams.erase(two.streams.begin() + 2, two.streams.end());
  CHECK(code_of([&] { run_variant(two, variant(Variant::harmonic)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("results serialise deterministically") {
  const auto [rec, truth] = generate(short_current(1.5));
  const auto a = to_json(run_variant(rec, variant(Variant::waveform), truth), true).dump();
  const auto b = to_json(run_variant(rec, variant(Variant::waveform), truth), true).dump();
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK(j["windows"].size() == 3);
  CHECK(j["windows"][0]["matrix"]["values"].size() == 100);
  CHECK(j.contains("thr_cc_sweep"));
}

TEST_CASE("report numbers match the run") {
  const auto [rec, truth] = generate(short_current(3.0));
  auto cfg = variant(Variant::harmonic);
  const auto r = run_variant(rec, cfg, truth, {.retain_signals = true});
  const std::size_t k = 4;
  const auto data = report_data(r, k);
  const auto& w = r.windows[k];
  REQUIRE(data["machines"].size() == w.members.size());
  std::size_t debounced = 0;
  for (std::size_t i = 0; i < w.members.size(); ++i) {
    const auto& v = w.verdict.machines[w.members[i]];
    CHECK(data["machines"][i]["id"] == r.machine_ids[w.members[i]]);
    CHECK(data["machines"][i]["score"].get<double>() == v.score);
    CHECK(data["machines"][i]["debounced_faulty"].get<bool>() == v.debounced_faulty);
    debounced += v.debounced_faulty;
  }
  CHECK(debounced == 2);
  CHECK(data["signals"].size() == w.members.size());

  const std::string svg = render_report_svg(r, k);
  const auto count = [&](const std::string& pattern) {
    const std::regex re(pattern);
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(svg.begin(), svg.end(), re), std::sregex_iterator()));
  };
  CHECK(count("class=\"flagged\"") == debounced);
  CHECK(count("class=\"normal\"") == w.members.size() - debounced);
  CHECK(count("class=\"thr_ad\"") == 1);
  CHECK(count("class=\"cell\"") == w.members.size() * w.members.size());

  TempDir dir("fleetmon_test_report");
  const auto files = emit_report(r, k, dir.path);
  CHECK(fs::exists(files.svg));
  std::ifstream in(files.json);
  CHECK(nlohmann::json::parse(in) == data);
  CHECK(code_of([&] { report_data(r, 99); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("command line exit codes") {
  TempDir dir("fleetmon_test_cli");
  const std::string d = dir.path.string();
  const auto config = dir.write("config.json", R"({"scenario": {"duration_s": 2.0}})");
  CHECK(run_cli("simulate --config " + config.string() + " --out " + d + "/data") == 0);
  CHECK(fs::exists(dir.path / "data" / "fleet.csv"));
  CHECK(fs::exists(dir.path / "data" / "scenario.json"));
  CHECK(run_cli("analyze --data " + d + "/data --variant harmonic --out " + d + "/res") == 0);
  CHECK(fs::exists(dir.path / "res" / "harmonic.json"));
  CHECK(run_cli("baseline --data " + d + "/data --out " + d + "/res") == 0);
  CHECK(fs::exists(dir.path / "res" / "baseline.json"));
  CHECK(run_cli("report --data " + d + "/data --variant harmonic --window 1 --out " + d + "/fig/w1.svg") == 0);
  CHECK(fs::exists(dir.path / "fig" / "w1.json"));

  CHECK(run_cli("analyze --data " + d + "/data --thr-cc 2") == 2);
  CHECK(run_cli("analyze --data " + d + "/data --variant nonsense") == 2);
  CHECK(run_cli("frobnicate") == 2);
  const auto bad = dir.write("bad.json", "{ not json");
  CHECK(run_cli("--config " + bad.string() + " simulate --out " + d + "/x") == 2);
  CHECK(run_cli("analyze --data " + d + "/nowhere.csv") == 3);
  dir.write("broken.csv", "t,a,b\n0,1\n");
  CHECK(run_cli("analyze --data " + d + "/broken.csv") == 3);
}
