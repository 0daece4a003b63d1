#include "fleetmon/recording.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fleetmon/error.hpp"

namespace fleetmon {

namespace {

constexpr const char* kAxes[] = {"X", "Y", "Z"};

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line_no, std::size_t column) {
  const auto where = [&] { return "line " + std::to_string(line_no) + ", column " + std::to_string(column + 1); };
  if (field.empty()) throw Error(ErrorCode::ParseError, where() + ": missing value");
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw Error(ErrorCode::ParseError, where() + ": cannot parse '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string to_string(SignalKind kind) { return kind == SignalKind::current ? "current" : "vibration"; }

SignalKind signal_kind_from_string(const std::string& name) {
  if (name == "current") return SignalKind::current;
  if (name == "vibration") return SignalKind::vibration;
  throw Error(ErrorCode::InvalidConfig, "unknown signal kind '" + name + "'");
}

void FleetRecording::validate() const {
  if (streams.empty() || streams.size() != machine_ids.size()) {
    throw Error(ErrorCode::InvalidArgument, "recording needs one stream per machine id");
  }
  const std::size_t dim = kind == SignalKind::current ? 1 : 3;
  for (const auto& s : streams) {
    if (s.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "stream dimension does not match the signal kind");
    if (s.size() != length() || s.sample_rate() != sample_rate()) {
      throw Error(ErrorCode::InvalidArgument, "streams differ in length or sample rate");
    }
  }
  if (rpm && rpm->size() != length()) throw Error(ErrorCode::InvalidArgument, "rpm channel length mismatch");
}

void write_fleet_csv(const FleetRecording& recording, const std::filesystem::path& path) {
  recording.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");

  std::string header = "t";
  for (const auto& id : recording.machine_ids) {
    if (recording.kind == SignalKind::current) {
      header += "," + id;
    } else {
      for (const char* axis : kAxes) header += "," + id + ":" + axis;
    }
  }
  if (recording.rpm) header += ",rpm";
  out << header << '\n';

  const double rate = recording.sample_rate();
  std::string line;
  for (std::size_t i = 0; i < recording.length(); ++i) {
    line.clear();
    append_number(line, static_cast<double>(i) / rate);
    for (const auto& s : recording.streams) {
      for (double v : s.point(i)) {
        line += ',';
        append_number(line, v);
      }
    }
    if (recording.rpm) {
      line += ',';
      append_number(line, (*recording.rpm)[i]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

FleetRecording read_fleet_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2 || header.front() != "t") {
    throw Error(ErrorCode::ParseError, "line 1: header must start with 't' followed by machine columns");
  }

  FleetRecording rec;
  std::size_t data_columns = header.size() - 1;
  const bool has_rpm = header.back() == "rpm";
  if (has_rpm) --data_columns;
  const bool vibration = header[1].find(':') != std::string_view::npos;
  rec.kind = vibration ? SignalKind::vibration : SignalKind::current;
  const std::size_t dim = vibration ? 3 : 1;
  if (data_columns == 0 || data_columns % dim != 0) {
    throw Error(ErrorCode::ParseError, "line 1: vibration columns must come in X/Y/Z triples");
  }
  for (std::size_t c = 0; c < data_columns; c += dim) {
    const std::string_view name = header[1 + c];
    if (!vibration) {
      rec.machine_ids.emplace_back(name);
      continue;
    }
    const std::string_view id = name.substr(0, name.rfind(':'));
    for (std::size_t a = 0; a < 3; ++a) {
      if (header[1 + c + a] != std::string(id) + ":" + kAxes[a]) {
        throw Error(ErrorCode::ParseError, "line 1: expected column '" + std::string(id) + ":" + kAxes[a] + "'");
      }
    }
    rec.machine_ids.emplace_back(id);
  }

  const std::size_t machines = rec.machine_ids.size();
  std::vector<std::vector<double>> samples(machines);
  std::vector<double> times;
  std::vector<double> rpm;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::RaggedColumns, "line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(header.size()) + " fields, got " +
                                                std::to_string(fields.size()));
    }
    times.push_back(parse_number(fields[0], line_no, 0));
    for (std::size_t m = 0; m < machines; ++m) {
      for (std::size_t a = 0; a < dim; ++a) {
        const std::size_t col = 1 + m * dim + a;
        samples[m].push_back(parse_number(fields[col], line_no, col));
      }
    }
    if (has_rpm) rpm.push_back(parse_number(fields.back(), line_no, fields.size() - 1));
  }
  if (times.size() < 2) throw Error(ErrorCode::ParseError, "need at least two samples to infer the rate");

  const double span = times.back() - times.front();
  if (!(span > 0.0)) throw Error(ErrorCode::RateMismatch, "time column is not increasing");
  double rate = static_cast<double>(times.size() - 1) / span;
  const double step = 1.0 / rate;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - step) > 1e-6 * step) {
      throw Error(ErrorCode::RateMismatch, "non-uniform sampling at data row " + std::to_string(i + 1));
    }
  }
  if (std::abs(rate - std::round(rate)) < 1e-6 * rate) rate = std::round(rate);

  for (std::size_t m = 0; m < machines; ++m) rec.streams.emplace_back(std::move(samples[m]), dim, rate);
  if (has_rpm) rec.rpm = std::move(rpm);
  rec.validate();
  return rec;
}

}  // namespace fleetmon
