#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fleetmon/signal.hpp"

namespace fleetmon {

enum class SignalKind { current, vibration };

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& name);

/// Time-aligned streams of a whole fleet: one Series per machine (dim 1 for
/// current, dim 3 for X/Y/Z vibration) and an optional shaft-speed channel.
struct FleetRecording {
  SignalKind kind = SignalKind::current;
  std::vector<std::string> machine_ids;
  std::vector<Series> streams;
  std::optional<std::vector<double>> rpm;

  double sample_rate() const { return streams.front().sample_rate(); }
  std::size_t length() const { return streams.front().size(); }

  /// Throws InvalidArgument if streams disagree in length, rate or dimension.
  void validate() const;
};

/// Writes `t,<id1>,<id2>,...[,rpm]` (vibration: `<id>:X,<id>:Y,<id>:Z` per
/// machine) with shortest round-trip number formatting. Throws IoError.
void write_fleet_csv(const FleetRecording& recording, const std::filesystem::path& path);

/// Parses the format above. Throws IoError, ParseError (with line number),
/// RaggedColumns or RateMismatch.
FleetRecording read_fleet_csv(const std::filesystem::path& path);

}  // namespace fleetmon
