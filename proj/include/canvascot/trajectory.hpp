#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvascot/orchestrator.hpp"
#include "canvascot/result.hpp"

namespace canvascot {

// JSONL layout: one header line, one line per step, one end line.

struct TrajectoryHeader {
  std::string instruction;
  std::optional<RasterImage> reference;  ///< stored as base64 PNG
  std::optional<std::string> seed;
  EpisodeConfig config;
};

struct TrajectoryEnd {
  EpisodeStatus status = EpisodeStatus::BudgetExhausted;
  std::optional<std::string> answer;
  int steps = 0;
  std::optional<std::string> failure;
};

struct Trajectory {
  TrajectoryHeader header;
  std::vector<TrajectoryStep> steps;
  std::optional<TrajectoryEnd> end;  ///< missing when the run was cut short
};

TrajectoryHeader make_header(const Task& task, const EpisodeConfig& config);
TrajectoryEnd make_end(const EpisodeResult& result);

std::string header_line(const TrajectoryHeader& header);
std::string step_line(const TrajectoryStep& step);
std::string end_line(const TrajectoryEnd& end);

/// Whole trajectory as JSONL text.
std::string to_jsonl(const Trajectory& trajectory);

struct TrajectoryError {
  std::size_t line = 0;  ///< 1-based
  std::string message;
};

Result<Trajectory, TrajectoryError> parse_trajectory(std::string_view text);
Result<Trajectory, TrajectoryError> load_trajectory(const std::filesystem::path& path);

/// Append-only writer; every line is flushed as soon as it is written.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);
  ~TrajectoryWriter();
  TrajectoryWriter(const TrajectoryWriter&) = delete;
  TrajectoryWriter& operator=(const TrajectoryWriter&) = delete;

  bool ok() const { return file_ != nullptr && !failed_; }
  void write(const std::string& line);

 private:
  std::FILE* file_ = nullptr;
  bool failed_ = false;
};

struct DigestMismatch {
  int step = 0;      ///< 0 = seed/header, otherwise the step index
  std::string what;  ///< context | action N | snapshot | render | critique | turn | tokens | end
  std::string expected;
  std::string actual;

  std::string describe() const;
};

struct ReplaySummary {
  int steps = 0;
  std::string final_snapshot;
};

/// Re-applies every logged action from a fresh state and checks each step's
/// context digest, action outcomes, snapshot, render digest and (for the
/// diff critic) the critique.
Result<ReplaySummary, DigestMismatch> replay(const Trajectory& trajectory);

}  // namespace canvascot
