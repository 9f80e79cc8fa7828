#pragma once

// The committed bar-chart correction fixture.

#include <filesystem>

#include "canvascot/chat.hpp"
#include "canvascot/image_io.hpp"
#include "canvascot/trajectory.hpp"

namespace fixture {

inline std::filesystem::path bar_chart_dir() { return std::filesystem::path(CANVASCOT_TEST_DATA) / "fixtures/bar_chart"; }

inline canvascot::Trajectory bar_chart_trajectory() {
  auto t = canvascot::load_trajectory(bar_chart_dir() / "trajectory.jsonl");
  if (!t.ok()) throw std::runtime_error(t.error().message);
  return t.value();
}

inline canvascot::Task task_of(const canvascot::TrajectoryHeader& h) {
  return canvascot::Task{h.instruction, h.reference, h.seed};
}

inline canvascot::Cassette bar_chart_cassette() {
  auto c = canvascot::Cassette::load(bar_chart_dir() / "cassette.json");
  if (!c.ok()) throw std::runtime_error(c.error());
  return c.value();
}

}  // namespace fixture
