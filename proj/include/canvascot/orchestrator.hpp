#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canvascot/chat.hpp"
#include "canvascot/context.hpp"
#include "canvascot/critic.hpp"
#include "canvascot/dom.hpp"
#include "canvascot/protocol.hpp"
#include "canvascot/render.hpp"

namespace canvascot {

enum class CriticKind { Diff, Llm, None };

std::string_view to_string(CriticKind kind);
std::optional<CriticKind> parse_critic_kind(std::string_view name);

struct EpisodeConfig {
  int budget = 6;  ///< solver turns
  int max_actions_per_turn = 16;
  double canvas_width = kDefaultCanvasWidth;
  double temperature = 0;  ///< forwarded to live backends
  CriticKind critic = CriticKind::Diff;
  DiffCriticOptions diff;
  TokenMethod token_method = TokenMethod::WordPunct;

  /// Empty when usable, else what is wrong.
  std::optional<std::string> validate() const;
  RenderOptions render_options() const;
  StateOptions state_options() const;
};

struct Task {
  std::string instruction;
  std::optional<RasterImage> reference;
  /// Initial notebook content, mounted under `root` before the first turn.
  std::optional<std::string> seed;
};

/// Instruction for an SVG correction task: the goal followed by the SVG
/// user prompt with the current code filled in.
std::string svg_task_instruction(std::string_view goal, std::string_view svg_code);

struct ActionRecord {
  Action action;
  bool accepted = true;
  std::optional<std::string> diagnostic;
  std::uint64_t revision = 0;  ///< state revision after the attempt
  bool operator==(const ActionRecord&) const = default;
};

struct TrajectoryStep {
  int index = 0;  ///< 1-based solver turn
  std::string context_digest;
  Turn turn;
  std::vector<ActionRecord> actions;
  std::string state_snapshot;
  std::string render_digest;
  std::optional<CritiqueReport> critique;
  TokenCount tokens_in;
  TokenCount tokens_out;
  std::string raw_output;
  std::vector<std::string> notices;  ///< decode errors and warnings for the next tool response
  std::optional<std::string> protocol_error;
};

/// The tool response content a step leaves for the next turn.
ActionResult action_result_of(const TrajectoryStep& step);

/// Applies `action` and checks the result still lays out. Returns the
/// rejection diagnostic, or nothing when `state` was advanced.
std::optional<std::string> attempt_action(DomState& state, const Action& action, const RenderOptions& options);

enum class EpisodeStatus { Answered, BudgetExhausted, SolverFailure, InvalidTask };

std::string_view to_string(EpisodeStatus status);
std::optional<EpisodeStatus> parse_episode_status(std::string_view name);

struct EpisodeResult {
  EpisodeStatus status = EpisodeStatus::BudgetExhausted;
  std::optional<std::string> answer;
  std::vector<TrajectoryStep> trajectory;
  DomState final_state;
  std::optional<std::string> failure;  ///< solver or task error text
};

struct EpisodeObserver {
  std::function<void(int turn, const RenderedPrompt&)> on_context;
  std::function<void(const TrajectoryStep&, const RasterImage&)> on_step;
};

/// The solver/critic loop. Stops on an answer, on budget exhaustion, or when
/// the solver itself fails. `critic` may be null.
EpisodeResult run_episode(const Task& task, Solver& solver, Critic* critic, const EpisodeConfig& config,
                          const EpisodeObserver& observer = {});

}  // namespace canvascot
