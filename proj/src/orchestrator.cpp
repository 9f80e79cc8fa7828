#include "canvascot/orchestrator.hpp"

#include "canvascot/digest.hpp"
#include "canvascot/image_io.hpp"
#include "canvascot/prompts.hpp"

namespace canvascot {

std::string_view to_string(CriticKind kind) {
  switch (kind) {
    case CriticKind::Diff: return "diff";
    case CriticKind::Llm: return "llm";
    case CriticKind::None: return "none";
  }
  return "diff";
}

std::optional<CriticKind> parse_critic_kind(std::string_view name) {
  if (name == "diff") return CriticKind::Diff;
  if (name == "llm") return CriticKind::Llm;
  if (name == "none") return CriticKind::None;
  return std::nullopt;
}

std::string_view to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::Answered: return "Answered";
    case EpisodeStatus::BudgetExhausted: return "BudgetExhausted";
    case EpisodeStatus::SolverFailure: return "SolverFailure";
    case EpisodeStatus::InvalidTask: return "InvalidTask";
  }
  return "SolverFailure";
}

std::optional<EpisodeStatus> parse_episode_status(std::string_view name) {
  for (auto s : {EpisodeStatus::Answered, EpisodeStatus::BudgetExhausted, EpisodeStatus::SolverFailure,
                 EpisodeStatus::InvalidTask}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<std::string> EpisodeConfig::validate() const {
  if (budget < 1) return "budget must be at least 1";
  if (max_actions_per_turn < 1) return "max actions per turn must be at least 1";
  if (!(canvas_width >= 16 && canvas_width <= 4096)) return "canvas width must be within 16..4096";
  if (!(temperature >= 0 && temperature <= 2)) return "temperature must be within 0..2";
  if (!(diff.threshold >= 0 && diff.threshold <= 1)) return "critic threshold must be within 0..1";
  if (diff.tolerance < 0 || diff.tolerance > 255) return "critic tolerance must be within 0..255";
  if (diff.grid < 1) return "critic grid must be at least 1";
  return std::nullopt;
}

RenderOptions EpisodeConfig::render_options() const {
  RenderOptions o;
  o.canvas_width = canvas_width;
  return o;
}

StateOptions EpisodeConfig::state_options() const { return StateOptions{canvas_width}; }

std::string svg_task_instruction(std::string_view goal, std::string_view svg_code) {
  std::string body = prompts::fill(prompts::user_template(), "{current_svg_code}", svg_code);
  if (goal.empty()) return body;
  return std::string(goal) + "\n\n" + body;
}

ActionResult action_result_of(const TrajectoryStep& step) {
  ActionResult r;
  for (const auto& a : step.actions) {
    std::string tool(tool_name(a.action));
    r.tools.push_back(tool);
    if (a.accepted) continue;
    std::string target = std::visit(
        [](const auto& x) -> std::string {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, InsertAction>) {
            return x.root_id.value_or(std::string(kRootId));
          } else if constexpr (std::is_same_v<T, ClearAction>) {
            return "";
          } else {
            return x.target_id;
          }
        },
        a.action);
    r.rejections.push_back(tool + (target.empty() ? "" : " " + target) + ": " + a.diagnostic.value_or("rejected"));
  }
  r.notices = step.notices;
  if (step.protocol_error) r.notices.insert(r.notices.begin(), *step.protocol_error);
  return r;
}

std::optional<std::string> attempt_action(DomState& state, const Action& action, const RenderOptions& options) {
  auto next = canvascot::apply(state, action);
  if (!next) return next.error().describe();
  auto height = measure_height(next.value(), options);
  if (!height) return "CanvasOverflow: " + height.error().message;
  state = std::move(next.value());
  return std::nullopt;
}

namespace {

std::string png_digest(const RasterImage& image) { return sha256_hex(encode_png(image)); }

}  // namespace

EpisodeResult run_episode(const Task& task, Solver& solver, Critic* critic, const EpisodeConfig& config,
                          const EpisodeObserver& observer) {
  EpisodeResult result;
  if (auto bad = config.validate()) {
    result.status = EpisodeStatus::InvalidTask;
    result.failure = *bad;
    return result;
  }
  const RenderOptions ropts = config.render_options();
  DomState state = new_state(config.state_options());
  std::vector<HistoryEntry> history;

  if (task.seed) {
    Action seed = InsertAction{*task.seed, std::string(kRootId), std::nullopt};
    if (auto err = attempt_action(state, seed, ropts)) {
      result.status = EpisodeStatus::InvalidTask;
      result.failure = "seed rejected: " + *err;
      result.final_state = std::move(state);
      return result;
    }
    history.push_back(HistoryEntry{0, state.revision(), seed, true, std::nullopt});
  }

  auto first = render(state, ropts);
  // Layout was checked when the seed went in; an empty state always fits.
  RasterImage current = std::move(first.value().image);
  std::optional<CritiqueReport> last_critique;
  std::optional<ActionResult> last_result;

  for (int t = 1; t <= config.budget; ++t) {
    Context ctx = build_context(task.instruction, task.reference, history, current, last_critique, last_result);
    RenderedPrompt prompt = render_prompt(ctx);
    if (observer.on_context) observer.on_context(t, prompt);

    auto reply = solver.respond(prompt);
    if (!reply) {
      result.status = EpisodeStatus::SolverFailure;
      result.failure = reply.error().message;
      break;
    }

    TrajectoryStep step;
    step.index = t;
    step.context_digest = prompt.digest;
    step.raw_output = std::move(reply.value());
    step.tokens_in = count_tokens(prompt.text, config.token_method);
    step.tokens_out = count_tokens(step.raw_output, config.token_method);

    auto parsed = parse_turn(step.raw_output);
    if (!parsed) {
      // Turn consumed; the error goes back to the solver in the next response.
      step.protocol_error = "ProtocolError " + parsed.error().describe();
      step.state_snapshot = serialize(state);
      step.render_digest = png_digest(current);
      last_result = action_result_of(step);
      last_critique.reset();
      if (observer.on_step) observer.on_step(step, current);
      result.trajectory.push_back(std::move(step));
      continue;
    }
    step.turn = std::move(parsed.value());

    for (std::size_t k = 0; k < step.turn.tool_calls.size(); ++k) {
      if (k >= static_cast<std::size_t>(config.max_actions_per_turn)) {
        step.notices.push_back("tool_call " + std::to_string(k + 1) + " and later ignored: at most " +
                               std::to_string(config.max_actions_per_turn) + " calls per turn");
        break;
      }
      auto decoded = decode_tool_call(step.turn.tool_calls[k]);
      if (!decoded) {
        step.notices.push_back("tool_call " + std::to_string(k + 1) + ": " + decoded.error().describe());
        continue;
      }
      ActionRecord rec{std::move(decoded.value()), true, std::nullopt, 0};
      if (auto err = attempt_action(state, rec.action, ropts)) {
        rec.accepted = false;
        rec.diagnostic = std::move(err);
      }
      rec.revision = state.revision();
      history.push_back(HistoryEntry{t, rec.revision, rec.action, rec.accepted, rec.diagnostic});
      step.actions.push_back(std::move(rec));
    }
    if (step.turn.answer_regions > 1) {
      step.notices.push_back(std::to_string(step.turn.answer_regions) + " answer regions; the first one is used");
    }

    auto rendered = render(state, ropts);
    RenderResult rr = std::move(rendered.value());
    current = rr.image;
    step.state_snapshot = serialize(state);
    step.render_digest = png_digest(current);

    if (step.turn.answer) {
      result.answer = step.turn.answer;
      result.status = EpisodeStatus::Answered;
      if (observer.on_step) observer.on_step(step, current);
      result.trajectory.push_back(std::move(step));
      break;
    }

    last_critique.reset();
    if (critic) {
      CritiqueInput input{task.instruction, task.reference ? &*task.reference : nullptr, rr};
      auto report = critic->critique(input);
      if (report) {
        last_critique = std::move(report.value());
      } else {
        step.notices.push_back("critic unavailable: " + report.error().message);
      }
    }
    step.critique = last_critique;
    last_result = action_result_of(step);
    if (observer.on_step) observer.on_step(step, current);
    result.trajectory.push_back(std::move(step));
  }

  if (result.status == EpisodeStatus::BudgetExhausted && result.answer) result.status = EpisodeStatus::Answered;
  result.final_state = std::move(state);
  return result;
}

}  // namespace canvascot
