// canvascot: run, replay, stats, render, validate.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "canvascot/config.hpp"
#include "canvascot/digest.hpp"
#include "canvascot/image_io.hpp"
#include "canvascot/trajectory.hpp"
#include "canvascot/workload.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace canvascot;
using json = nlohmann::json;

namespace {

// Stable exit codes; see README.
enum Exit : int {
  kOk = 0,
  kIoError = 1,
  kUsage = 2,
  kBudgetExhausted = 3,
  kSolverFailure = 4,
  kDigestMismatch = 5,
  kInvalid = 6,
  kRenderError = 7,
};

std::mutex g_out;

void say(const std::string& line) {
  std::lock_guard lock(g_out);
  std::cout << line << '\n' << std::flush;
}

void complain(const std::string& line) {
  std::lock_guard lock(g_out);
  std::cerr << "canvascot: " << line << '\n' << std::flush;
}

struct TaskFile {
  Task task;
  fs::path image;  // empty when the task has none
};

// {"instruction": str} or {"goal": str, "seed": "<svg ...>", "svgTemplate": true}
// plus optional "seed" and "image" (relative to the task file).
Result<TaskFile, std::string> load_task(const fs::path& path) {
  auto text = read_file(path);
  if (!text) return text.error().message;
  json j = json::parse(text.value(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return path.string() + ": task file is not a JSON object";
  TaskFile out;
  try {
    std::string goal = j.value("goal", j.value("instruction", std::string()));
    if (auto it = j.find("seed"); it != j.end() && it->is_string()) out.task.seed = it->get<std::string>();
    if (j.value("svgTemplate", false)) {
      if (!out.task.seed) return path.string() + ": svgTemplate needs a seed";
      out.task.instruction = svg_task_instruction(goal, *out.task.seed);
    } else {
      out.task.instruction = goal;
    }
    if (out.task.instruction.empty()) return path.string() + ": task has no instruction";
    if (auto it = j.find("image"); it != j.end() && it->is_string()) {
      out.image = path.parent_path() / it->get<std::string>();
    }
  } catch (const json::exception& e) {
    return path.string() + ": " + e.what();
  }
  return out;
}

Result<RasterImage, std::string> load_png(const fs::path& path) {
  auto bytes = read_file(path);
  if (!bytes) return bytes.error().message;
  auto img = decode_png(bytes.value());
  if (!img) return path.string() + ": " + img.error();
  return img;
}

Result<std::vector<std::string>, std::string> load_script(const fs::path& path) {
  auto text = read_file(path);
  if (!text) return text.error().message;
  json j = json::parse(text.value(), nullptr, false);
  if (j.is_discarded() || !j.is_array()) return path.string() + ": script must be a JSON array of strings";
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) return path.string() + ": script entries must be strings";
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string summary_text(const EpisodeResult& r) {
  std::string s = "status: " + std::string(to_string(r.status)) + "\n";
  s += "steps: " + std::to_string(r.trajectory.size()) + "\n";
  std::size_t tin = 0, tout = 0;
  for (const auto& st : r.trajectory) tin += st.tokens_in.count, tout += st.tokens_out.count;
  s += "tokens_in: " + std::to_string(tin) + "\n";
  s += "tokens_out: " + std::to_string(tout) + "\n";
  if (r.failure) s += "failure: " + *r.failure + "\n";
  s += "answer:\n";
  if (r.answer) s += *r.answer + "\n";
  return s;
}

int run_one(const fs::path& task_path, const CliConfig& cfg, const std::optional<fs::path>& image_override,
            const fs::path& out_dir) {
  auto tf = load_task(task_path);
  if (!tf) {
    complain(tf.error());
    return kIoError;
  }
  Task task = std::move(tf.value().task);
  fs::path image_path = image_override ? *image_override : tf.value().image;
  if (!image_path.empty()) {
    auto img = load_png(image_path);
    if (!img) {
      complain(img.error());
      return kIoError;
    }
    task.reference = std::move(img.value());
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    complain("cannot create " + out_dir.string() + ": " + ec.message());
    return kIoError;
  }
  if (auto err = write_file(out_dir / "config.txt", describe_config(cfg))) {
    complain(*err);
    return kIoError;
  }

  // Solver backend.
  std::unique_ptr<Solver> base;
  std::unique_ptr<HttpChatClient> http;
  switch (cfg.backend) {
    case BackendKind::Cassette: {
      if (!cfg.cassette) {
        complain("backend cassette needs --cassette");
        return kUsage;
      }
      auto c = Cassette::load(*cfg.cassette);
      if (!c) {
        complain(c.error());
        return kIoError;
      }
      base = std::make_unique<CassetteSolver>(std::move(c.value()));
      break;
    }
    case BackendKind::Script: {
      if (!cfg.script) {
        complain("backend script needs --script");
        return kUsage;
      }
      auto s = load_script(*cfg.script);
      if (!s) {
        complain(s.error());
        return kIoError;
      }
      base = std::make_unique<ScriptedSolver>(std::move(s.value()));
      break;
    }
    case BackendKind::Http: {
      if (cfg.http.endpoint.empty() || cfg.http.model.empty()) {
        complain("backend http needs endpoint and model");
        return kUsage;
      }
      http = std::make_unique<HttpChatClient>(cfg.http);
      base = std::make_unique<ChatSolver>(*http);
      break;
    }
  }
  std::unique_ptr<RecordingSolver> recorder;
  Solver* solver = base.get();
  if (cfg.record) {
    recorder = std::make_unique<RecordingSolver>(*base);
    solver = recorder.get();
  }

  std::unique_ptr<Critic> critic;
  std::unique_ptr<HttpChatClient> critic_http;
  if (cfg.episode.critic == CriticKind::Diff) {
    critic = std::make_unique<DiffCritic>(cfg.episode.diff);
  } else if (cfg.episode.critic == CriticKind::Llm) {
    HttpChatConfig cc = cfg.http;
    if (!cfg.critic_endpoint.empty()) cc.endpoint = cfg.critic_endpoint;
    if (!cfg.critic_model.empty()) cc.model = cfg.critic_model;
    if (cc.endpoint.empty() || cc.model.empty()) {
      complain("critic llm needs an endpoint and model");
      return kUsage;
    }
    critic_http = std::make_unique<HttpChatClient>(cc);
    critic = std::make_unique<LlmCritic>(*critic_http);
  }

  TrajectoryWriter writer(out_dir / "trajectory.jsonl");
  if (!writer.ok()) {
    complain("cannot write " + (out_dir / "trajectory.jsonl").string());
    return kIoError;
  }
  writer.write(header_line(make_header(task, cfg.episode)));
  bool io_failed = false;
  EpisodeObserver obs;
  obs.on_step = [&](const TrajectoryStep& step, const RasterImage& image) {
    writer.write(step_line(step));
    if (auto err = write_file(out_dir / ("step_" + std::to_string(step.index) + ".png"), encode_png(image))) {
      complain(*err);
      io_failed = true;
    }
  };

  EpisodeResult result = run_episode(task, *solver, critic.get(), cfg.episode, obs);
  writer.write(end_line(make_end(result)));

  if (auto err = write_file(out_dir / "final.html", serialize(result.final_state))) complain(*err), io_failed = true;
  if (auto err = write_file(out_dir / "summary.txt", summary_text(result))) complain(*err), io_failed = true;
  if (recorder) {
    if (auto err = recorder->cassette().save(out_dir / "cassette.json")) complain(*err), io_failed = true;
  }
  if (!writer.ok()) complain("write to trajectory.jsonl failed"), io_failed = true;

  say(out_dir.string() + ": " + std::string(to_string(result.status)) + " after " +
      std::to_string(result.trajectory.size()) + " steps");
  if (result.failure) complain(*result.failure);
  if (io_failed) return kIoError;
  switch (result.status) {
    case EpisodeStatus::Answered: return kOk;
    case EpisodeStatus::BudgetExhausted: return kBudgetExhausted;
    case EpisodeStatus::SolverFailure: return kSolverFailure;
    case EpisodeStatus::InvalidTask: return kInvalid;
  }
  return kSolverFailure;
}

int cmd_replay(const fs::path& path) {
  auto t = load_trajectory(path);
  if (!t) {
    complain(t.error().message);
    return kIoError;
  }
  auto r = replay(t.value());
  if (!r) {
    complain(path.string() + ": " + r.error().describe());
    return kDigestMismatch;
  }
  say(path.string() + ": " + std::to_string(r.value().steps) + " steps verified");
  return kOk;
}

int cmd_stats(const std::vector<fs::path>& files, const std::optional<fs::path>& csv_path, bool synthetic) {
  std::string csv = "file,step,tokens_in,tokens_out,method,actions,accepted\n";
  for (const auto& f : files) {
    auto t = load_trajectory(f);
    if (!t) {
      complain(t.error().message);
      return kIoError;
    }
    std::printf("%s\n%6s %10s %10s %8s %8s\n", f.string().c_str(), "step", "tokens_in", "tokens_out", "actions",
                "accepted");
    std::size_t tin = 0, tout = 0;
    for (const auto& s : t.value().steps) {
      std::size_t acc = 0;
      for (const auto& a : s.actions) acc += a.accepted;
      std::printf("%6d %10zu %10zu %8zu %8zu\n", s.index, s.tokens_in.count, s.tokens_out.count, s.actions.size(), acc);
      tin += s.tokens_in.count, tout += s.tokens_out.count;
      csv += f.string() + "," + std::to_string(s.index) + "," + std::to_string(s.tokens_in.count) + "," +
             std::to_string(s.tokens_out.count) + "," + std::string(to_string(s.tokens_out.method)) + "," +
             std::to_string(s.actions.size()) + "," + std::to_string(acc) + "\n";
    }
    std::printf("%6s %10zu %10zu\n\n", "total", tin, tout);
  }
  if (synthetic) {
    std::printf("%6s %14s %8s %8s\n", "N", "regeneration", "modify", "ratio");
    for (int n : {10, 100, 1000}) {
      CorrectionCost c = correction_cost(n);
      std::printf("%6d %14zu %8zu %8.2f\n", n, c.regeneration, c.modify, c.ratio());
    }
  }
  if (csv_path) {
    if (auto err = write_file(*csv_path, csv)) {
      complain(*err);
      return kIoError;
    }
  }
  return kOk;
}

int cmd_render(const fs::path& snapshot, const fs::path& out, double width) {
  auto text = read_file(snapshot);
  if (!text) {
    complain(text.error().message);
    return kIoError;
  }
  auto state = parse_document(text.value(), StateOptions{width});
  if (!state) {
    complain(snapshot.string() + ": " + state.error().describe());
    return kInvalid;
  }
  RenderOptions ro;
  ro.canvas_width = width;
  auto r = render(state.value(), ro);
  if (!r) {
    complain(snapshot.string() + ": " + r.error().message);
    return kRenderError;
  }
  std::string png = encode_png(r.value().image);
  if (auto err = write_file(out, png)) {
    complain(*err);
    return kIoError;
  }
  say(out.string() + " " + std::to_string(r.value().image.width) + "x" + std::to_string(r.value().image.height) +
      " sha256:" + sha256_hex(png));
  return kOk;
}

int cmd_validate(const fs::path& fragment, const std::optional<fs::path>& state_path, double width) {
  auto text = read_file(fragment);
  if (!text) {
    complain(text.error().message);
    return kIoError;
  }
  DomState state = new_state(StateOptions{width});
  if (state_path) {
    auto doc = read_file(*state_path);
    if (!doc) {
      complain(doc.error().message);
      return kIoError;
    }
    auto parsed = parse_document(doc.value(), StateOptions{width});
    if (!parsed) {
      complain(state_path->string() + ": " + parsed.error().describe());
      return kInvalid;
    }
    state = std::move(parsed.value());
  }
  auto frag = parse_fragment(text.value());
  if (!frag) {
    say(fragment.string() + ": " + frag.error().describe());
    return kInvalid;
  }
  if (auto diag = validate_fragment(frag.value(), state)) {
    say(fragment.string() + ": " + diag->describe());
    return kInvalid;
  }
  say(fragment.string() + ": ok (" + std::to_string(frag.value().introduced_ids.size()) + " ids)");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canvascot: DOM notebook reasoning substrate"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one or more episodes");
  std::vector<fs::path> tasks;
  std::optional<fs::path> image, config_file, cassette, script;
  std::optional<int> budget, jobs;
  std::optional<std::string> backend, critic;
  std::optional<fs::path> out;
  bool record = false;
  run->add_option("--task", tasks, "task JSON file (repeatable)")->required()->check(CLI::ExistingFile);
  run->add_option("--image", image, "reference PNG")->check(CLI::ExistingFile);
  run->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
  run->add_option("--budget", budget, "max solver turns")->check(CLI::Range(1, 1000));
  run->add_option("--backend", backend, "http | cassette | script");
  run->add_option("--cassette", cassette, "recorded responses keyed by context digest");
  run->add_option("--script", script, "JSON array of scripted responses");
  run->add_option("--critic", critic, "diff | llm | none");
  run->add_option("--out", out, "output directory");
  run->add_option("--jobs", jobs, "parallel episodes")->check(CLI::Range(1, 256));
  run->add_flag("--record", record, "save backend responses as cassette.json");

  auto* rep = app.add_subcommand("replay", "re-apply a trajectory and verify digests");
  fs::path replay_file;
  rep->add_option("trajectory", replay_file)->required();

  auto* stats = app.add_subcommand("stats", "per-step token table");
  std::vector<fs::path> stat_files;
  std::optional<fs::path> csv;
  bool synthetic = false;
  stats->add_option("files", stat_files, "trajectory files");
  stats->add_option("--csv", csv, "also write a CSV");
  stats->add_flag("--synthetic", synthetic, "add the regeneration vs modify comparison for N = 10, 100, 1000");

  auto* rend = app.add_subcommand("render", "render a snapshot document to PNG");
  fs::path snapshot, png_out;
  double width = kDefaultCanvasWidth;
  rend->add_option("snapshot", snapshot)->required();
  rend->add_option("--out", png_out)->required();
  rend->add_option("--width", width)->check(CLI::Range(16.0, 4096.0));

  auto* val = app.add_subcommand("validate", "parse and validate a fragment");
  fs::path fragment;
  std::optional<fs::path> against;
  val->add_option("fragment", fragment)->required();
  val->add_option("--state", against, "snapshot to check ids against");
  val->add_option("--width", width)->check(CLI::Range(16.0, 4096.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*rep) return cmd_replay(replay_file);
  if (*stats) {
    if (stat_files.empty() && !synthetic) {
      complain("stats needs at least one trajectory file");
      return kUsage;
    }
    return cmd_stats(stat_files, csv, synthetic);
  }
  if (*rend) return cmd_render(snapshot, png_out, width);
  if (*val) return cmd_validate(fragment, against, width);

  // run: defaults < config file < flags; the key only from the environment.
  CliConfig cfg;
  if (config_file) {
    auto loaded = load_config(*config_file, cfg);
    if (!loaded) {
      complain(loaded.error().describe());
      return kIoError;
    }
    cfg = std::move(loaded.value());
  }
  auto set = [&](const char* key, const std::string& value) {
    if (auto err = set_config_value(cfg, key, value)) {
      complain("--" + std::string(key) + ": " + *err);
      return false;
    }
    return true;
  };
  if (budget && !set("budget", std::to_string(*budget))) return kUsage;
  if (backend && !set("backend", *backend)) return kUsage;
  if (critic && !set("critic", *critic)) return kUsage;
  if (jobs && !set("jobs", std::to_string(*jobs))) return kUsage;
  if (cassette) cfg.cassette = *cassette;
  if (script) cfg.script = *script;
  if (out) cfg.out = *out;
  if (record) cfg.record = true;
  // A cassette or script given on the command line implies its backend.
  if (!backend && cassette) cfg.backend = BackendKind::Cassette;
  if (!backend && script && !cassette) cfg.backend = BackendKind::Script;
  apply_environment(cfg);
  if (auto bad = cfg.episode.validate()) {
    complain(*bad);
    return kUsage;
  }
  if (tasks.size() > 1 && image) {
    complain("--image applies to a single --task; put \"image\" in each task file instead");
    return kUsage;
  }

  std::vector<int> codes(tasks.size(), kOk);
  auto dir_for = [&](std::size_t i) {
    return tasks.size() == 1 ? cfg.out : cfg.out / (std::to_string(i + 1) + "_" + tasks[i].stem().string());
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) codes[i] = run_one(tasks[i], cfg, image, dir_for(i));
  };
  std::vector<std::thread> pool;
  int n = std::min<int>(cfg.jobs, static_cast<int>(tasks.size()));
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (int c : codes) {
    if (c != kOk) return c;
  }
  return kOk;
}
