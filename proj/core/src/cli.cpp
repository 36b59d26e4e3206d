#include "courtsketch/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "courtsketch/errors.hpp"
#include "courtsketch/json_io.hpp"
#include "courtsketch/metrics.hpp"
#include "courtsketch/pipeline.hpp"
#include "courtsketch/serve.hpp"
#include "courtsketch/sketch_codec.hpp"
#include "courtsketch/trainer.hpp"

namespace courtsketch {

namespace {

namespace fs = std::filesystem;

std::vector<Play> plays_of(const std::vector<PlayRecord>& records) {
  std::vector<Play> plays;
  plays.reserve(records.size());
  for (const auto& r : records) plays.push_back(r.play);
  return plays;
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

fs::path sibling(const fs::path& base, const std::string& suffix) {
  return base.parent_path() / (base.stem().string() + suffix);
}

struct IngestArgs {
  fs::path in, out;
  double fps = 5.0;
};

int run_ingest(const IngestArgs& a, std::ostream& out) {
  IngestConfig cfg;
  cfg.target_fps = a.fps;
  const IngestResult result = ingest(read_play_records(a.in), cfg);
  write_play_records(a.out, result.plays);
  out << fmt::format("ingested {} plays, skipped {}\n", result.plays.size(), result.skipped);
  for (const auto& w : result.warnings) out << "warning: " << w << '\n';
  return kExitOk;
}

struct SketchifyArgs {
  fs::path in, out;
  double epsilon = 1.5;
};

int run_sketchify(const SketchifyArgs& a, std::ostream& out) {
  SketchifyConfig cfg;
  cfg.epsilon = a.epsilon;
  std::string lines;
  std::size_t count = 0;
  for (const PlayRecord& r : read_play_records(a.in)) {
    const EventLog events = r.events.empty() ? events_from_possession(r.play) : r.events;
    const SketchifyResult s = sketchify(r.play, events, cfg);
    lines += Json{{"sketch", to_json(s.sketch)}, {"segment_frames", s.segment_frames}}.dump() + '\n';
    ++count;
  }
  write_text(a.out, lines);
  out << fmt::format("wrote {} sketches\n", count);
  return kExitOk;
}

struct SynthArgs {
  fs::path out;
  std::size_t count = 512;
  std::uint64_t seed = 7;
  std::string template_name = "mixed";
  std::size_t frames = 50;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig cfg;
  cfg.frames = a.frames;
  const auto records =
      a.template_name == "mixed" ? synth_mixed(a.count, a.seed, cfg) : synth_plays(a.template_name, a.count, a.seed, cfg);
  write_play_records(a.out, records);
  out << fmt::format("wrote {} synthetic plays\n", records.size());
  return kExitOk;
}

struct TrainArgs {
  fs::path data, out;
  std::optional<fs::path> config, resume;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_epochs;
};

int run_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = a.config ? load_run_config(*a.config) : RunConfig{};
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.max_epochs) cfg.train.max_epochs = *a.max_epochs;
  cfg.train.validate();

  const DatasetSplit split = prepare_dataset(read_play_records(a.data), cfg.train);
  out << fmt::format("training on {} plays, {} held out\n", split.train.size(), split.holdout.size());
  TrainOptions opts;
  opts.out_dir = a.out;
  opts.resume = a.resume;
  opts.on_epoch = [&out](const EpochSummary& s) {
    out << fmt::format("epoch {:>4} {:<8} critic {:>3} gen {:>3} critic_loss {:.4f} W {:.4f}", s.epoch + 1,
                       to_string(s.phase), s.counters.critic_steps, s.counters.generator_steps, s.mean_critic_loss,
                       s.mean_wasserstein);
    if (s.validation_gap) out << fmt::format(" gap {:.4f}", *s.validation_gap);
    out << std::endl;
  };
  const TrainResult result = train(split, cfg.train, cfg.model, opts);
  out << fmt::format("final checkpoint {} ({})\n", result.checkpoints.back().string(),
                     checkpoint_id(result.final_checkpoint));
  if (result.early_stopped) out << "stopped early: critic overfitting\n";
  if (result.diverged) throw Error("training diverged; final checkpoint written");
  return kExitOk;
}

struct SimulateArgs {
  fs::path sketch, ckpt;
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
  int n = 1;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto model = LoadedModel::load(a.ckpt);
  const Json j = read_json_file(a.sketch);
  const SketchPlay sketch = sketch_from_json(j.contains("sketch") ? j.at("sketch") : j);
  const SimulateResponse response = simulate(sketch, a.n, a.seed, *model);
  if (a.out) {
    write_plays(*a.out, response.plays);
    out << fmt::format("wrote {} plays of {} frames\n", response.plays.size(), response.condition_t);
  } else {
    out << to_json(response).dump() << '\n';
  }
  return kExitOk;
}

struct EvalArgs {
  fs::path real, generated, out;
  double cell_size = 1.0;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  Json report = {{"definitions", metric_definitions()}};
  for (const auto& [name, path] : {std::pair{"real", a.real}, {"generated", a.generated}}) {
    const std::vector<Play> plays = plays_of(read_play_records(path));
    const HeatmapGrid grid = velocity_heatmap(plays, a.cell_size);
    const fs::path csv = sibling(a.out, fmt::format(".{}.heatmap.csv", name));
    const fs::path dat = sibling(a.out, fmt::format(".{}.heatmap.dat", name));
    write_text(csv, heatmap_csv(grid));
    write_text(dat, heatmap_gnuplot(grid));
    report[name] = {{"plays", plays.size()},
                    {"stats", to_json(play_stats(plays))},
                    {"heatmap", {{"csv", csv.string()}, {"gnuplot", dat.string()}, {"total_count", grid.total_count()}}}};
  }
  write_json_file(a.out, report);
  out << fmt::format("wrote {}\n", a.out.string());
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8787;
  std::optional<fs::path> ckpt, static_dir;
};

int run_serve(const ServeArgs& a, std::ostream& out) {
  ServerOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.checkpoint = a.ckpt;
  opts.static_dir = a.static_dir;
  Server server(opts);
  out << fmt::format("serving on http://{}:{}{}", a.host, a.port, a.ckpt ? "" : " (no checkpoint loaded)")
      << std::endl;
  server.run();
  return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"courtsketch: sketch-conditioned basketball play simulation", "courtsketch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "courtsketch 0.1.0");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Cut raw tracking plays to half-court possessions at 5 fps");
  ingest_cmd->add_option("--in", ingest_args.in, "Raw plays (JSON Lines)")->required();
  ingest_cmd->add_option("--out", ingest_args.out, "Output plays (JSON Lines)")->required();
  ingest_cmd->add_option("--fps", ingest_args.fps, "Target frame rate")->capture_default_str();

  SketchifyArgs sketchify_args;
  auto* sketchify_cmd = app.add_subcommand("sketchify", "Derive coach-style sketches from plays");
  sketchify_cmd->add_option("--in", sketchify_args.in, "Plays (JSON Lines)")->required();
  sketchify_cmd->add_option("--out", sketchify_args.out, "Sketches (JSON Lines)")->required();
  sketchify_cmd->add_option("--epsilon", sketchify_args.epsilon, "RDP tolerance in feet")->capture_default_str();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth-data", "Generate a synthetic play dataset");
  synth_cmd->add_option("--out", synth_args.out, "Output plays (JSON Lines)")->required();
  synth_cmd->add_option("--count", synth_args.count, "Number of plays")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--template", synth_args.template_name,
                        "give-and-go, pick-and-roll, ball-rotation, random-motion or mixed")
      ->capture_default_str();
  synth_cmd->add_option("--frames", synth_args.frames, "Frames per play")->capture_default_str();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the generator and critic");
  train_cmd->add_option("--data", train_args.data, "Training plays (JSON Lines)")->required();
  train_cmd->add_option("--config", train_args.config, "Flat key = value config file");
  train_cmd->add_option("--out", train_args.out, "Output directory for checkpoints and log")->required();
  train_cmd->add_option("--seed", train_args.seed, "Random seed (overrides the config)");
  train_cmd->add_option("--max-epochs", train_args.max_epochs, "Epoch limit (overrides the config)");
  train_cmd->add_option("--resume", train_args.resume, "Checkpoint to resume from");

  SimulateArgs simulate_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate plays for a sketch");
  simulate_cmd->add_option("--sketch", simulate_args.sketch, "Sketch JSON file")->required();
  simulate_cmd->add_option("--ckpt", simulate_args.ckpt, "Model checkpoint")->required();
  simulate_cmd->add_option("--seed", simulate_args.seed, "Random seed");
  simulate_cmd->add_option("--n", simulate_args.n, "Number of samples (1-16)")->capture_default_str();
  simulate_cmd->add_option("--out", simulate_args.out, "Output plays (JSON Lines); stdout when omitted");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Compare statistics of real and generated plays");
  eval_cmd->add_option("--real", eval_args.real, "Real plays (JSON Lines)")->required();
  eval_cmd->add_option("--generated", eval_args.generated, "Generated plays (JSON Lines)")->required();
  eval_cmd->add_option("--out", eval_args.out, "Report JSON; heatmaps are written beside it")->required();
  eval_cmd->add_option("--cell-size", eval_args.cell_size, "Heatmap cell size in feet")->capture_default_str();

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP simulation service");
  serve_cmd->add_option("--host", serve_args.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve_args.port, "Port")->capture_default_str();
  serve_cmd->add_option("--ckpt", serve_args.ckpt, "Model checkpoint");
  serve_cmd->add_option("--static", serve_args.static_dir, "Directory of UI assets served under /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest_args, out);
    if (*sketchify_cmd) return run_sketchify(sketchify_args, out);
    if (*synth_cmd) return run_synth(synth_args, out);
    if (*train_cmd) return run_train(train_args, out);
    if (*simulate_cmd) return run_simulate(simulate_args, out);
    if (*eval_cmd) return run_eval(eval_args, out);
    if (*serve_cmd) return run_serve(serve_args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace courtsketch
