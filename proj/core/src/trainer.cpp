#include "courtsketch/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"
#include "courtsketch/losses.hpp"
#include "courtsketch/pipeline.hpp"

namespace courtsketch {

namespace {

constexpr double kTrainingFps = 5.0;

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError(fmt::format("bad value '{}' for key '{}'", value, key));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(fmt::format("bad boolean '{}' for key '{}'", value, key));
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || batch_size <= 0 || !(lambda > 0) || t <= 0 || pretrain_epochs < 0 ||
      boost_period_epochs <= 0 || max_epochs <= 0 || eval_every <= 0 || early_stop_window <= 0) {
    throw ConfigError("training parameters must be positive");
  }
  if (critic_ratio < 1 || boost_ratio < 1) throw ConfigError("critic ratios must be at least 1");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1) || !(epsilon_adam > 0)) {
    throw ConfigError("Adam betas must lie in [0, 1) and epsilon must be positive");
  }
  if (!(holdout_fraction >= 0 && holdout_fraction < 1)) throw ConfigError("holdout_fraction must lie in [0, 1)");
  if (!(divergence_threshold > 0) || !(sketch_epsilon >= 0)) {
    throw ConfigError("divergence_threshold must be positive and sketch_epsilon non-negative");
  }
}

AdamConfig TrainConfig::adam() const { return {learning_rate, adam_beta1, adam_beta2, epsilon_adam}; }

Json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"lambda", c.lambda},
          {"t", c.t},
          {"pretrain_epochs", c.pretrain_epochs},
          {"critic_ratio", c.critic_ratio},
          {"boost_period_epochs", c.boost_period_epochs},
          {"boost_ratio", c.boost_ratio},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"epsilon_adam", c.epsilon_adam},
          {"max_epochs", c.max_epochs},
          {"eval_every", c.eval_every},
          {"seed", c.seed},
          {"early_stop_window", c.early_stop_window},
          {"holdout_fraction", c.holdout_fraction},
          {"divergence_threshold", c.divergence_threshold},
          {"sketch_epsilon", c.sketch_epsilon},
          {"log_wall_time", c.log_wall_time}};
}

RunConfig parse_run_config(const std::string& text, RunConfig base) {
  RunConfig cfg = std::move(base);
  TrainConfig& tc = cfg.train;
  ModelConfig& mc = cfg.model;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "learning_rate") tc.learning_rate = parse_number<double>(key, value);
    else if (key == "batch_size") tc.batch_size = parse_number<int>(key, value);
    else if (key == "lambda") tc.lambda = parse_number<double>(key, value);
    else if (key == "t") tc.t = mc.t = parse_number<int>(key, value);
    else if (key == "pretrain_epochs") tc.pretrain_epochs = parse_number<int>(key, value);
    else if (key == "critic_ratio") tc.critic_ratio = parse_number<int>(key, value);
    else if (key == "boost_period_epochs") tc.boost_period_epochs = parse_number<int>(key, value);
    else if (key == "boost_ratio") tc.boost_ratio = parse_number<int>(key, value);
    else if (key == "adam_beta1") tc.adam_beta1 = parse_number<double>(key, value);
    else if (key == "adam_beta2") tc.adam_beta2 = parse_number<double>(key, value);
    else if (key == "epsilon_adam") tc.epsilon_adam = parse_number<double>(key, value);
    else if (key == "max_epochs") tc.max_epochs = parse_number<int>(key, value);
    else if (key == "eval_every") tc.eval_every = parse_number<int>(key, value);
    else if (key == "seed") tc.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "early_stop_window") tc.early_stop_window = parse_number<int>(key, value);
    else if (key == "holdout_fraction") tc.holdout_fraction = parse_number<double>(key, value);
    else if (key == "divergence_threshold") tc.divergence_threshold = parse_number<double>(key, value);
    else if (key == "sketch_epsilon") tc.sketch_epsilon = parse_number<double>(key, value);
    else if (key == "log_wall_time") tc.log_wall_time = parse_bool(key, value);
    else if (key == "channels") mc.channels = parse_number<int>(key, value);
    else if (key == "residual_blocks") mc.residual_blocks = parse_number<int>(key, value);
    else if (key == "kernel") mc.kernel = parse_number<int>(key, value);
    else if (key == "z_dim") mc.z_dim = parse_number<int>(key, value);
    else throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
  }
  tc.validate();
  mc.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::move(base));
}

// ----------------------------------------------------------------- schedule

const char* to_string(SchedulePhase phase) {
  switch (phase) {
    case SchedulePhase::Pretrain: return "pretrain";
    case SchedulePhase::Standard: return "standard";
    case SchedulePhase::Boost: return "boost";
  }
  return "unknown";
}

SchedulePlan schedule_plan(int epoch, const TrainConfig& cfg, int batches_per_epoch) {
  if (epoch < cfg.pretrain_epochs) return {SchedulePhase::Pretrain, batches_per_epoch, 1};
  const bool boost = (epoch - cfg.pretrain_epochs) % cfg.boost_period_epochs == 0;
  const int ratio = boost ? cfg.boost_ratio : cfg.critic_ratio;
  return {boost ? SchedulePhase::Boost : SchedulePhase::Standard, ratio, batches_per_epoch / ratio};
}

EpochCounters run_epoch(int epoch, int batches, const TrainConfig& cfg, StepRunner& runner) {
  const SchedulePlan plan = schedule_plan(epoch, cfg, batches);
  EpochCounters counters;
  for (int k = 0; k < batches; ++k) {
    runner.critic_step(epoch, k);
    ++counters.critic_steps;
    if (plan.phase != SchedulePhase::Pretrain && (k + 1) % plan.critic_iters_per_gen_iter == 0) {
      runner.generator_step(epoch, k);
      ++counters.generator_steps;
    }
  }
  if (plan.phase == SchedulePhase::Pretrain && batches > 0) {
    runner.generator_step(epoch, batches - 1);
    ++counters.generator_steps;
  }
  return counters;
}

bool early_stop(const std::vector<double>& validation_history, int window) {
  if (window < 2 || validation_history.size() < static_cast<std::size_t>(window)) return false;
  for (std::size_t i = validation_history.size() - static_cast<std::size_t>(window) + 1; i < validation_history.size();
       ++i) {
    if (!(validation_history[i] > validation_history[i - 1])) return false;
  }
  return true;
}

// ------------------------------------------------------------------ dataset

TrainingExample make_example(const PlayRecord& record, double sketch_epsilon, const CourtSpec& court) {
  const PlayerOrder order = canonical_order(record.play);
  const Play play = apply_order(record.play, order);
  const EventLog events = record.events.empty() ? events_from_possession(play) : apply_order(record.events, order);
  SketchifyConfig sk;
  sk.epsilon = sketch_epsilon;
  sk.court = court;
  const SketchifyResult sketch = sketchify(play, events, sk);
  return {normalize(sketch.condition, court), normalize(play_to_tensor(play, court), court)};
}

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(counter),
                    static_cast<std::uint32_t>(counter >> 32)};
  return std::mt19937_64(seq);
}

Matrix sample_noise_batch(int z_dim, Index count, std::mt19937_64& rng) {
  Matrix noise(z_dim, count);
  for (Index b = 0; b < count; ++b) noise.col(b) = sample_noise(z_dim, rng).values;
  return noise;
}

DatasetSplit prepare_dataset(const std::vector<PlayRecord>& records, const TrainConfig& cfg, const CourtSpec& court) {
  if (records.empty()) throw ConfigError("training dataset is empty");
  std::vector<TrainingExample> examples;
  examples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].play.length() != static_cast<std::size_t>(cfg.t)) {
      throw ConfigError(fmt::format("play {} has {} frames, expected t = {}", i, records[i].play.length(), cfg.t));
    }
    examples.push_back(make_example(records[i], cfg.sketch_epsilon, court));
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(cfg.seed, RngStream::Split, 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t held = 0;
  if (examples.size() >= 2 && cfg.holdout_fraction > 0) {
    held = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.holdout_fraction * examples.size())));
    held = std::min(held, examples.size() - 1);
  }
  DatasetSplit split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < held ? split.holdout : split.train).push_back(std::move(examples[order[i]]));
  }
  return split;
}

double validation_gap(const CriticParams& critic, const std::vector<TrainingExample>& train,
                      const std::vector<TrainingExample>& holdout) {
  const std::size_t n = std::min(train.size(), holdout.size());
  if (n == 0) return 0.0;
  auto mean_score = [&](const std::vector<TrainingExample>& set) {
    std::vector<Matrix> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pairs.push_back(concat_pair(set[i].condition, set[i].real));
    const Matrix scores = critic_forward_batch(pack(pairs), set[0].real.frames(), critic);
    return scores.mean();
  };
  return mean_score(train) - mean_score(holdout);
}

// ----------------------------------------------------------------- training

namespace {

class Trainer final : public StepRunner {
 public:
  Trainer(const DatasetSplit& data, const TrainConfig& cfg, const ModelConfig& model_cfg, const TrainOptions& options)
      : data_(data), cfg_(cfg), model_cfg_(model_cfg), options_(options), adam_(cfg.adam()) {
    frames_ = static_cast<Index>(cfg.t);
    batch_ = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), data.train.size());
    batches_ = static_cast<int>(data.train.size() / batch_);
  }

  TrainResult run() {
    std::filesystem::create_directories(options_.out_dir);
    start_ = std::chrono::steady_clock::now();
    int first_epoch = 0;
    if (options_.resume) {
      first_epoch = restore(load_checkpoint(*options_.resume));
    } else {
      params_ = xavier_init(model_cfg_, cfg_.seed);
      generator_state_ = make_adam_state(named_tensors(std::as_const(params_.generator)));
      critic_state_ = make_adam_state(named_tensors(std::as_const(params_.critic)));
    }
    log_.open(options_.out_dir / "train_log.jsonl", options_.resume ? std::ios::app : std::ios::trunc);
    if (!log_) throw Error(fmt::format("cannot write training log in '{}'", options_.out_dir.string()));

    TrainResult result;
    result.validation_gaps = gaps_;
    for (int epoch = first_epoch; epoch < cfg_.max_epochs; ++epoch) {
      order_.resize(data_.train.size());
      std::iota(order_.begin(), order_.end(), 0);
      auto rng = make_rng(cfg_.seed, RngStream::Shuffle, static_cast<std::uint64_t>(epoch));
      std::shuffle(order_.begin(), order_.end(), rng);

      phase_ = schedule_plan(epoch, cfg_, batches_).phase;
      critic_loss_sum_ = wasserstein_sum_ = 0.0;
      EpochSummary summary;
      summary.epoch = epoch;
      summary.phase = phase_;
      summary.counters = run_epoch(epoch, batches_, cfg_, *this);
      if (summary.counters.critic_steps > 0) {
        summary.mean_critic_loss = critic_loss_sum_ / summary.counters.critic_steps;
        summary.mean_wasserstein = wasserstein_sum_ / summary.counters.critic_steps;
      }
      epochs_done_ = epoch + 1;

      const bool evaluate = !diverged_ && epochs_done_ % cfg_.eval_every == 0;
      if (evaluate && !data_.holdout.empty()) {
        summary.validation_gap = validation_gap(params_.critic, data_.train, data_.holdout);
        gaps_.push_back(*summary.validation_gap);
      }
      log_epoch(summary);
      if (options_.on_epoch) options_.on_epoch(summary);
      result.epochs.push_back(summary);

      if (diverged_) break;
      if (evaluate) {
        const auto path = options_.out_dir / fmt::format("epoch-{:04}.ckpt", epochs_done_);
        save_checkpoint(path, snapshot(false));
        result.checkpoints.push_back(path);
        if (early_stop(gaps_, cfg_.early_stop_window)) {
          early_stopped_ = true;
          break;
        }
      }
    }
    result.final_checkpoint = snapshot(true);
    const auto final_path = options_.out_dir / "final.ckpt";
    save_checkpoint(final_path, result.final_checkpoint);
    result.checkpoints.push_back(final_path);
    result.validation_gaps = gaps_;
    result.early_stopped = early_stopped_;
    result.diverged = diverged_;
    return result;
  }

  void critic_step(int epoch, int batch) override {
    if (diverged_) return;
    load_batch(epoch, batch);
    auto rng = make_rng(cfg_.seed, RngStream::CriticStep, step_);
    const Matrix noise = sample_noise_batch(model_cfg_.z_dim, static_cast<Index>(batch_), rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> eps(batch_);
    for (double& e : eps) e = unit(rng);

    const Matrix fake = generator_forward_batch(noise, condition_, frames_, params_.generator);
    CriticParams grad = params_.critic.zeros_like();
    const CriticObjective obj = critic_objective(params_.critic, view(), fake, cfg_.lambda, eps, &grad);
    const bool applied =
        adam_step(named_tensors(params_.critic), named_tensors(std::as_const(grad)), critic_state_, adam_);
    critic_loss_sum_ += obj.loss;
    wasserstein_sum_ += obj.wasserstein;
    last_wasserstein_ = obj.wasserstein;

    Json rec = step_record(epoch, "critic");
    rec["critic_loss"] = obj.loss;
    rec["wasserstein"] = obj.wasserstein;
    rec["penalty"] = obj.penalty;
    if (!applied) rec["skipped"] = true;
    write(rec);
    check_divergence(obj.loss);
    ++step_;
  }

  void generator_step(int epoch, int batch) override {
    if (diverged_) return;
    load_batch(epoch, batch);
    auto rng = make_rng(cfg_.seed, RngStream::GeneratorStep, step_);
    const Matrix noise = sample_noise_batch(model_cfg_.z_dim, static_cast<Index>(batch_), rng);
    GeneratorParams grad = params_.generator.zeros_like();
    GeneratorObjectiveOptions opts;
    opts.court = options_.court;
    opts.fps = kTrainingFps;
    const LossReport report = generator_objective(params_.generator, params_.critic, noise, view(), opts, &grad);
    const bool applied =
        adam_step(named_tensors(params_.generator), named_tensors(std::as_const(grad)), generator_state_, adam_);

    Json rec = step_record(epoch, "generator");
    rec["losses"] = to_json(report);
    rec["wasserstein"] = last_wasserstein_;
    if (!applied) rec["skipped"] = true;
    write(rec);
    check_divergence(report.adversarial);
    ++step_;
  }

 private:
  BatchView view() const { return {condition_, real_, frames_}; }

  void load_batch(int epoch, int batch) {
    if (batch == loaded_batch_ && epoch == loaded_epoch_) return;
    std::vector<Matrix> cond;
    std::vector<Matrix> real;
    cond.reserve(batch_);
    real.reserve(batch_);
    for (std::size_t i = 0; i < batch_; ++i) {
      const TrainingExample& ex = data_.train[order_[static_cast<std::size_t>(batch) * batch_ + i]];
      cond.push_back(ex.condition.values.transpose());
      real.push_back(ex.real.values.transpose());
    }
    condition_ = pack_rows(cond);
    real_ = pack_rows(real);
    loaded_batch_ = batch;
    loaded_epoch_ = epoch;
  }

  // Samples already transposed to width x t.
  static Matrix pack_rows(const std::vector<Matrix>& samples) {
    const Index t = samples.front().cols();
    Matrix out(samples.front().rows(), t * static_cast<Index>(samples.size()));
    for (std::size_t b = 0; b < samples.size(); ++b) out.middleCols(static_cast<Index>(b) * t, t) = samples[b];
    return out;
  }

  Json step_record(int epoch, const char* kind) const {
    Json rec = {{"step", step_}, {"epoch", epoch}, {"phase", to_string(phase_)}, {"kind", kind}};
    if (cfg_.log_wall_time) rec["wall_time"] = elapsed();
    return rec;
  }

  void log_epoch(const EpochSummary& s) {
    Json rec = {{"kind", "epoch"},
                {"epoch", s.epoch},
                {"phase", to_string(s.phase)},
                {"critic_steps", s.counters.critic_steps},
                {"generator_steps", s.counters.generator_steps},
                {"mean_critic_loss", s.mean_critic_loss},
                {"mean_wasserstein", s.mean_wasserstein}};
    if (s.validation_gap) rec["validation_gap"] = *s.validation_gap;
    if (diverged_) rec["diverged"] = true;
    if (cfg_.log_wall_time) rec["wall_time"] = elapsed();
    write(rec);
  }

  void write(const Json& rec) {
    log_ << rec.dump() << '\n';
    log_.flush();
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void check_divergence(double loss) {
    if (!std::isfinite(loss) || std::abs(loss) > cfg_.divergence_threshold) diverged_ = true;
  }

  Checkpoint snapshot(bool final) const {
    Checkpoint c;
    c.config = model_cfg_;
    c.seed = cfg_.seed;
    c.step = step_;
    c.epoch = static_cast<std::uint64_t>(epochs_done_);
    c.params = params_;
    c.optimizer = OptimizerSnapshot{generator_state_, critic_state_};
    c.metadata = {{"train", to_json(cfg_)}, {"validation_gaps", gaps_}, {"final", final}};
    if (final) {
      c.metadata["early_stopped"] = early_stopped_;
      c.metadata["diverged"] = diverged_;
    }
    return c;
  }

  int restore(const Checkpoint& c) {
    if (!(c.config == model_cfg_)) throw CheckpointError("checkpoint model config differs from the requested one");
    if (c.seed != cfg_.seed) throw CheckpointError("checkpoint seed differs from the requested one");
    params_ = c.params;
    if (c.optimizer) {
      generator_state_ = c.optimizer->generator;
      critic_state_ = c.optimizer->critic;
    } else {
      generator_state_ = make_adam_state(named_tensors(std::as_const(params_.generator)));
      critic_state_ = make_adam_state(named_tensors(std::as_const(params_.critic)));
    }
    step_ = c.step;
    epochs_done_ = static_cast<int>(c.epoch);
    gaps_ = c.metadata.value("validation_gaps", std::vector<double>{});
    return epochs_done_;
  }

  const DatasetSplit& data_;
  const TrainConfig& cfg_;
  const ModelConfig& model_cfg_;
  const TrainOptions& options_;
  AdamConfig adam_;

  Index frames_ = 0;
  std::size_t batch_ = 0;
  int batches_ = 0;

  ModelParams params_;
  AdamState generator_state_;
  AdamState critic_state_;
  std::uint64_t step_ = 0;
  int epochs_done_ = 0;
  std::vector<double> gaps_;
  bool diverged_ = false;
  bool early_stopped_ = false;

  std::vector<std::size_t> order_;
  int loaded_epoch_ = -1;
  int loaded_batch_ = -1;
  Matrix condition_;
  Matrix real_;
  SchedulePhase phase_ = SchedulePhase::Standard;
  double critic_loss_sum_ = 0.0;
  double wasserstein_sum_ = 0.0;
  double last_wasserstein_ = 0.0;

  std::ofstream log_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TrainResult train(const DatasetSplit& data, const TrainConfig& cfg, const ModelConfig& model_cfg,
                  const TrainOptions& options) {
  cfg.validate();
  model_cfg.validate();
  if (data.train.empty()) throw ConfigError("training dataset is empty");
  if (model_cfg.t != cfg.t) throw ConfigError("model and training sequence lengths differ");
  for (const auto& ex : data.train) {
    if (ex.real.frames() != cfg.t || ex.condition.frames() != cfg.t) {
      throw ConfigError(fmt::format("training plays must have t = {} frames", cfg.t));
    }
  }
  Trainer trainer(data, cfg, model_cfg, options);
  return trainer.run();
}

}  // namespace courtsketch
