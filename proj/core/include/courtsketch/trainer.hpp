#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "courtsketch/checkpoint.hpp"
#include "courtsketch/json_io.hpp"
#include "courtsketch/nn.hpp"
#include "courtsketch/optimizer.hpp"
#include "courtsketch/tensor.hpp"

namespace courtsketch {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 128;
  double lambda = 10.0;
  int t = 50;
  int pretrain_epochs = 10;
  int critic_ratio = 5;
  int boost_period_epochs = 20;
  int boost_ratio = 10;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;
  double epsilon_adam = 1e-8;
  int max_epochs = 100;
  int eval_every = 5;
  std::uint64_t seed = 0;

  int early_stop_window = 5;
  double holdout_fraction = 0.1;
  double divergence_threshold = 1e6;
  double sketch_epsilon = 1.5;
  bool log_wall_time = false;

  void validate() const;
  [[nodiscard]] AdamConfig adam() const;
};

Json to_json(const TrainConfig& c);

struct RunConfig {
  TrainConfig train;
  ModelConfig model;
};

/// Flat `key = value` lines; `#` starts a comment. Keys are the TrainConfig and
/// ModelConfig field names; `t` sets both. Throws ConfigError on unknown keys
/// or malformed values.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// ----------------------------------------------------------------- schedule

enum class SchedulePhase { Pretrain, Standard, Boost };

const char* to_string(SchedulePhase phase);

struct SchedulePlan {
  SchedulePhase phase = SchedulePhase::Standard;
  /// Critic steps between generator steps; in pretraining the whole epoch.
  int critic_iters_per_gen_iter = 0;
  int gen_iters_per_epoch = 0;
};

/// Pretraining: the critic trains on every batch and the generator once at
/// the end of the epoch. Afterwards the critic takes `critic_ratio` batches per
/// generator step, raised to `boost_ratio` on the first epoch of every boost period.
SchedulePlan schedule_plan(int epoch, const TrainConfig& cfg, int batches_per_epoch);

/// Receives the steps of one epoch in order; `batch` indexes the epoch's batches.
class StepRunner {
 public:
  virtual ~StepRunner() = default;
  virtual void critic_step(int epoch, int batch) = 0;
  virtual void generator_step(int epoch, int batch) = 0;
};

struct EpochCounters {
  int critic_steps = 0;
  int generator_steps = 0;
};

/// Drives one epoch of `batches` critic steps with generator steps interleaved per the plan.
EpochCounters run_epoch(int epoch, int batches, const TrainConfig& cfg, StepRunner& runner);

/// True when the last `window` validation gaps are strictly increasing.
bool early_stop(const std::vector<double>& validation_history, int window = 5);

// ------------------------------------------------------------------ dataset

/// Normalized condition/real pair.
struct TrainingExample {
  ConditionMatrix condition;
  PlayTensor real;
};

struct DatasetSplit {
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> holdout;
};

/// Canonical player order, sketch condition from the play's events (recovered
/// from possession when absent), normalization.
TrainingExample make_example(const PlayRecord& record, double sketch_epsilon, const CourtSpec& court = {});

/// Seeded shuffle into train and held-out sets. Throws ConfigError for an
/// empty dataset or plays whose length differs from cfg.t.
DatasetSplit prepare_dataset(const std::vector<PlayRecord>& records, const TrainConfig& cfg,
                             const CourtSpec& court = {});

/// Independent random streams keyed by (seed, stream, counter).
enum class RngStream : std::uint64_t { Split = 1, Shuffle = 2, CriticStep = 3, GeneratorStep = 4, Evaluation = 5 };

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream, std::uint64_t counter);

/// z_dim x count standard normal draws.
Matrix sample_noise_batch(int z_dim, Index count, std::mt19937_64& rng);

// ----------------------------------------------------------------- training

struct EpochSummary {
  int epoch = 0;
  SchedulePhase phase = SchedulePhase::Standard;
  EpochCounters counters;
  double mean_critic_loss = 0.0;
  double mean_wasserstein = 0.0;
  std::optional<double> validation_gap;
};

struct TrainOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> resume;
  CourtSpec court;
  std::function<void(const EpochSummary&)> on_epoch;
};

struct TrainResult {
  Checkpoint final_checkpoint;
  std::vector<std::filesystem::path> checkpoints;
  std::vector<EpochSummary> epochs;
  std::vector<double> validation_gaps;
  bool early_stopped = false;
  bool diverged = false;
};

/// Mean critic score on real train pairs minus on held-out pairs.
double validation_gap(const CriticParams& critic, const std::vector<TrainingExample>& train,
                      const std::vector<TrainingExample>& holdout);

/// Adversarial training with the three-phase schedule. Writes `train_log.jsonl`
/// and checkpoints into `options.out_dir`. Throws ConfigError on an empty train set.
TrainResult train(const DatasetSplit& data, const TrainConfig& cfg, const ModelConfig& model_cfg,
                  const TrainOptions& options);

}  // namespace courtsketch
