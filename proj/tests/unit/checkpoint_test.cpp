#include <doctest.h>

#include <fstream>

#include "courtsketch/checkpoint.hpp"
#include "courtsketch/errors.hpp"
#include "unit/helpers.hpp"

using namespace courtsketch;
using namespace testing_support;

namespace {

Checkpoint sample_checkpoint(bool with_optimizer) {
  ModelConfig c;
  c.channels = 4;
  c.residual_blocks = 1;
  c.kernel = 3;
  c.z_dim = 3;
  c.t = 8;
  Checkpoint ckpt;
  ckpt.config = c;
  ckpt.seed = 99;
  ckpt.step = 12;
  ckpt.epoch = 3;
  ckpt.params = xavier_init(c, 99);
  ckpt.params.generator.output.bias(4, 0) = -0.1;
  if (with_optimizer) {
    OptimizerSnapshot opt;
    opt.generator = make_adam_state(named_tensors(std::as_const(ckpt.params.generator)));
    opt.critic = make_adam_state(named_tensors(std::as_const(ckpt.params.critic)));
    opt.generator.step = 4;
    opt.critic.step = 8;
    opt.critic.skipped = 1;
    opt.generator.first_moment[0](0, 0) = 0.25;
    opt.critic.second_moment[1](0, 0) = 1e-300;
    ckpt.optimizer = opt;
  }
  ckpt.metadata = {{"note", "unit"}};
  return ckpt;
}

void check_same_params(const ModelParams& a, const ModelParams& b) {
  const auto ga = named_tensors(a.generator);
  const auto gb = named_tensors(b.generator);
  REQUIRE(ga.size() == gb.size());
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(*ga[i].second == *gb[i].second);
  const auto ca = named_tensors(a.critic);
  const auto cb = named_tensors(b.critic);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) CHECK(*ca[i].second == *cb[i].second);
}

}  // namespace

TEST_CASE("checkpoints round trip exactly") {
  const Checkpoint ckpt = sample_checkpoint(true);
  const std::string bytes = serialize_checkpoint(ckpt);
  CHECK(bytes.substr(0, 8) == std::string("CSKCKPT\0", 8));
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back.config == ckpt.config);
  CHECK(back.seed == 99);
  CHECK(back.step == 12);
  CHECK(back.epoch == 3);
  CHECK(back.metadata == ckpt.metadata);
  check_same_params(back.params, ckpt.params);
  REQUIRE(back.optimizer.has_value());
  CHECK(back.optimizer->generator.step == 4);
  CHECK(back.optimizer->critic.skipped == 1);
  CHECK(back.optimizer->generator.first_moment[0](0, 0) == 0.25);
  CHECK(back.optimizer->critic.second_moment[1](0, 0) == 1e-300);
  CHECK(serialize_checkpoint(back) == bytes);
}

TEST_CASE("checkpoints without optimizer state") {
  const Checkpoint ckpt = sample_checkpoint(false);
  const Checkpoint back = deserialize_checkpoint(serialize_checkpoint(ckpt));
  CHECK_FALSE(back.optimizer.has_value());
  check_same_params(back.params, ckpt.params);
}

TEST_CASE("files are written atomically and reload") {
  const auto dir = temp_dir("checkpoint");
  const Checkpoint ckpt = sample_checkpoint(true);
  save_checkpoint(dir / "m.ckpt", ckpt);
  const Checkpoint back = load_checkpoint(dir / "m.ckpt");
  check_same_params(back.params, ckpt.params);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const std::string bytes = serialize_checkpoint(sample_checkpoint(true));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8)), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, 10)), CheckpointError);
  std::string bad_version = bytes;
  bad_version[8] = 7;
  CHECK_THROWS_AS(deserialize_checkpoint(bad_version), CheckpointError);
}

TEST_CASE("checkpoint ids track parameters, not optimizer state") {
  const Checkpoint a = sample_checkpoint(true);
  Checkpoint b = sample_checkpoint(false);
  b.metadata = {{"other", 1}};
  CHECK(checkpoint_id(a) == checkpoint_id(b));
  Checkpoint c = sample_checkpoint(true);
  c.params.critic.head.bias(0, 0) += 1e-12;
  CHECK(checkpoint_id(a) != checkpoint_id(c));
  CHECK_FALSE(checkpoint_id(a).empty());
}

TEST_CASE("model config JSON round trip") {
  ModelConfig c;
  c.channels = 12;
  c.t = 85;
  CHECK(model_config_from_json(to_json(c)) == c);
  Json bad = to_json(c);
  bad["kernel"] = 4;
  CHECK_THROWS_AS(model_config_from_json(bad), ConfigError);
}
