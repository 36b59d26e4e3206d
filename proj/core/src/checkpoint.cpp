#include "courtsketch/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"

namespace courtsketch {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'K', 'C', 'K', 'P', 'T', '\0'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}
std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}
std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

// Every tensor stored in a checkpoint, in file order.
NamedTensors all_tensors(Checkpoint& c) {
  NamedTensors out = named_tensors(c.params.generator);
  for (auto& t : named_tensors(c.params.critic)) out.push_back(t);
  if (c.optimizer) {
    auto add_state = [&](const std::string& prefix, AdamState& s, const NamedTensors& names) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        out.emplace_back(fmt::format("adam.{}.m.{}", prefix, names[i].first), &s.first_moment[i]);
        out.emplace_back(fmt::format("adam.{}.v.{}", prefix, names[i].first), &s.second_moment[i]);
      }
    };
    add_state("generator", c.optimizer->generator, named_tensors(c.params.generator));
    add_state("critic", c.optimizer->critic, named_tensors(c.params.critic));
  }
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Json to_json(const ModelConfig& c) {
  return {{"channels", c.channels}, {"residual_blocks", c.residual_blocks}, {"kernel", c.kernel},
          {"z_dim", c.z_dim},       {"t", c.t}};
}

ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  c.channels = j.at("channels").get<int>();
  c.residual_blocks = j.at("residual_blocks").get<int>();
  c.kernel = j.at("kernel").get<int>();
  c.z_dim = j.at("z_dim").get<int>();
  c.t = j.at("t").get<int>();
  c.validate();
  return c;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Checkpoint copy = ckpt;
  const NamedTensors tensors = all_tensors(copy);

  Json dir = Json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : tensors) {
    dir.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m->size());
  }
  Json header = {{"format", "courtsketch-checkpoint"},
                 {"version", kCheckpointVersion},
                 {"model", to_json(ckpt.config)},
                 {"seed", ckpt.seed},
                 {"step", ckpt.step},
                 {"epoch", ckpt.epoch},
                 {"dtype", "f64le"},
                 {"tensors", dir},
                 {"metadata", ckpt.metadata}};
  if (ckpt.optimizer) {
    header["optimizer"] = {{"generator_step", ckpt.optimizer->generator.step},
                           {"generator_skipped", ckpt.optimizer->generator.skipped},
                           {"critic_step", ckpt.optimizer->critic.step},
                           {"critic_skipped", ckpt.optimizer->critic.skipped}};
  }
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u64(out, text.size());
  out += text;
  out.reserve(out.size() + offset * 8);
  for (const auto& [name, m] : tensors) {
    for (Index i = 0; i < m->size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m->data()[i]));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointError("not a courtsketch checkpoint");
  }
  const std::uint32_t version = get_u32(bytes, 8);
  if (version != kCheckpointVersion) throw CheckpointError(fmt::format("unsupported checkpoint version {}", version));
  const std::uint64_t header_len = get_u64(bytes, 12);
  const std::size_t data_start = 20 + header_len;
  if (bytes.size() < data_start) throw CheckpointError("truncated checkpoint header");

  Json header;
  try {
    header = Json::parse(bytes.substr(20, header_len));
  } catch (const Json::parse_error& e) {
    throw CheckpointError(fmt::format("corrupt checkpoint header: {}", e.what()));
  }

  Checkpoint ckpt;
  ckpt.config = model_config_from_json(header.at("model"));
  ckpt.seed = header.at("seed").get<std::uint64_t>();
  ckpt.step = header.at("step").get<std::uint64_t>();
  ckpt.epoch = header.at("epoch").get<std::uint64_t>();
  ckpt.metadata = header.value("metadata", Json::object());
  ckpt.params = {make_generator(ckpt.config), make_critic(ckpt.config)};
  if (header.contains("optimizer")) {
    OptimizerSnapshot snap{make_adam_state(named_tensors(std::as_const(ckpt.params.generator))),
                           make_adam_state(named_tensors(std::as_const(ckpt.params.critic)))};
    const Json& o = header.at("optimizer");
    snap.generator.step = o.at("generator_step").get<std::uint64_t>();
    snap.generator.skipped = o.at("generator_skipped").get<std::uint64_t>();
    snap.critic.step = o.at("critic_step").get<std::uint64_t>();
    snap.critic.skipped = o.at("critic_skipped").get<std::uint64_t>();
    ckpt.optimizer = std::move(snap);
  }

  const NamedTensors tensors = all_tensors(ckpt);
  const Json& dir = header.at("tensors");
  if (dir.size() != tensors.size()) throw CheckpointError("checkpoint tensor count does not match its model config");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Json& entry = dir.at(i);
    Matrix& m = *tensors[i].second;
    if (entry.at("name").get<std::string>() != tensors[i].first || entry.at("rows").get<Index>() != m.rows() ||
        entry.at("cols").get<Index>() != m.cols()) {
      throw CheckpointError(fmt::format("unexpected tensor '{}' in checkpoint", entry.at("name").get<std::string>()));
    }
    const std::size_t at = data_start + 8 * entry.at("offset").get<std::size_t>();
    if (bytes.size() < at + 8 * static_cast<std::size_t>(m.size())) throw CheckpointError("truncated checkpoint data");
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = std::bit_cast<double>(get_u64(bytes, at + 8 * static_cast<std::size_t>(k)));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("cannot open checkpoint '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

std::string checkpoint_id(const Checkpoint& ckpt) {
  Checkpoint params_only = ckpt;
  params_only.optimizer.reset();
  params_only.metadata = Json::object();
  return fmt::format("{:016x}", fnv1a(serialize_checkpoint(params_only)));
}

}  // namespace courtsketch
