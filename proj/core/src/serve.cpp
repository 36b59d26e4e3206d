#include "courtsketch/serve.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>
#include <httplib.h>

#include "courtsketch/nn.hpp"
#include "courtsketch/tensor.hpp"
#include "courtsketch/trainer.hpp"

namespace courtsketch {

InvalidSketch::InvalidSketch(ValidationReport report)
    : SketchError(fmt::format("sketch has {} violation(s){}", report.violations.size(),
                              report.violations.empty() ? std::string{} : ": " + report.violations.front().message)),
      report_(std::move(report)) {}

std::shared_ptr<const LoadedModel> LoadedModel::from(Checkpoint ckpt) {
  auto model = std::make_shared<LoadedModel>();
  model->id = checkpoint_id(ckpt);
  model->checkpoint = std::move(ckpt);
  model->checkpoint.optimizer.reset();
  return model;
}

std::shared_ptr<const LoadedModel> LoadedModel::load(const std::filesystem::path& path) {
  return from(load_checkpoint(path));
}

SimulateRequest simulate_request_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("sketch")) throw ValidationError("request needs a 'sketch' object");
  SimulateRequest req;
  req.sketch = sketch_from_json(j.at("sketch"));
  try {
    if (j.contains("num_samples")) req.num_samples = j.at("num_samples").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null()) req.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("malformed request: {}", e.what()));
  }
  if (req.num_samples < 1 || req.num_samples > kMaxSamples) {
    throw ValidationError(fmt::format("num_samples must lie in [1, {}], got {}", kMaxSamples, req.num_samples));
  }
  return req;
}

Json to_json(const SimulateResponse& r) {
  Json plays = Json::array();
  for (const Play& p : r.plays) plays.push_back(to_json(p));
  return {{"plays", plays}, {"condition_t", r.condition_t}, {"model", r.model}};
}

SimulateResponse simulate(const SketchPlay& sketch, int n, std::optional<std::uint64_t> seed, const LoadedModel& model,
                          const SimulateOptions& options) {
  if (n < 1 || n > kMaxSamples) throw ValidationError(fmt::format("num_samples must lie in [1, {}]", kMaxSamples));
  ValidationReport report = validate_sketch(sketch, options.court);
  if (!report.ok()) throw InvalidSketch(std::move(report));

  const ConditionMatrix condition = normalize(encode_condition(sketch, options.timing, options.court), options.court);
  const Index frames = condition.frames();
  const GeneratorParams& generator = model.checkpoint.params.generator;

  const std::uint64_t draw_seed = seed ? *seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^
                                                     std::random_device{}();
  auto rng = make_rng(draw_seed, RngStream::Evaluation, 0);
  const Matrix noise = sample_noise_batch(generator.config.z_dim, n, rng);
  const std::vector<Matrix> conditions(static_cast<std::size_t>(n), condition.values);
  const Matrix out = generator_forward_batch(noise, pack(conditions), frames, generator);

  const CourtSpec& court = options.court;
  SimulateResponse response;
  response.condition_t = static_cast<int>(frames);
  response.model = model.id;
  for (const Matrix& sample : unpack(out, frames)) {
    PlayTensor play = denormalize(PlayTensor(sample), court);
    for (Index c = 0; c < layout::kPlayPositions; c += 2) {
      play.values.col(c) = play.values.col(c).cwiseMax(-court.margin).cwiseMin(court.length_x + court.margin);
      play.values.col(c + 1) = play.values.col(c + 1).cwiseMax(-court.margin).cwiseMin(court.width_y + court.margin);
    }
    Play decoded = tensor_to_play(play, court, 0.5, options.timing.fps);
    if (auto errors = validate_play(decoded, court); !errors.empty()) {
      throw Error(fmt::format("generated play failed validation: {}", errors.front()));
    }
    response.plays.push_back(std::move(decoded));
  }
  return response;
}

// ------------------------------------------------------------------- server

struct Server::Impl {
  ServerOptions options;
  httplib::Server http;
  std::thread worker;
  mutable std::mutex model_mutex;
  std::shared_ptr<const LoadedModel> model;
  int port = 0;

  std::shared_ptr<const LoadedModel> snapshot() const {
    std::lock_guard lock(model_mutex);
    return model;
  }

  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static Json error_body(const std::string& message) { return {{"error", message}}; }

  static std::optional<Json> parse_body(const httplib::Request& req, httplib::Response& res) {
    try {
      return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      reply(res, 400, error_body(fmt::format("malformed JSON body: {}", e.what())));
      return std::nullopt;
    }
  }

  Json court_json() const {
    const CourtSpec& c = options.simulate.court;
    return {{"length_x", c.length_x},
            {"width_y", c.width_y},
            {"hoop", {c.hoop.x, c.hoop.y}},
            {"margin", c.margin}};
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}});
    });

    http.Get("/api/model", [this](const httplib::Request&, httplib::Response& res) {
      const auto m = snapshot();
      if (!m) return reply(res, 503, error_body("no checkpoint loaded"));
      reply(res, 200,
            {{"config", to_json(m->checkpoint.config)},
             {"checkpoint_id", m->id},
             {"train_steps", m->checkpoint.step},
             {"epoch", m->checkpoint.epoch},
             {"court", court_json()}});
    });

    http.Post("/api/validate", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      try {
        const Json& sketch = body->contains("sketch") ? body->at("sketch") : *body;
        reply(res, 200, to_json(validate_sketch(sketch_from_json(sketch), options.simulate.court)));
      } catch (const ValidationError& e) {
        reply(res, 400, error_body(e.what()));
      }
    });

    http.Post("/api/simulate", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      const auto m = snapshot();
      try {
        const SimulateRequest request = simulate_request_from_json(*body);
        if (!m) return reply(res, 503, error_body("no checkpoint loaded"));
        const SimulateResponse response =
            simulate(request.sketch, request.num_samples, request.seed, *m, options.simulate);
        reply(res, 200, to_json(response));
      } catch (const InvalidSketch& e) {
        Json out = error_body(e.what());
        out["report"] = to_json(e.report());
        reply(res, 400, out);
      } catch (const ValidationError& e) {
        reply(res, 400, error_body(e.what()));
      } catch (const SketchError& e) {
        reply(res, 400, error_body(e.what()));
      } catch (const std::exception& e) {
        reply(res, 500, error_body(e.what()));
      }
    });

    http.Post("/api/admin/reload", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::filesystem::path> path;
      {
        std::lock_guard lock(model_mutex);
        path = options.checkpoint;
      }
      if (!req.body.empty()) {
        const auto body = parse_body(req, res);
        if (!body) return;
        if (body->is_object() && body->contains("path")) path = body->at("path").get<std::string>();
      }
      if (!path) return reply(res, 400, error_body("no checkpoint path configured"));
      try {
        auto loaded = LoadedModel::load(*path);
        const std::string id = loaded->id;
        {
          std::lock_guard lock(model_mutex);
          model = std::move(loaded);
          options.checkpoint = path;
        }
        reply(res, 200, {{"checkpoint_id", id}});
      } catch (const std::exception& e) {
        reply(res, 500, error_body(e.what()));
      }
    });

    if (options.static_dir) {
      if (!http.set_mount_point("/", options.static_dir->string())) {
        throw ConfigError(fmt::format("static directory '{}' does not exist", options.static_dir->string()));
      }
    }
  }

  void bind() {
    if (options.port == 0) {
      port = http.bind_to_any_port(options.host);
    } else if (http.bind_to_port(options.host, options.port)) {
      port = options.port;
    } else {
      port = -1;
    }
    if (port <= 0) throw Error(fmt::format("cannot bind {}:{}", options.host, options.port));
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  if (impl_->options.checkpoint) impl_->model = LoadedModel::load(*impl_->options.checkpoint);
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::start() {
  impl_->bind();
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return impl_->port;
}

void Server::run() {
  impl_->bind();
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

std::shared_ptr<const LoadedModel> Server::model() const { return impl_->snapshot(); }

void Server::set_model(std::shared_ptr<const LoadedModel> model) {
  std::lock_guard lock(impl_->model_mutex);
  impl_->model = std::move(model);
}

}  // namespace courtsketch
