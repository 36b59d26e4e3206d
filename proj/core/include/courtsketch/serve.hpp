#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "courtsketch/checkpoint.hpp"
#include "courtsketch/court.hpp"
#include "courtsketch/errors.hpp"
#include "courtsketch/json_io.hpp"
#include "courtsketch/sketch_codec.hpp"

namespace courtsketch {

inline constexpr int kMaxSamples = 16;

/// A sketch rejected by validation, with the full report.
class InvalidSketch : public SketchError {
 public:
  explicit InvalidSketch(ValidationReport report);
  [[nodiscard]] const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Immutable inference snapshot of a checkpoint.
struct LoadedModel {
  Checkpoint checkpoint;
  std::string id;

  static std::shared_ptr<const LoadedModel> from(Checkpoint ckpt);
  static std::shared_ptr<const LoadedModel> load(const std::filesystem::path& path);
};

struct SimulateRequest {
  SketchPlay sketch;
  int num_samples = 1;
  std::optional<std::uint64_t> seed;
};

/// Throws ValidationError for a malformed request or num_samples outside [1, 16].
SimulateRequest simulate_request_from_json(const Json& j);

struct SimulateResponse {
  std::vector<Play> plays;
  int condition_t = 0;
  std::string model;
};

Json to_json(const SimulateResponse& r);

struct SimulateOptions {
  TimingConfig timing;
  CourtSpec court;
};

/// Encodes the sketch, draws n latent vectors (from the seed when given) and
/// decodes the generated plays, which are clamped to the court margin and
/// validated. Throws InvalidSketch or ValidationError for bad input.
SimulateResponse simulate(const SketchPlay& sketch, int n, std::optional<std::uint64_t> seed, const LoadedModel& model,
                          const SimulateOptions& options = {});

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8787;  // 0 picks a free port
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> static_dir;
  std::string cors_origin = "*";
  SimulateOptions simulate;
};

/// HTTP front end:
///   POST /api/simulate, POST /api/validate, GET /api/health, GET /api/model,
///   POST /api/admin/reload, static files under /.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

  [[nodiscard]] std::shared_ptr<const LoadedModel> model() const;
  void set_model(std::shared_ptr<const LoadedModel> model);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace courtsketch
