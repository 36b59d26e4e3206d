#include <doctest.h>

#include <spawn.h>
#include <sys/wait.h>

#include <chrono>
#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include "courtsketch/cli.hpp"
#include "courtsketch/json_io.hpp"
#include "unit/helpers.hpp"

#include <httplib.h>

extern char** environ;

using namespace courtsketch;
using namespace testing_support;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "courtsketch");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t line_count(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("help, version and usage errors") {
  const Run help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("synth-data") != std::string::npos);
  const Run sub = run({"train", "--help"});
  CHECK(sub.code == kExitOk);
  CHECK(sub.out.find("--resume") != std::string::npos);
  const Run version = run({"--version"});
  CHECK(version.code == kExitOk);
  CHECK(version.out.find("courtsketch") != std::string::npos);

  CHECK(run({}).code == kExitUsage);
  CHECK(run({"bogus"}).code == kExitUsage);
  CHECK(run({"synth-data", "--bogus"}).code == kExitUsage);
  CHECK(run({"simulate", "--sketch", "x.json"}).code == kExitUsage);
  const Run missing = run({"simulate", "--sketch", "/nonexistent.json", "--ckpt", "/nonexistent.ckpt"});
  CHECK(missing.code == kExitRuntime);
  CHECK(missing.err.find("error:") == 0);
}

TEST_CASE("synth-data, sketchify, train, simulate and eval") {
  const auto dir = temp_dir("cli_flow");
  const std::string plays = (dir / "plays.jsonl").string();
  REQUIRE(run({"synth-data", "--out", plays, "--count", "16", "--seed", "3", "--frames", "20"}).code == kExitOk);
  CHECK(line_count(plays) == 16);
  CHECK(run({"synth-data", "--out", plays, "--template", "nope"}).code == kExitRuntime);
  REQUIRE(run({"synth-data", "--out", plays, "--count", "16", "--seed", "3", "--frames", "20"}).code == kExitOk);

  const std::string sketches = (dir / "sketches.jsonl").string();
  REQUIRE(run({"sketchify", "--in", plays, "--out", sketches}).code == kExitOk);
  CHECK(line_count(sketches) == 16);
  std::istringstream lines(read_file(sketches));
  std::string first;
  std::getline(lines, first);
  CHECK(Json::parse(first).contains("segment_frames"));

  write_file_atomic(dir / "tiny.cfg",
                    "batch_size = 4\nt = 20\nchannels = 4\nresidual_blocks = 1\nz_dim = 3\n"
                    "pretrain_epochs = 1\ncritic_ratio = 2\nmax_epochs = 2\neval_every = 1\n");
  const Run train = run({"train", "--data", plays, "--config", (dir / "tiny.cfg").string(), "--out",
                         (dir / "run").string(), "--seed", "4"});
  REQUIRE(train.code == kExitOk);
  CHECK(train.out.find("final checkpoint") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "run" / "final.ckpt"));
  const std::string log = read_file(dir / "run" / "train_log.jsonl");
  std::size_t epochs = 0;
  for (std::size_t at = log.find("\"kind\":\"epoch\""); at != std::string::npos; at = log.find("\"kind\":\"epoch\"", at + 1)) ++epochs;
  CHECK(epochs == 2);

  const std::string ckpt = (dir / "run" / "final.ckpt").string();
  const std::string sketch = (data_dir() / "sketches" / "elbow.json").string();
  const Run stdout_sim = run({"simulate", "--sketch", sketch, "--ckpt", ckpt, "--seed", "2", "--n", "2"});
  REQUIRE(stdout_sim.code == kExitOk);
  const Json response = Json::parse(stdout_sim.out);
  CHECK(response["plays"].size() == 2);
  CHECK(run({"simulate", "--sketch", sketch, "--ckpt", ckpt, "--n", "0"}).code == kExitRuntime);

  const std::string generated = (dir / "generated.jsonl").string();
  REQUIRE(run({"simulate", "--sketch", sketch, "--ckpt", ckpt, "--seed", "2", "--n", "3", "--out", generated}).code ==
          kExitOk);
  CHECK(line_count(generated) == 3);

  const std::string report = (dir / "report.json").string();
  REQUIRE(run({"eval", "--real", plays, "--generated", generated, "--out", report, "--cell-size", "2"}).code ==
          kExitOk);
  const Json r = read_json_file(report);
  CHECK(r["real"]["plays"] == 16);
  CHECK(r["generated"]["plays"] == 3);
  CHECK(r["real"]["stats"].contains("ball_dribbler_distance"));
  CHECK(r.contains("definitions"));
  CHECK(std::filesystem::exists(dir / "report.real.heatmap.csv"));
  CHECK(std::filesystem::exists(dir / "report.generated.heatmap.dat"));
}

TEST_CASE("ingest through the command line") {
  const auto dir = temp_dir("cli_ingest");
  const std::string plays = (dir / "plays.jsonl").string();
  REQUIRE(run({"synth-data", "--out", plays, "--count", "3", "--seed", "1"}).code == kExitOk);
  const Run r = run({"ingest", "--in", plays, "--out", (dir / "out.jsonl").string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("ingested") != std::string::npos);
}

#ifdef COURTSKETCH_CLI_PATH
TEST_CASE("serve answers health checks until killed") {
  constexpr int kPort = 28787;
  const std::string port = std::to_string(kPort);
  const char* argv[] = {COURTSKETCH_CLI_PATH, "serve", "--port", port.c_str(), nullptr};
  pid_t pid = 0;
  REQUIRE(posix_spawn(&pid, COURTSKETCH_CLI_PATH, nullptr, nullptr, const_cast<char* const*>(argv), environ) == 0);

  httplib::Client client("127.0.0.1", kPort);
  client.set_connection_timeout(std::chrono::milliseconds(200));
  bool healthy = false;
  for (int i = 0; i < 100 && !healthy; ++i) {
    if (auto res = client.Get("/api/health"); res && res->status == 200) healthy = true;
    else std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  CHECK(healthy);
  auto model = client.Get("/api/model");
  REQUIRE(model);
  CHECK(model->status == 503);

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
}
#endif
