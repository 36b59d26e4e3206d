#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "courtsketch/court.hpp"
#include "courtsketch/json_io.hpp"

namespace testing_support {

using namespace courtsketch;

/// Fresh, empty directory under the system temp directory.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("courtsketch_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path data_dir() { return COURTSKETCH_DATA_DIR; }

inline SketchPlay load_sketch(const std::string& name) {
  return sketch_from_json(read_json_file(data_dir() / "sketches" / (name + ".json")));
}

/// Every entity standing still at distinct spots; player 1 holds the ball.
inline Play still_play(std::size_t frames, bool defense = true) {
  Play play;
  for (std::size_t t = 0; t < frames; ++t) {
    Frame f;
    for (int k = 0; k < kTeamSize; ++k) f.offense[k] = {10.0 + 5.0 * k, 10.0 + 3.0 * k};
    if (defense) {
      Lineup d{};
      for (int k = 0; k < kTeamSize; ++k) d[k] = {8.0 + 5.0 * k, 11.0 + 3.0 * k};
      f.defense = d;
    }
    f.ball = f.offense[0];
    f.possession = Possession::of_player(1);
    play.frames.push_back(f);
  }
  return play;
}

/// Random positions inside the court, random possession states.
inline Play random_play(std::mt19937_64& rng, std::size_t frames, const CourtSpec& court = {}) {
  std::uniform_real_distribution<double> x(0.0, court.length_x);
  std::uniform_real_distribution<double> y(0.0, court.width_y);
  std::uniform_int_distribution<int> poss(0, 6);
  Play play;
  for (std::size_t t = 0; t < frames; ++t) {
    Frame f;
    f.ball = {x(rng), y(rng)};
    Lineup d{};
    for (int k = 0; k < kTeamSize; ++k) {
      f.offense[k] = {x(rng), y(rng)};
      d[k] = {x(rng), y(rng)};
    }
    f.defense = d;
    const int p = poss(rng);
    f.possession = p == 0 ? Possession::in_flight() : p == 6 ? Possession::hoop() : Possession::of_player(p);
    play.frames.push_back(f);
  }
  return play;
}

}  // namespace testing_support
