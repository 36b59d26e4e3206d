#include <doctest.h>

#include <fstream>

#include "courtsketch/court.hpp"
#include "courtsketch/errors.hpp"
#include "courtsketch/json_io.hpp"
#include "unit/helpers.hpp"

using namespace courtsketch;
using namespace testing_support;

TEST_CASE("court defaults describe the half court") {
  const CourtSpec court;
  CHECK(court.length_x == 47.0);
  CHECK(court.width_y == 50.0);
  CHECK(court.hoop == Position{5.25, 25.0});
  CHECK_NOTHROW(court.validate());
}

TEST_CASE("degenerate courts are rejected") {
  CourtSpec court;
  court.length_x = 0.0;
  CHECK_THROWS_AS(court.validate(), ConfigError);

  CourtSpec outside;
  outside.hoop = {-1.0, 25.0};
  CHECK_THROWS_AS(outside.validate(), ConfigError);

  CourtSpec on_line;
  on_line.hoop = {0.0, 25.0};
  CHECK_THROWS_AS(on_line.validate(), ConfigError);
}

TEST_CASE("in_bounds honours the margin") {
  const CourtSpec court;
  CHECK(court.in_bounds({-3.0, -3.0}));
  CHECK(court.in_bounds({50.0, 53.0}));
  CHECK_FALSE(court.in_bounds({50.01, 25.0}));
  CHECK_FALSE(court.in_bounds({60.0, 25.0}));
  CHECK_FALSE(court.in_bounds({std::nan(""), 25.0}));
}

TEST_CASE("validate_play reports every broken invariant") {
  CHECK(validate_play(still_play(5)).empty());

  Play short_play = still_play(1);
  CHECK_FALSE(validate_play(short_play).empty());

  Play bad_fps = still_play(3);
  bad_fps.fps = 0.0;
  CHECK_FALSE(validate_play(bad_fps).empty());

  Play mixed = still_play(3);
  mixed.frames[1].defense.reset();
  CHECK(validate_play(mixed).size() == 1);

  Play outside = still_play(3);
  outside.frames[2].offense[3] = {60.0, 25.0};
  CHECK(validate_play(outside).size() == 1);

  Play bad_poss = still_play(3);
  bad_poss.frames[0].possession = Possession::of_player(6);
  CHECK(validate_play(bad_poss).size() == 1);
}

TEST_CASE("play JSON round trip is exact") {
  std::mt19937_64 rng(11);
  Play play = random_play(rng, 7);
  const Json j = to_json(play);
  CHECK(j.at("frames").size() == 7);
  CHECK(play_from_json(j) == play);
  CHECK(play_from_json(Json::parse(j.dump())) == play);
}

TEST_CASE("play JSON possession encodings") {
  Play play = still_play(3);
  play.frames[1].possession = Possession::in_flight();
  play.frames[2].possession = Possession::hoop();
  const Json j = to_json(play);
  CHECK(j["frames"][0]["poss"] == 1);
  CHECK(j["frames"][1]["poss"].is_null());
  CHECK(j["frames"][2]["poss"] == "hoop");
}

TEST_CASE("plays without defense omit the key") {
  const Play play = still_play(2, false);
  const Json j = to_json(play);
  CHECK_FALSE(j["frames"][0].contains("defense"));
  CHECK_FALSE(play_from_json(j).has_defense());
}

TEST_CASE("malformed play JSON raises ValidationError") {
  CHECK_THROWS_AS(play_from_json(Json::object()), ValidationError);
  Json j = to_json(still_play(2));
  j["frames"][0]["offense"].erase(0);
  CHECK_THROWS_AS(play_from_json(j), ValidationError);
  Json k = to_json(still_play(2));
  k["frames"][0]["poss"] = 7;
  CHECK_THROWS_AS(play_from_json(k), ValidationError);
}

TEST_CASE("sketch JSON round trip") {
  const SketchPlay elbow = load_sketch("elbow");
  CHECK(elbow.initial_dribbler == 1);
  REQUIRE(elbow.phases.size() == 3);
  CHECK(elbow.phases[0].end == BallAction::pass(1, 4));
  CHECK(elbow.phases[2].end == BallAction::shot(1));
  CHECK(elbow.phases[0].path_for(4) != nullptr);
  CHECK(elbow.phases[0].path_for(2) == nullptr);
  CHECK(sketch_from_json(to_json(elbow)) == elbow);
}

TEST_CASE("sketch JSON rejects bad player keys") {
  Json j = to_json(load_sketch("elbow"));
  j["phases"][0]["paths"]["9"] = Json::array({Json::array({1, 1}), Json::array({2, 2})});
  CHECK_THROWS_AS(sketch_from_json(j), ValidationError);
  Json k = to_json(load_sketch("elbow"));
  k["phases"][0]["end"] = {{"type", "dunk"}};
  CHECK_THROWS_AS(sketch_from_json(k), ValidationError);
}

TEST_CASE("event log JSON round trip") {
  const EventLog log{{3, BallAction::pass(1, 2)}, {9, BallAction::shot(2)}};
  const Json j = to_json(log);
  CHECK(j[0]["type"] == "pass");
  CHECK(j[0]["frame"] == 3);
  CHECK(j[1]["by"] == 2);
  CHECK(events_from_json(j) == log);
}

TEST_CASE("play records survive a JSON Lines round trip") {
  const auto dir = temp_dir("records");
  std::mt19937_64 rng(5);
  std::vector<PlayRecord> records{{random_play(rng, 4), {{1, BallAction::pass(1, 3)}, {3, BallAction::shot(3)}}},
                                  {random_play(rng, 3), {}}};
  write_play_records(dir / "plays.jsonl", records);
  const auto back = read_play_records(dir / "plays.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].play == records[0].play);
  CHECK(back[0].events == records[0].events);
  CHECK(back[1].events.empty());
}

TEST_CASE("atomic writes leave no temporary behind") {
  const auto dir = temp_dir("atomic");
  write_file_atomic(dir / "a.txt", "first");
  write_file_atomic(dir / "a.txt", "second");
  std::ifstream in(dir / "a.txt");
  std::string text;
  std::getline(in, text);
  CHECK(text == "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
}
