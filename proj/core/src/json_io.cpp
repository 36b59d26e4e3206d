#include "courtsketch/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"

namespace courtsketch {

namespace {

Json point(Position p) { return Json::array({p.x, p.y}); }

Position point_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("position must be an [x, y] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Json lineup(const Lineup& l) {
  Json out = Json::array();
  for (const auto& p : l) out.push_back(point(p));
  return out;
}

Lineup lineup_from(const Json& j) {
  if (!j.is_array() || j.size() != kTeamSize) throw ValidationError("lineup must list exactly 5 positions");
  Lineup out{};
  for (int i = 0; i < kTeamSize; ++i) out[i] = point_from(j.at(i));
  return out;
}

int player_index(const Json& j, const char* what) {
  int v = 0;
  if (j.is_number_integer()) {
    v = j.get<int>();
  } else if (j.is_string()) {
    v = std::stoi(j.get<std::string>());
  } else {
    throw ValidationError(fmt::format("{} must be a player index", what));
  }
  if (v < 1 || v > kTeamSize) throw ValidationError(fmt::format("{} {} outside 1..5", what, v));
  return v;
}

}  // namespace

Json to_json(const Play& play) {
  Json frames = Json::array();
  for (const Frame& f : play.frames) {
    Json jf;
    jf["ball"] = point(f.ball);
    jf["offense"] = lineup(f.offense);
    if (f.defense) jf["defense"] = lineup(*f.defense);
    switch (f.possession.kind) {
      case Possession::Kind::Player: jf["poss"] = f.possession.player; break;
      case Possession::Kind::Hoop: jf["poss"] = "hoop"; break;
      case Possession::Kind::InFlight: jf["poss"] = nullptr; break;
    }
    frames.push_back(std::move(jf));
  }
  Json out;
  out["fps"] = play.fps;
  out["frames"] = std::move(frames);
  return out;
}

Play play_from_json(const Json& j) {
  try {
    Play play;
    play.fps = j.value("fps", 5.0);
    for (const Json& jf : j.at("frames")) {
      Frame f;
      f.ball = point_from(jf.at("ball"));
      f.offense = lineup_from(jf.at("offense"));
      if (jf.contains("defense") && !jf.at("defense").is_null()) f.defense = lineup_from(jf.at("defense"));
      const Json& poss = jf.contains("poss") ? jf.at("poss") : Json(nullptr);
      if (poss.is_null()) {
        f.possession = Possession::in_flight();
      } else if (poss.is_string() && poss.get<std::string>() == "hoop") {
        f.possession = Possession::hoop();
      } else {
        f.possession = Possession::of_player(player_index(poss, "poss"));
      }
      play.frames.push_back(f);
    }
    return play;
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("malformed play JSON: {}", e.what()));
  }
}

Json to_json(const BallAction& action) {
  switch (action.kind) {
    case BallEventKind::Pass: return {{"type", "pass"}, {"from", action.from}, {"to", action.to}};
    case BallEventKind::Shot: return {{"type", "shot"}, {"by", action.from}};
    case BallEventKind::None: break;
  }
  return {{"type", "none"}};
}

BallAction action_from_json(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "pass") return BallAction::pass(player_index(j.at("from"), "from"), player_index(j.at("to"), "to"));
  if (type == "shot") return BallAction::shot(player_index(j.at("by"), "by"));
  if (type == "none") return BallAction::none();
  throw ValidationError(fmt::format("unknown ball event type '{}'", type));
}

Json to_json(const EventLog& events) {
  Json out = Json::array();
  for (const auto& e : events) {
    Json je = to_json(e.action);
    je["frame"] = e.frame;
    out.push_back(std::move(je));
  }
  return out;
}

EventLog events_from_json(const Json& j) {
  try {
    EventLog out;
    for (const Json& je : j) out.push_back({je.at("frame").get<std::size_t>(), action_from_json(je)});
    return out;
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("malformed event log: {}", e.what()));
  }
}

Json to_json(const SketchPlay& sketch) {
  Json phases = Json::array();
  for (const Phase& phase : sketch.phases) {
    Json paths = Json::object();
    for (const auto& [player, line] : phase.paths) {
      Json pts = Json::array();
      for (const auto& p : line) pts.push_back(point(p));
      paths[std::to_string(player)] = std::move(pts);
    }
    phases.push_back({{"paths", std::move(paths)}, {"end", to_json(phase.end)}});
  }
  return {{"initial", lineup(sketch.initial_positions)}, {"dribbler", sketch.initial_dribbler}, {"phases", phases}};
}

SketchPlay sketch_from_json(const Json& j) {
  try {
    SketchPlay sketch;
    sketch.initial_positions = lineup_from(j.at("initial"));
    sketch.initial_dribbler = player_index(j.at("dribbler"), "dribbler");
    for (const Json& jp : j.at("phases")) {
      Phase phase;
      if (jp.contains("paths")) {
        for (const auto& [key, pts] : jp.at("paths").items()) {
          Polyline line;
          for (const Json& p : pts) line.push_back(point_from(p));
          phase.paths.emplace_back(player_index(Json(key), "path player"), std::move(line));
        }
        std::sort(phase.paths.begin(), phase.paths.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
      }
      phase.end = jp.contains("end") ? action_from_json(jp.at("end")) : BallAction::none();
      sketch.phases.push_back(std::move(phase));
    }
    return sketch;
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("malformed sketch JSON: {}", e.what()));
  } catch (const std::invalid_argument&) {
    throw ValidationError("malformed sketch JSON: path keys must be player indices");
  }
}

std::vector<PlayRecord> read_play_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::vector<PlayRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
    PlayRecord rec{play_from_json(j), {}};
    if (j.contains("events")) rec.events = events_from_json(j.at("events"));
    out.push_back(std::move(rec));
  }
  return out;
}

void write_play_records(const std::filesystem::path& path, const std::vector<PlayRecord>& records) {
  std::ostringstream os;
  for (const auto& rec : records) {
    Json j = to_json(rec.play);
    if (!rec.events.empty()) j["events"] = to_json(rec.events);
    os << j.dump() << '\n';
  }
  write_file_atomic(path, os.str());
}

void write_plays(const std::filesystem::path& path, const std::vector<Play>& plays) {
  std::ostringstream os;
  for (const auto& p : plays) os << to_json(p).dump() << '\n';
  write_file_atomic(path, os.str());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(fmt::format("short write to '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace courtsketch
