#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"
#include "courtsketch/pipeline.hpp"
#include "courtsketch/trajectory.hpp"

namespace courtsketch {

namespace {

using Rng = std::mt19937_64;

Rng play_stream(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  return Rng(seq);
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

struct Waypoint {
  Position at;
  std::size_t not_before = 0;  // frame at which the player may start heading here
};

struct Script {
  Lineup start{};
  std::array<std::vector<Waypoint>, kTeamSize> routes;
  int dribbler = 1;
  std::vector<std::pair<std::size_t, int>> passes;  // (release frame, receiver)
};

Position jitter(Rng& rng, Position p, double r) { return {p.x + uniform(rng, -r, r), p.y + uniform(rng, -r, r)}; }

Lineup base_formation(Rng& rng) {
  Lineup l = {Position{30, 25}, Position{24, 8}, Position{24, 42}, Position{6, 4}, Position{13, 18}};
  for (auto& p : l) p = jitter(rng, p, 2.0);
  return l;
}

Script give_and_go(Rng& rng, const SynthConfig& cfg) {
  Script s;
  s.start = base_formation(rng);
  const auto n = static_cast<int>(cfg.frames);
  const auto first = static_cast<std::size_t>(uniform_int(rng, n / 5, n / 3));
  const auto second = static_cast<std::size_t>(uniform_int(rng, n / 2 + 2, 2 * n / 3));
  s.dribbler = 1;
  s.routes[0] = {{jitter(rng, {27, 18}, 1.5), 0}, {jitter(rng, {9, 23}, 1.5), first}};
  s.routes[1] = {{jitter(rng, {22, 11}, 1.5), 0}, {jitter(rng, {19, 13}, 1.0), first + 2}};
  s.routes[2] = {{jitter(rng, {25, 38}, 2.0), first}};
  s.routes[3] = {{jitter(rng, {5, 8}, 1.5), second}};
  s.routes[4] = {{jitter(rng, {14, 34}, 2.0), first}};
  s.passes = {{first, 2}, {second, 1}};
  return s;
}

Script pick_and_roll(Rng& rng, const SynthConfig& cfg) {
  Script s;
  s.start = base_formation(rng);
  const auto n = static_cast<int>(cfg.frames);
  const auto screen = static_cast<std::size_t>(uniform_int(rng, n / 5, n / 4 + 2));
  s.dribbler = 1;
  const Position pick = jitter(rng, {26, 22}, 1.0);
  s.routes[4] = {{pick, 0}, {jitter(rng, {8, 24}, 1.5), screen + 4}};
  s.routes[0] = {{jitter(rng, {29, 27}, 1.0), 0}, {jitter(rng, {16, 20}, 2.0), screen}};
  s.routes[1] = {{jitter(rng, {21, 6}, 1.5), screen}};
  s.routes[2] = {{jitter(rng, {20, 44}, 1.5), screen}};
  s.routes[3] = {{jitter(rng, {5, 10}, 1.5), 0}};
  if (uniform(rng, 0.0, 1.0) < 0.5) {
    s.passes = {{static_cast<std::size_t>(uniform_int(rng, 2 * n / 3, 3 * n / 4)), 5}};
  }
  return s;
}

Script ball_rotation(Rng& rng, const SynthConfig& cfg) {
  Script s;
  s.start = base_formation(rng);
  const auto n = static_cast<int>(cfg.frames);
  s.dribbler = 1;
  for (int i = 0; i < kTeamSize; ++i) s.routes[i] = {{jitter(rng, s.start[i], 3.0), 0}};
  s.routes[3].push_back({jitter(rng, {8, 6}, 1.5), static_cast<std::size_t>(n / 2)});
  const std::array<int, 3> receivers = {2, 4, uniform(rng, 0.0, 1.0) < 0.5 ? 5 : 3};
  std::size_t frame = static_cast<std::size_t>(uniform_int(rng, 7, 11));
  for (int r : receivers) {
    s.passes.emplace_back(frame, r);
    frame += static_cast<std::size_t>(uniform_int(rng, 9, 12));
  }
  return s;
}

Script random_motion(Rng& rng, const SynthConfig& cfg) {
  Script s;
  s.start = base_formation(rng);
  const auto n = static_cast<int>(cfg.frames);
  s.dribbler = uniform_int(rng, 1, kTeamSize);
  for (int i = 0; i < kTeamSize; ++i) {
    const int stops = uniform_int(rng, 1, 3);
    for (int k = 0; k < stops; ++k) {
      s.routes[i].push_back({{uniform(rng, 4.0, 36.0), uniform(rng, 4.0, 46.0)},
                             static_cast<std::size_t>(uniform_int(rng, 0, n / 2))});
    }
    std::sort(s.routes[i].begin(), s.routes[i].end(),
              [](const Waypoint& a, const Waypoint& b) { return a.not_before < b.not_before; });
  }
  const int passes = uniform_int(rng, 0, 3);
  int carrier = s.dribbler;
  std::size_t frame = static_cast<std::size_t>(uniform_int(rng, 5, 10));
  for (int k = 0; k < passes && frame + 6 < cfg.frames; ++k) {
    int to = uniform_int(rng, 1, kTeamSize - 1);
    if (to >= carrier) ++to;
    s.passes.emplace_back(frame, to);
    carrier = to;
    frame += static_cast<std::size_t>(uniform_int(rng, 7, 12));
  }
  return s;
}

Position clamp_to(const CourtSpec& court, Position p, double inset) {
  return {std::clamp(p.x, inset, court.length_x - inset), std::clamp(p.y, inset, court.width_y - inset)};
}

PlayRecord realize(const Script& script, Rng& rng, const SynthConfig& cfg) {
  const std::size_t n = cfg.frames;
  const double step = cfg.player_speed / cfg.fps;

  // Offense: walk each route at a per-player speed, plus a gentle lateral sway.
  std::vector<Lineup> offense(n);
  for (int i = 0; i < kTeamSize; ++i) {
    const double speed = step * uniform(rng, 0.75, 1.3);
    const double sway = uniform(rng, 0.0, 0.5);
    const double period = uniform(rng, 8.0, 16.0);
    const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    Position p = script.start[i];
    std::size_t leg = 0;
    for (std::size_t t = 0; t < n; ++t) {
      while (leg < script.routes[i].size() && distance(p, script.routes[i][leg].at) < 1e-9) ++leg;
      if (leg < script.routes[i].size() && t >= script.routes[i][leg].not_before) {
        const Position target = script.routes[i][leg].at;
        const double d = distance(p, target);
        p = d <= speed ? target : lerp(p, target, speed / d);
      }
      const double s = sway * std::sin(phase + 2.0 * std::numbers::pi * static_cast<double>(t) / period);
      offense[t][i] = clamp_to(cfg.court, {p.x + 0.3 * s, p.y + s}, 1.0);
    }
  }

  // Possession: carrier holds until each pass, ball airborne for the flight frames, HOOP on the last frame.
  std::vector<Possession> possession(n, Possession::of_player(script.dribbler));
  EventLog events;
  int carrier = script.dribbler;
  for (auto [release, receiver] : script.passes) {
    if (release == 0 || release + cfg.pass_flight_frames >= n - 1 || receiver == carrier) continue;
    if (!events.empty() && release <= events.back().frame + cfg.pass_flight_frames) continue;
    events.push_back({release, BallAction::pass(carrier, receiver)});
    for (std::size_t t = release; t < n; ++t) possession[t] = Possession::of_player(receiver);
    for (std::size_t t = release; t < release + cfg.pass_flight_frames; ++t) possession[t] = Possession::in_flight();
    carrier = receiver;
  }
  possession[n - 1] = Possession::hoop();
  events.push_back({n - 1, BallAction::shot(carrier)});

  // Dribble offset stays within dribble_offset (< 2 ft) of the carrier.
  std::vector<Lineup> dribble_points = offense;
  const double spin = uniform(rng, 0.6, 1.2);
  for (std::size_t t = 0; t < n; ++t) {
    if (!possession[t].is_player()) continue;
    const int c = possession[t].player - 1;
    const double a = spin * static_cast<double>(t);
    const double r = cfg.dribble_offset * (0.6 + 0.4 * std::abs(std::sin(0.7 * static_cast<double>(t))));
    dribble_points[t][c] = offense[t][c] + Position{r * std::cos(a), r * std::sin(a)};
  }
  const auto ball = ball_track(dribble_points, possession, cfg.court.hoop, cfg.shot_flight_frames, offense[0][0]);

  // Defense: shadow the assignment with a lag, sitting between it and the hoop.
  std::array<Position, kTeamSize> drift{};
  PlayRecord rec;
  rec.play.fps = cfg.fps;
  rec.play.frames.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    Frame& f = rec.play.frames[t];
    f.ball = ball[t];
    f.offense = offense[t];
    f.possession = possession[t];
    Lineup defense{};
    const std::size_t src = t >= cfg.defender_lag ? t - cfg.defender_lag : 0;
    for (int i = 0; i < kTeamSize; ++i) {
      drift[i] = drift[i] + Position{uniform(rng, -0.15, 0.15), uniform(rng, -0.15, 0.15)};
      const double len = norm(drift[i]);
      if (len > cfg.defender_noise) drift[i] = (cfg.defender_noise / len) * drift[i];
      const Position mark = offense[src][i];
      const Position to_hoop = cfg.court.hoop - mark;
      const double dh = norm(to_hoop);
      const double gap = std::min(cfg.defender_gap, 0.5 * dh);
      const Position guard = dh > 1e-9 ? mark + (gap / dh) * to_hoop : mark;
      defense[i] = clamp_to(cfg.court, guard + drift[i], 0.5);
    }
    f.defense = defense;
  }
  rec.events = std::move(events);
  return rec;
}

}  // namespace

std::vector<PlayRecord> synth_plays(const std::string& template_name, std::size_t count, std::uint64_t seed,
                                    const SynthConfig& cfg) {
  Script (*make)(Rng&, const SynthConfig&) = nullptr;
  if (template_name == "give-and-go") make = give_and_go;
  else if (template_name == "pick-and-roll") make = pick_and_roll;
  else if (template_name == "ball-rotation") make = ball_rotation;
  else if (template_name == "random-motion") make = random_motion;
  else throw ConfigError(fmt::format("unknown synthetic template '{}'", template_name));
  if (cfg.frames < 20) throw ConfigError("synthetic plays need at least 20 frames");

  std::vector<PlayRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = play_stream(seed, i);
    const Script script = make(rng, cfg);
    out.push_back(realize(script, rng, cfg));
  }
  return out;
}

std::vector<PlayRecord> synth_mixed(std::size_t count, std::uint64_t seed, const SynthConfig& cfg) {
  std::vector<PlayRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = kSynthTemplates[i % kSynthTemplates.size()];
    auto one = synth_plays(name, 1, seed ^ (0x9e3779b97f4a7c15ull * (i + 1)), cfg);
    out.push_back(std::move(one.front()));
  }
  return out;
}

}  // namespace courtsketch
