#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "courtsketch/court.hpp"

namespace courtsketch {

using Json = nlohmann::json;

Json to_json(const Play& play);
Play play_from_json(const Json& j);

Json to_json(const SketchPlay& sketch);
SketchPlay sketch_from_json(const Json& j);

Json to_json(const BallAction& action);
BallAction action_from_json(const Json& j);

Json to_json(const EventLog& events);
EventLog events_from_json(const Json& j);

/// One dataset record: a play and, optionally, its ball events under "events".
struct PlayRecord {
  Play play;
  EventLog events;
};

std::vector<PlayRecord> read_play_records(const std::filesystem::path& path);
void write_play_records(const std::filesystem::path& path, const std::vector<PlayRecord>& records);
void write_plays(const std::filesystem::path& path, const std::vector<Play>& plays);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace courtsketch
