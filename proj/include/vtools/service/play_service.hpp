#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtools/levels/attempt.hpp"

namespace vtools::service {

// Seconds since the Unix epoch; injectable so tests control time.
using Clock = std::function<double()>;
Clock system_clock();

enum class Reason {
  kProhibitedZone,
  kBodyOverlap,
  kOutOfBounds,
  kClockExpired,
  kSessionClosed,
  kSessionAdvanced,  // the level was already solved
  kNotFound,
  kBadRequest,
};

std::string_view to_string(Reason r);
int http_status(Reason r);

class ServiceError : public std::runtime_error {
 public:
  ServiceError(Reason reason, const std::string& detail)
      : std::runtime_error(detail), reason_(reason) {}
  Reason reason() const { return reason_; }
  nlohmann::json body() const { return {{"reason", to_string(reason_)}, {"detail", what()}}; }

 private:
  Reason reason_;
};

struct AttemptRecord {
  std::string session_id;
  std::string level;
  int index = 0;  // 1-based within (session, level)
  double timestamp = 0.0;
  levels::Action action;
  bool solved = false;
  double min_goal_distance = 0.0;
  double reward = 0.0;
  std::string trajectory_ref;  // path relative to the storage root, empty without storage

  bool operator==(const AttemptRecord&) const = default;
};

nlohmann::json to_json(const AttemptRecord& r);
AttemptRecord record_from_json(const nlohmann::json& j);

struct LevelProgress {
  std::optional<double> started;  // first view
  int attempts = 0;
  bool solved = false;
};

struct SessionView {
  std::string id;
  std::string participant;
  std::vector<std::string> levels;
  bool closed = false;
};

struct AttemptResult {
  AttemptRecord record;
  nlohmann::json trajectory;  // physics trajectory wire format
};

class PlayService {
 public:
  // `storage` holds index.jsonl, sessions/<id>.jsonl and trajectories/; without
  // it the log lives in memory only.
  PlayService(std::vector<levels::LevelSpec> levels, std::optional<std::filesystem::path> storage,
              Clock clock = system_clock());

  nlohmann::json list_levels() const;
  const std::string& level_document(const std::string& name) const;

  // Empty `levels` assigns every bundled level in order.
  SessionView create_session(const std::string& participant, const std::vector<std::string>& levels = {});
  SessionView session(const std::string& id) const;
  void close_session(const std::string& id);

  // Starts the level clock if it is not running; returns document and progress.
  nlohmann::json view_level(const std::string& session_id, const std::string& level);

  // Throws ServiceError for every rejection; nothing is persisted then.
  AttemptResult post_attempt(const std::string& session_id, const std::string& level, const nlohmann::json& body);

  std::vector<AttemptRecord> log(const std::string& session_id) const;

  double remaining_time(const std::string& session_id, const std::string& level) const;

 private:
  struct Session {
    SessionView view;
    std::map<std::string, LevelProgress> progress;
    std::vector<AttemptRecord> records;
    mutable std::mutex mutex;
  };

  const levels::LevelSpec& find_level(const std::string& name) const;
  std::shared_ptr<Session> find_session(const std::string& id) const;
  LevelProgress& progress_for(Session& s, const std::string& level);
  double elapsed(const LevelProgress& p, const levels::LevelSpec& level) const;
  void append_line(const std::filesystem::path& path, const std::string& line);

  std::vector<levels::LevelSpec> levels_;
  std::map<std::string, std::size_t> by_name_;
  std::optional<std::filesystem::path> storage_;
  Clock clock_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  std::mutex index_mutex_;
};

// Re-runs every record through the engine; returns the indices whose stored
// solved flag or distance differ.
std::vector<std::size_t> replay_mismatches(const std::vector<AttemptRecord>& records,
                                           const std::vector<levels::LevelSpec>& levels);

std::vector<AttemptRecord> read_attempt_log(const std::filesystem::path& path);

}  // namespace vtools::service
