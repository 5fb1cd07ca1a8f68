#include "vtools/service/play_service.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "vtools/physics/trajectory_io.hpp"

namespace vtools::service {

namespace fs = std::filesystem;
using nlohmann::json;

Clock system_clock() {
  return [] {
    return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  };
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::kProhibitedZone: return "prohibited-zone";
    case Reason::kBodyOverlap: return "body-overlap";
    case Reason::kOutOfBounds: return "out-of-bounds";
    case Reason::kClockExpired: return "clock-expired";
    case Reason::kSessionClosed: return "session-closed";
    case Reason::kSessionAdvanced: return "session-advanced";
    case Reason::kNotFound: return "not-found";
    case Reason::kBadRequest: return "bad-request";
  }
  return "unknown";
}

int http_status(Reason r) {
  switch (r) {
    case Reason::kProhibitedZone:
    case Reason::kBodyOverlap:
    case Reason::kOutOfBounds: return 422;
    case Reason::kClockExpired:
    case Reason::kSessionClosed:
    case Reason::kSessionAdvanced: return 409;
    case Reason::kNotFound: return 404;
    case Reason::kBadRequest: return 400;
  }
  return 500;
}

json to_json(const AttemptRecord& r) {
  return {{"session", r.session_id},
          {"level", r.level},
          {"index", r.index},
          {"timestamp", r.timestamp},
          {"tool", r.action.tool},
          {"x", r.action.position.x()},
          {"y", r.action.position.y()},
          {"solved", r.solved},
          {"min_goal_distance", r.min_goal_distance},
          {"reward", r.reward},
          {"trajectory", r.trajectory_ref}};
}

AttemptRecord record_from_json(const json& j) {
  AttemptRecord r;
  r.session_id = j.at("session").get<std::string>();
  r.level = j.at("level").get<std::string>();
  r.index = j.at("index").get<int>();
  r.timestamp = j.at("timestamp").get<double>();
  r.action = {j.at("tool").get<int>(), Vec2(j.at("x").get<double>(), j.at("y").get<double>())};
  r.solved = j.at("solved").get<bool>();
  r.min_goal_distance = j.at("min_goal_distance").get<double>();
  r.reward = j.at("reward").get<double>();
  r.trajectory_ref = j.at("trajectory").get<std::string>();
  return r;
}

PlayService::PlayService(std::vector<levels::LevelSpec> levels, std::optional<fs::path> storage, Clock clock)
    : levels_(std::move(levels)), storage_(std::move(storage)), clock_(std::move(clock)) {
  for (std::size_t i = 0; i < levels_.size(); ++i) by_name_.emplace(levels_[i].name, i);
  if (storage_) {
    fs::create_directories(*storage_ / "sessions");
    fs::create_directories(*storage_ / "trajectories");
    // keep ids unique across restarts on the same storage
    std::ifstream index(*storage_ / "index.jsonl");
    for (std::string line; std::getline(index, line);) {
      if (!line.empty()) ++next_id_;
    }
  }
}

json PlayService::list_levels() const {
  json out = json::array();
  for (const auto& l : levels_) {
    json entry{{"name", l.name}, {"description", l.description}, {"category", l.category},
               {"time_limit", l.time_limit}};
    if (l.pair) entry["pair"] = {{"group", l.pair->group}, {"variant", l.pair->variant}, {"delta", l.pair->delta}};
    out.push_back(std::move(entry));
  }
  return out;
}

const levels::LevelSpec& PlayService::find_level(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ServiceError(Reason::kNotFound, "no level named '" + name + "'");
  return levels_[it->second];
}

const std::string& PlayService::level_document(const std::string& name) const { return find_level(name).document; }

void PlayService::append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot append to " + path.string());
}

SessionView PlayService::create_session(const std::string& participant, const std::vector<std::string>& levels) {
  auto s = std::make_shared<Session>();
  s->view.participant = participant;
  if (levels.empty()) {
    for (const auto& l : levels_) s->view.levels.push_back(l.name);
  } else {
    for (const auto& name : levels) find_level(name);
    s->view.levels = levels;
  }
  std::unique_lock lock(sessions_mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "s%06llu", static_cast<unsigned long long>(next_id_++));
  s->view.id = id;
  if (storage_) {
    std::lock_guard index_lock(index_mutex_);
    append_line(*storage_ / "index.jsonl",
                json{{"session", s->view.id}, {"participant", participant}, {"levels", s->view.levels},
                     {"created", clock_()}, {"log", "sessions/" + s->view.id + ".jsonl"}}
                    .dump());
  }
  sessions_.emplace(s->view.id, s);
  return s->view;
}

std::shared_ptr<PlayService::Session> PlayService::find_session(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(Reason::kNotFound, "no session '" + id + "'");
  return it->second;
}

SessionView PlayService::session(const std::string& id) const {
  const auto s = find_session(id);
  std::lock_guard lock(s->mutex);
  return s->view;
}

void PlayService::close_session(const std::string& id) {
  const auto s = find_session(id);
  std::lock_guard lock(s->mutex);
  s->view.closed = true;
}

LevelProgress& PlayService::progress_for(Session& s, const std::string& level) {
  find_level(level);
  if (std::find(s.view.levels.begin(), s.view.levels.end(), level) == s.view.levels.end()) {
    throw ServiceError(Reason::kNotFound, "level '" + level + "' is not assigned to session " + s.view.id);
  }
  return s.progress[level];
}

double PlayService::elapsed(const LevelProgress& p, const levels::LevelSpec& level) const {
  if (!p.started) return 0.0;
  return std::min(clock_() - *p.started, level.time_limit);
}

json PlayService::view_level(const std::string& session_id, const std::string& name) {
  const auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  auto& p = progress_for(*s, name);
  const auto& level = find_level(name);
  if (!p.started && !s->view.closed) p.started = clock_();
  return {{"session", session_id},
          {"level", name},
          {"time_limit", level.time_limit},
          {"remaining", level.time_limit - elapsed(p, level)},
          {"attempts", p.attempts},
          {"solved", p.solved},
          {"document", json::parse(level.document)}};
}

double PlayService::remaining_time(const std::string& session_id, const std::string& name) const {
  const auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  const auto& level = find_level(name);
  const auto it = s->progress.find(name);
  return level.time_limit - (it == s->progress.end() ? 0.0 : elapsed(it->second, level));
}

namespace {

levels::Action parse_action(const json& body) {
  if (!body.is_object()) throw ServiceError(Reason::kBadRequest, "attempt body must be a JSON object");
  if (!body.contains("tool") || body["tool"].is_null()) {
    throw ServiceError(Reason::kBadRequest, "an attempt must place exactly one tool");
  }
  const auto& tool = body["tool"];
  if (!tool.is_number_integer() || tool.get<int>() < 0 || tool.get<int>() > 2) {
    throw ServiceError(Reason::kBadRequest, "tool must be 0, 1 or 2");
  }
  for (const char* k : {"x", "y"}) {
    if (!body.contains(k) || !body[k].is_number()) {
      throw ServiceError(Reason::kBadRequest, std::string("'") + k + "' must be a number");
    }
  }
  return {tool.get<int>(), Vec2(body["x"].get<double>(), body["y"].get<double>())};
}

Reason reason_for(levels::Rejection r) {
  switch (r) {
    case levels::Rejection::kProhibitedZone: return Reason::kProhibitedZone;
    case levels::Rejection::kBodyOverlap: return Reason::kBodyOverlap;
    case levels::Rejection::kOutOfBounds: return Reason::kOutOfBounds;
  }
  return Reason::kBadRequest;
}

}  // namespace

AttemptResult PlayService::post_attempt(const std::string& session_id, const std::string& name, const json& body) {
  const auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  auto& p = progress_for(*s, name);
  const auto& level = find_level(name);
  if (p.solved) throw ServiceError(Reason::kSessionAdvanced, "level '" + name + "' is already solved");
  if (s->view.closed) throw ServiceError(Reason::kSessionClosed, "session " + session_id + " is closed");
  const double now = clock_();
  if (!p.started) p.started = now;
  if (now - *p.started >= level.time_limit) {
    throw ServiceError(Reason::kClockExpired, "time for level '" + name + "' has run out");
  }
  const levels::Action action = parse_action(body);
  if (const auto rejection = levels::validate_action(level, action)) {
    throw ServiceError(reason_for(*rejection), "placement rejected: " + std::string(levels::to_string(*rejection)));
  }

  const auto outcome = levels::attempt(level, action, {}, 0);
  AttemptResult result;
  result.trajectory = physics::to_json(outcome.trajectory);
  auto& r = result.record;
  r.session_id = session_id;
  r.level = name;
  r.index = p.attempts + 1;
  r.timestamp = now;
  r.action = action;
  r.solved = outcome.solved;
  r.min_goal_distance = outcome.min_goal_distance;
  r.reward = outcome.reward;
  if (storage_) {
    const fs::path rel = fs::path("trajectories") / session_id / (name + "_" + std::to_string(r.index) + ".json");
    fs::create_directories((*storage_ / rel).parent_path());
    std::ofstream(*storage_ / rel, std::ios::binary) << result.trajectory.dump();
    r.trajectory_ref = rel.generic_string();
    append_line(*storage_ / "sessions" / (session_id + ".jsonl"), to_json(r).dump());
  }
  ++p.attempts;
  p.solved = r.solved;
  s->records.push_back(r);
  return result;
}

std::vector<AttemptRecord> PlayService::log(const std::string& session_id) const {
  const auto s = find_session(session_id);
  std::lock_guard lock(s->mutex);
  return s->records;
}

std::vector<AttemptRecord> read_attempt_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open attempt log " + path.string());
  std::vector<AttemptRecord> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(record_from_json(json::parse(line)));
  }
  return out;
}

std::vector<std::size_t> replay_mismatches(const std::vector<AttemptRecord>& records,
                                           const std::vector<levels::LevelSpec>& levels) {
  std::vector<std::size_t> bad;
  levels::AttemptOptions options;
  options.record_trajectory = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto it = std::find_if(levels.begin(), levels.end(), [&](const auto& l) { return l.name == r.level; });
    if (it == levels.end()) {
      bad.push_back(i);
      continue;
    }
    const auto outcome = levels::attempt(*it, r.action, {}, 0, options);
    if (outcome.solved != r.solved || outcome.min_goal_distance != r.min_goal_distance) bad.push_back(i);
  }
  return bad;
}

}  // namespace vtools::service
