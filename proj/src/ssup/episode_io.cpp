#include "vtools/ssup/episode_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace vtools::ssup {

using nlohmann::json;

void write_episode(std::ostream& out, const EpisodeLog& log) {
  for (std::size_t i = 0; i < log.attempts.size(); ++i) {
    const auto& a = log.attempts[i];
    out << json{{"type", "attempt"},
                {"index", i + 1},
                {"tool", a.action.tool},
                {"x", a.action.position.x()},
                {"y", a.action.position.y()},
                {"reward", a.reward},
                {"solved", a.solved},
                {"min_goal_distance", a.min_goal_distance},
                {"proposals", a.proposals}}
               .dump()
        << '\n';
  }
  out << json{{"type", "episode"},
              {"level", log.level},
              {"variant", to_string(log.variant)},
              {"seed", log.seed},
              {"solved", log.solved},
              {"attempts_used", log.attempts_used()},
              {"simulations", log.simulations},
              {"config", to_json(log.config)}}
             .dump()
      << '\n';
}

std::vector<EpisodeLog> read_episodes(std::istream& in) {
  std::vector<EpisodeLog> out;
  EpisodeLog current;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "attempt") {
        current.attempts.push_back({{j.at("tool").get<int>(), Vec2(j.at("x").get<double>(), j.at("y").get<double>())},
                                    j.at("reward").get<double>(),
                                    j.at("solved").get<bool>(),
                                    j.at("min_goal_distance").get<double>(),
                                    j.at("proposals").get<int>()});
      } else if (type == "episode") {
        current.level = j.at("level").get<std::string>();
        current.variant = parse_variant(j.at("variant").get<std::string>());
        current.seed = j.at("seed").get<std::uint64_t>();
        current.solved = j.at("solved").get<bool>();
        current.simulations = j.at("simulations").get<int>();
        current.config = config_from_json(j.at("config"));
        if (j.at("attempts_used").get<int>() != current.attempts_used()) {
          throw std::runtime_error("attempt count does not match summary");
        }
        out.push_back(std::move(current));
        current = EpisodeLog{};
      } else {
        throw std::runtime_error("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("episode log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!current.attempts.empty()) throw std::runtime_error("episode log ends without a summary line");
  return out;
}

std::vector<EpisodeLog> read_episodes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_episodes(in);
}

}  // namespace vtools::ssup
