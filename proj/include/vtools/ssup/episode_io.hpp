#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vtools/ssup/agent.hpp"

namespace vtools::ssup {

// One JSON object per attempt ({"type":"attempt", ...}) followed by a summary
// line ({"type":"episode", ...}) carrying the config snapshot.
void write_episode(std::ostream& out, const EpisodeLog& log);
// Reads back any number of consecutive episodes. Throws std::runtime_error on
// malformed input.
std::vector<EpisodeLog> read_episodes(std::istream& in);
std::vector<EpisodeLog> read_episodes(const std::filesystem::path& path);

}  // namespace vtools::ssup
