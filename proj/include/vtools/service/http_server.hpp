#pragma once

// Eigen must be parsed before httplib: <resolv.h> defines a `res` macro.
#include "vtools/service/play_service.hpp"

#include <httplib.h>

namespace vtools::service {

// Routes:
//   GET  /levels
//   GET  /levels/{name}
//   POST /sessions                                   {participant, levels?}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/levels/{name}                starts the level clock
//   POST /sessions/{id}/levels/{name}/attempts       {tool, x, y}
//   GET  /sessions/{id}/log
//   POST /sessions/{id}/close
// Errors answer {reason, detail}.
void install_routes(httplib::Server& server, PlayService& service);

}  // namespace vtools::service
