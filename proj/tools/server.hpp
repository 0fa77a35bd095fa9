#pragma once

#include <filesystem>

#include "app.hpp"

namespace httplib {
class Server;
}

namespace mmsa::app {

/// Installs the /api routes. `model_dir` (may be empty) is where
/// POST /api/model {"path": name} and GET /api/models look for files.
void register_routes(httplib::Server& server, Session& session,
                     const std::filesystem::path& model_dir);

}  // namespace mmsa::app
