#include "server.hpp"

#include <functional>

#include <httplib.h>

#include "mmsa/error.hpp"

namespace mmsa::app {

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

// Runs `fn` and maps failures onto HTTP status codes.
void guarded(httplib::Response& res, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.category()), error_body(e));
  } catch (const json::exception& e) {
    send_error(res, 400, {{"error", "ParseError"}, {"message", e.what()}});
  } catch (const std::exception& e) {
    send_error(res, 500, {{"error", "Internal"}, {"message", e.what()}});
  }
}

ModelPtr require_model(const Session& s) {
  ModelPtr m = s.get();
  if (!m) throw Error(ErrorCode::NoModelLoaded, "no model loaded; POST one to /api/model");
  return m;
}

using Handler = json (*)(const LoadedModel&, const json&);

void post_model_route(httplib::Server& server, Session& session, const char* path, Handler h) {
  server.Post(path, [&session, h](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const ModelPtr m = require_model(session);
      res.set_content(h(*m, parse_json(req.body)).dump(), kJson);
    });
  });
}

}  // namespace

void register_routes(httplib::Server& server, Session& session,
                     const std::filesystem::path& model_dir) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", kJson);
  });

  server.Get("/api/model", [&session](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(handle_model(*require_model(session)).dump(), kJson); });
  });

  server.Post("/api/model", [&session, model_dir](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json doc = parse_json(req.body);
      LoadedModel loaded = [&] {
        if (doc.is_object() && doc.size() == 1 && doc.contains("path")) {
          if (model_dir.empty()) {
            throw Error(ErrorCode::ParseError, "service was started without a model directory");
          }
          const std::filesystem::path name = doc.at("path").get<std::string>();
          if (name.has_parent_path() || name.filename() != name || name == ".." || name == ".") {
            throw Error(ErrorCode::ParseError, "model path must be a plain file name");
          }
          return load_model_file(model_dir / name);
        }
        return load_model(doc);
      }();
      auto ptr = std::make_shared<const LoadedModel>(std::move(loaded));
      json summary = handle_model(*ptr);
      session.set(std::move(ptr));
      res.set_content(summary.dump(), kJson);
    });
  });

  server.Get("/api/models", [model_dir](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json names = json::array();
      if (!model_dir.empty() && std::filesystem::is_directory(model_dir)) {
        std::vector<std::string> found;
        for (const auto& e : std::filesystem::directory_iterator(model_dir)) {
          if (e.is_regular_file() && e.path().extension() == ".json") {
            found.push_back(e.path().filename().string());
          }
        }
        std::sort(found.begin(), found.end());
        names = found;
      }
      res.set_content(json{{"models", names}}.dump(), kJson);
    });
  });

  post_model_route(server, session, "/api/prob", &handle_prob);
  post_model_route(server, session, "/api/covary", &handle_covary);
  post_model_route(server, session, "/api/classify", &handle_classify);
  post_model_route(server, session, "/api/project", &handle_project);
  post_model_route(server, session, "/api/analyze", &handle_analyze);

  server.Post("/api/sensitivity", [&session](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const ModelPtr m = require_model(session);
      const json body = parse_json(req.body);
      if (body.is_object() && body.value("format", "json") == "csv") {
        res.set_content(sensitivity_csv(*m, body), "text/csv");
      } else {
        res.set_content(handle_sensitivity(*m, body).dump(), kJson);
      }
    });
  });

  // Raw distributions need no model.
  server.Post("/api/divergence", [&session](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_json(req.body);
      if (body.is_object() && (body.contains("p") || body.contains("q"))) {
        res.set_content(handle_raw_divergence(body).dump(), kJson);
        return;
      }
      const ModelPtr m = require_model(session);
      res.set_content(handle_divergence(*m, body).dump(), kJson);
    });
  });
}

}  // namespace mmsa::app
