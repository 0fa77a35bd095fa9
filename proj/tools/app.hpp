#pragma once

// Request handlers shared by the command-line tool and the HTTP service.
// Every handler takes a JSON request and returns a JSON response; errors
// surface as mmsa::Error.

#include <memory>
#include <mutex>
#include <string>

#include "mmsa/error.hpp"
#include "mmsa/io.hpp"

namespace mmsa::app {

using ModelPtr = std::shared_ptr<const LoadedModel>;

/// Default curve resolution; MMSA_GRID_DEFAULT overrides it.
std::size_t default_grid();

json handle_validate(const LoadedModel& m);
json handle_model(const LoadedModel& m);
json handle_prob(const LoadedModel& m, const json& req);
json handle_covary(const LoadedModel& m, const json& req);
json handle_sensitivity(const LoadedModel& m, const json& req);
/// CSV rendering of the same request.
std::string sensitivity_csv(const LoadedModel& m, const json& req);
json handle_divergence(const LoadedModel& m, const json& req);
/// {"q": [...], "p": [...], "metrics": [...]}: no model involved.
json handle_raw_divergence(const json& req);
json handle_classify(const LoadedModel& m, const json& req);
json handle_project(const LoadedModel& m, const json& req);
json handle_analyze(const LoadedModel& m, const json& req);

/// True when the report from handle_validate describes a clean model.
bool validation_clean(const json& report);

/// {"error": name, "message": text}
json error_body(const Error& e);
int http_status(ErrorCategory c);

/// The one model a service process holds; swapped atomically on upload.
class Session {
 public:
  ModelPtr get() const;
  void set(ModelPtr m);

 private:
  mutable std::mutex mu_;
  ModelPtr model_;
};

}  // namespace mmsa::app
