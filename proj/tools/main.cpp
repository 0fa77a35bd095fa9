#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "app.hpp"
#include "mmsa/error.hpp"
#include "server.hpp"

using mmsa::json;
namespace app = mmsa::app;

namespace {

struct Common {
  std::string model;
  std::string format = "json";
  std::string out;
  std::vector<std::string> vary;
  std::string spec_file;
};

void add_model_options(CLI::App* sub, Common& c) {
  sub->add_option("model,-m,--model", c.model, "Model file (JSON)");
}

void add_vary_options(CLI::App* sub, Common& c, const char* help) {
  sub->add_option("--vary,-v", c.vary, help);
  sub->add_option("--spec", c.spec_file, "Variation spec file {\"vary\":{...},\"scheme\":...}");
}

void add_output_options(CLI::App* sub, Common& c, bool csv) {
  if (csv) {
    sub->add_option("--format,-f", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  } else {
    sub->add_option("--format,-f", c.format, "Output format")->check(CLI::IsMember({"json"}));
  }
  sub->add_option("--out,-o", c.out, "Write output to this file instead of stdout");
}

mmsa::LoadedModel load(const Common& c) {
  if (c.model.empty()) throw mmsa::Error(mmsa::ErrorCode::ParseError, "no model file given");
  return mmsa::load_model_file(c.model);
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw mmsa::Error(mmsa::ErrorCode::ParseError, "cannot write '" + c.out + "'");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

// Request skeleton from --spec and --vary. With `with_values`, every --vary
// needs key=value; otherwise only keys are kept.
json base_request(const Common& c, const mmsa::LoadedModel& m, bool with_values) {
  json req = json::object();
  if (!c.spec_file.empty()) req = mmsa::read_json_file(c.spec_file);
  if (c.vary.empty()) return req;
  std::vector<std::string> warnings;
  if (with_values) {
    json vary = req.contains("vary") ? req.at("vary") : json::object();
    for (const auto& arg : c.vary) {
      const auto [p, value] = mmsa::parse_vary_argument(m.compiled.theta, arg, &warnings);
      if (!value) {
        throw mmsa::Error(mmsa::ErrorCode::ParseError, "--vary '" + arg + "' needs a target (key=value)");
      }
      const auto eq = arg.rfind('=');
      vary[arg.substr(0, eq)] = *value;
    }
    req["vary"] = std::move(vary);
  } else {
    json keys = json::array();
    for (const auto& arg : c.vary) {
      const auto [p, value] = mmsa::parse_vary_argument(m.compiled.theta, arg, &warnings);
      keys.push_back(value ? arg.substr(0, arg.rfind('=')) : arg);
    }
    req["vary"] = std::move(keys);
  }
  return req;
}

void print_warnings(const json& out) {
  if (!out.is_object() || !out.contains("warnings")) return;
  for (const auto& w : out.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (true) {
      const auto pos = item.find(',', start);
      const auto part = item.substr(start, pos == std::string::npos ? pos : pos - start);
      if (!part.empty()) out.push_back(part);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Monomial-model sensitivity analysis"};
  cli.require_subcommand(1);
  Common c;

  auto* validate = cli.add_subcommand("validate", "Check a model file; exit 0 iff clean");
  add_model_options(validate, c);
  add_output_options(validate, c, false);

  auto* compile = cli.add_subcommand("compile", "Print the raw monomial-model form of a model");
  add_model_options(compile, c);
  add_output_options(compile, c, false);

  std::string event;
  std::string scheme;
  std::vector<std::string> block_schemes;
  auto* prob = cli.add_subcommand("prob", "Probability of an event, optionally after covariation");
  add_model_options(prob, c);
  add_vary_options(prob, c, "Parameter key=target");
  prob->add_option("--event,-e", event, "Event, e.g. Y3=3 or y1,y2")->required();
  prob->add_option("--scheme,-s", scheme, "Covariation scheme");
  add_output_options(prob, c, false);

  auto* cov = cli.add_subcommand("covary", "Covary parameters towards targets");
  add_model_options(cov, c);
  add_vary_options(cov, c, "Parameter key=target");
  cov->add_option("--scheme,-s", scheme, "Default scheme");
  cov->add_option("--block-scheme", block_schemes, "Per-block scheme: key=scheme");
  add_output_options(cov, c, false);

  std::vector<std::string> schemes;
  std::size_t grid = 0;
  auto* sens = cli.add_subcommand("sensitivity", "Sensitivity curves of an event");
  add_model_options(sens, c);
  add_vary_options(sens, c, "Varied parameter key (one or two)");
  sens->add_option("--event,-e", event, "Event, e.g. Y3=3")->required();
  sens->add_option("--schemes", schemes, "Comma-separated schemes");
  sens->add_option("--grid,-g", grid, "Points per axis (default 99 or MMSA_GRID_DEFAULT)");
  add_output_options(sens, c, true);

  std::vector<std::string> metrics;
  auto* div = cli.add_subcommand("divergence", "Divergences between the model and its covariation");
  add_model_options(div, c);
  add_vary_options(div, c, "Parameter key=target");
  div->add_option("--scheme,-s", scheme, "Covariation scheme");
  div->add_option("--schemes", schemes, "Compare several schemes");
  div->add_option("--metric", metrics, "kl, cd or phi:<name> (comma-separated)");
  add_output_options(div, c, false);

  std::size_t samples = 20;
  std::size_t seed = 1;
  bool no_oracle = false;
  auto* ana = cli.add_subcommand("analyze", "Classify a variation and check proportional optimality");
  add_model_options(ana, c);
  add_vary_options(ana, c, "Parameter key=target");
  ana->add_option("--samples", samples, "Random points of L_sensi for the residual check");
  ana->add_option("--seed", seed, "Random seed");
  ana->add_option("--grid,-g", grid, "Oracle grid resolution (default 50)");
  ana->add_flag("--no-oracle", no_oracle, "Skip the grid oracle");
  add_output_options(ana, c, false);

  std::size_t threads = 0;
  auto* proj = cli.add_subcommand("project", "Grid-search the I-projection onto L_sensi");
  add_model_options(proj, c);
  add_vary_options(proj, c, "Parameter key=target");
  proj->add_option("--grid,-g", grid, "Grid resolution per block (default 50)");
  proj->add_option("--threads", threads, "Worker threads (0 = all cores)");
  add_output_options(proj, c, false);

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string model_dir;
  auto* serve = cli.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--model,-m", c.model, "Model to load at start-up");
  serve->add_option("--port,-p", port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--model-dir", model_dir, "Directory served by POST /api/model {\"path\":...}");

  CLI11_PARSE(cli, argc, argv);

  if (*validate) {
    json report;
    try {
      report = app::handle_validate(load(c));
    } catch (const mmsa::Error& e) {
      report = {{"valid", false}, {"error", app::error_body(e)}};
    }
    emit(c, report.dump(2));
    return report.value("valid", false) ? 0 : 1;
  }

  try {
    if (*serve) {
      app::Session session;
      if (!c.model.empty()) session.set(std::make_shared<const mmsa::LoadedModel>(load(c)));
      httplib::Server server;
      app::register_routes(server, session, model_dir);
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }

    const mmsa::LoadedModel m = load(c);
    json out;
    if (*compile) {
      out = mmsa::raw_model_to_json(m.compiled);
    } else if (*prob) {
      json req = base_request(c, m, true);
      req["event"] = event;
      if (!scheme.empty()) req["scheme"] = scheme;
      out = app::handle_prob(m, req);
    } else if (*cov) {
      json req = base_request(c, m, true);
      if (!block_schemes.empty()) {
        json map = json::object();
        if (!scheme.empty()) map["default"] = scheme;
        for (const auto& bs : block_schemes) {
          const auto eq = bs.rfind('=');
          if (eq == std::string::npos) {
            throw mmsa::Error(mmsa::ErrorCode::ParseError, "--block-scheme takes key=scheme");
          }
          map[bs.substr(0, eq)] = bs.substr(eq + 1);
        }
        req["scheme"] = std::move(map);
      } else if (!scheme.empty()) {
        req["scheme"] = scheme;
      }
      out = app::handle_covary(m, req);
    } else if (*sens) {
      json req = base_request(c, m, false);
      req["event"] = event;
      if (!schemes.empty()) req["schemes"] = split_list(schemes);
      if (grid) req["grid"] = grid;
      if (c.format == "csv") {
        emit(c, app::sensitivity_csv(m, req));
        return 0;
      }
      out = app::handle_sensitivity(m, req);
    } else if (*div) {
      json req = base_request(c, m, true);
      if (!scheme.empty()) req["scheme"] = scheme;
      if (!schemes.empty()) req["schemes"] = split_list(schemes);
      if (!metrics.empty()) req["metrics"] = split_list(metrics);
      out = app::handle_divergence(m, req);
    } else if (*ana) {
      json req = base_request(c, m, true);
      req["samples"] = samples;
      req["seed"] = seed;
      req["oracle"] = !no_oracle;
      if (grid) req["grid"] = grid;
      out = app::handle_analyze(m, req);
      std::string verdict = "kind: " + out.at("kind").get<std::string>();
      if (!out.at("projection").is_null()) {
        verdict += out.at("projection").at("matches_proportional").get<bool>()
                       ? "; proportional covariation is the I-projection (within one grid step)"
                       : "; proportional covariation is NOT the I-projection";
      }
      std::cerr << verdict << "\n";
    } else if (*proj) {
      json req = base_request(c, m, true);
      if (grid) req["grid"] = grid;
      req["threads"] = threads;
      out = app::handle_project(m, req);
    }
    print_warnings(out);
    emit(c, out.dump(2));
    return 0;
  } catch (const mmsa::Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return 1;
  }
}
