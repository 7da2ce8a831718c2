// lbfport: portfolio evaluation with linear belief functions.
//
//   lbfport evaluate --model MODEL.json [--evidence EVIDENCE.json]
//                    [--query P,S1] [--riskless-rate 0] [--format table|json]
//   lbfport serve --models DIR [--sessions DIR] [--bind HOST:PORT]
//
// The bind address can also come from LBF_BIND.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lbf/model_io.hpp"
#include "lbf/report.hpp"
#include "lbf/service.hpp"

namespace {

lbf::service::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

lbf::VariableList split_vars(const std::string& text) {
  lbf::VariableList out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.emplace_back(item.substr(b, e - b + 1));
  }
  return out;
}

int run_evaluate(const std::string& model_path, const std::string& evidence_path,
                 const std::string& query, double riskless_rate, const std::string& format) {
  const auto doc = lbf::io::parse_model(lbf::io::read_file(model_path));
  std::vector<lbf::io::EvidenceSpec> evidence;
  if (!evidence_path.empty())
    evidence = lbf::io::parse_evidence(lbf::io::read_file(evidence_path));

  lbf::EvaluationOptions options;
  options.riskless_rate = riskless_rate;
  if (!query.empty()) options.query = split_vars(query);

  const auto result = lbf::evaluate_model(doc, evidence, options);
  if (format == "json")
    std::cout << lbf::to_json(result).dump(2) << "\n";
  else
    std::cout << lbf::format_table(result);
  return 0;
}

int run_serve(const std::string& models, const std::string& sessions, const std::string& bind) {
  lbf::service::ServeOptions options;
  options.model_dir = models;
  options.session_dir = sessions.empty() ? std::filesystem::path(models) / "sessions"
                                         : std::filesystem::path(sessions);
  if (const char* env = std::getenv("LBF_BIND")) lbf::service::apply_bind_address(options, env);
  lbf::service::apply_bind_address(options, bind);

  lbf::service::Server server(options);
  const int port = server.bind();
  std::cerr << "listening on " << options.host << ":" << port << "\n";
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio evaluation with linear belief functions"};
  app.require_subcommand(1);

  std::string model_path;
  std::string evidence_path;
  std::string query;
  double riskless_rate = 0.0;
  std::string format = "table";
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model and print the report");
  evaluate->add_option("--model", model_path, "Model document (JSON)")->required();
  evaluate->add_option("--evidence", evidence_path, "Evidence file (JSON)");
  evaluate->add_option("--query", query, "Comma-separated variables to report a joint belief on");
  evaluate->add_option("--riskless-rate", riskless_rate, "Riskless rate for tangency weights");
  evaluate->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"table", "json"}));

  std::string models;
  std::string sessions;
  std::string bind;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--models", models, "Directory of model documents")->required();
  serve->add_option("--sessions", sessions, "Session store directory (default MODELS/sessions)");
  serve->add_option("--bind", bind, "Bind address HOST:PORT (overrides LBF_BIND)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) return run_evaluate(model_path, evidence_path, query, riskless_rate, format);
    return run_serve(models, sessions, bind);
  } catch (const std::exception& e) {
    std::cerr << "lbfport: error: " << e.what() << "\n";
    return 1;
  }
}
