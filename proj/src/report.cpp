#include "lbf/report.hpp"

#include <cmath>
#include <cstdint>

#include <fmt/format.h>

namespace lbf {
namespace {

using ordered_json = nlohmann::ordered_json;

// Rounds to 4 decimals without printing "-0.0000".
std::string fixed4(double x) {
  std::string s = fmt::format("{:.4f}", x);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

void append_matrix(std::string& out, const GaussianSummary& s) {
  std::vector<std::string> names;
  std::size_t width = 6;
  for (const auto& v : s.variables) {
    names.push_back(v.name);
    width = std::max(width, v.name.size());
  }
  const std::size_t col = 10;
  out += fmt::format("{:<{}}", "", width);
  for (const auto& n : names) out += fmt::format("{:>{}}", n, col);
  out += "\n";
  out += fmt::format("{:<{}}", "mean", width);
  for (Eigen::Index j = 0; j < s.mean.size(); ++j) out += fmt::format("{:>{}}", fixed4(s.mean(j)), col);
  out += "\n";
  for (Eigen::Index i = 0; i < s.covariance.rows(); ++i) {
    out += fmt::format("{:<{}}", names[static_cast<std::size_t>(i)], width);
    for (Eigen::Index j = 0; j < s.covariance.cols(); ++j)
      out += fmt::format("{:>{}}", fixed4(s.covariance(i, j)), col);
    out += "\n";
  }
}

std::string joined_names(const VariableList& vars) {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) out += (i ? ", " : "") + vars[i].name;
  return out;
}

ordered_json names_json(const VariableList& vars) {
  ordered_json out = ordered_json::array();
  for (const auto& v : vars) out.push_back(v.name);
  return out;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Evaluation evaluate_model(const io::ModelDocument& doc, const std::vector<io::EvidenceSpec>& extra,
                          const EvaluationOptions& options) {
  const PortfolioSpec spec = io::to_portfolio_spec(doc);
  std::vector<EvidenceItem> evidence;
  for (const auto& e : doc.evidence) evidence.push_back(io::to_evidence_item(e));
  for (const auto& e : extra) evidence.push_back(io::to_evidence_item(e));

  Evaluation out;
  out.assets = evaluate(spec, evidence, options.riskless_rate);
  if (options.query)
    out.query = query_summary(build_network(spec), evidence, *options.query);
  return out;
}

std::string format_table(const Evaluation& e) {
  const AssetReport& r = e.assets;
  std::string out;
  out += fmt::format("Moment matrix M({})\n", joined_names(r.variables));
  append_matrix(out, GaussianSummary{r.variables, r.mean, r.covariance});

  out += fmt::format("\n{:<8}{:>10}{:>10}\n", "asset", "mean", "sd");
  for (std::size_t i = 0; i < r.variables.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out += fmt::format("{:<8}{:>10}{:>10}\n", r.variables[i].name, fixed4(r.mean(k)), fixed4(r.sd(k)));
  }

  out += fmt::format("\ntangency weights (riskless rate {})\n", r.riskless_rate);
  if (r.optimal_weights) {
    for (std::size_t i = 1; i < r.variables.size(); ++i)
      out += fmt::format("{:<8}{:>10}\n", r.variables[i].name,
                         fixed4((*r.optimal_weights)(static_cast<Eigen::Index>(i - 1))));
  } else {
    out += "unavailable: " + r.optimal_weights_error + "\n";
  }

  if (e.query) {
    out += fmt::format("\nMoment matrix M({})\n", joined_names(e.query->variables));
    append_matrix(out, *e.query);
  }
  return out;
}

ordered_json to_json(const Evaluation& e) {
  const AssetReport& r = e.assets;
  ordered_json j;
  j["variables"] = names_json(r.variables);
  j["mean"] = vector_json(r.mean);
  j["sd"] = vector_json(r.sd);
  j["covariance"] = matrix_json(r.covariance);
  j["riskless_rate"] = r.riskless_rate;
  if (r.optimal_weights) {
    ordered_json w;
    w["stocks"] = names_json(VariableList(r.variables.begin() + 1, r.variables.end()));
    w["weights"] = vector_json(*r.optimal_weights);
    j["optimal_weights"] = std::move(w);
  } else {
    j["optimal_weights"] = nullptr;
    j["optimal_weights_error"] = r.optimal_weights_error;
  }
  if (e.query) {
    ordered_json q;
    q["variables"] = names_json(e.query->variables);
    q["mean"] = vector_json(e.query->mean);
    q["covariance"] = matrix_json(e.query->covariance);
    j["query"] = std::move(q);
  }
  return j;
}

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace lbf
