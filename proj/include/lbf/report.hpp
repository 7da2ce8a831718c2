#ifndef LBF_REPORT_HPP
#define LBF_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbf/model_io.hpp"
#include "lbf/portfolio.hpp"

namespace lbf {

struct EvaluationOptions {
  // Extra variables to report a joint belief on, besides the asset report.
  std::optional<VariableList> query;
  double riskless_rate = 0.0;
};

struct Evaluation {
  AssetReport assets;
  std::optional<GaussianSummary> query;
};

// Evaluates the model's portfolio given the document's own evidence
// followed by `extra`. This is the single evaluation path behind both the
// CLI and the HTTP service.
Evaluation evaluate_model(const io::ModelDocument& doc, const std::vector<io::EvidenceSpec>& extra,
                          const EvaluationOptions& options = {});

// Fixed-width, 4-decimal text report.
std::string format_table(const Evaluation& e);
// Full-precision JSON payload.
nlohmann::ordered_json to_json(const Evaluation& e);

// Stable hex digest (FNV-1a 64) used for model and session versions.
std::string digest(std::string_view bytes);

}  // namespace lbf

#endif  // LBF_REPORT_HPP
