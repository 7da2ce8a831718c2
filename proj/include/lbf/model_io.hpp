#ifndef LBF_MODEL_IO_HPP
#define LBF_MODEL_IO_HPP

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lbf/moment_matrix.hpp"
#include "lbf/portfolio.hpp"

namespace lbf::io {

inline constexpr int kFormatVersion = 1;

// Parse or validation failure. `location` is "line L, column C" for syntax
// errors and a JSON pointer (e.g. "/beliefs/2/covariance") otherwise.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& message)
      : Error(location + ": " + message), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

using Matrix = std::vector<std::vector<double>>;

struct NormalBelief {
  VariableList variables;
  std::vector<double> mean;
  Matrix covariance;
  friend bool operator==(const NormalBelief&, const NormalBelief&) = default;
};
struct ObservationBelief {
  VariableList variables;
  std::vector<double> values;
  friend bool operator==(const ObservationBelief&, const ObservationBelief&) = default;
};
struct VacuousBelief {
  VariableList variables;
  friend bool operator==(const VacuousBelief&, const VacuousBelief&) = default;
};
struct ProperBelief {
  VariableList ignorant;
  VariableList known;
  std::vector<double> mean;
  Matrix covariance;
  friend bool operator==(const ProperBelief&, const ProperBelief&) = default;
};
struct LinearEquationBelief {
  VariableList inputs;
  VariableList outputs;
  Matrix coefficients;  // |inputs| x |outputs|
  std::vector<double> intercept;
  friend bool operator==(const LinearEquationBelief&, const LinearEquationBelief&) = default;
};
struct RegressionBelief {
  VariableList inputs;
  VariableList outputs;
  Matrix coefficients;
  std::vector<double> intercept;
  Matrix residual_covariance;
  friend bool operator==(const RegressionBelief&, const RegressionBelief&) = default;
};

using BeliefParams = std::variant<NormalBelief, ObservationBelief, VacuousBelief, ProperBelief,
                                  LinearEquationBelief, RegressionBelief>;

struct BeliefSpec {
  std::string label;
  BeliefParams params;
  friend bool operator==(const BeliefSpec&, const BeliefSpec&) = default;
};

std::string_view kind_name(const BeliefParams& p);
VariableList domain(const BeliefParams& p);
MomentMatrix to_moment_matrix(const BeliefParams& p);

struct FactorModelSpec {
  std::string stock;
  double intercept = 0.0;
  std::vector<std::pair<std::string, double>> betas;
  std::string residual;
  std::optional<double> residual_sd;
  friend bool operator==(const FactorModelSpec&, const FactorModelSpec&) = default;
};

struct PortfolioSection {
  std::string variable = "P";
  std::vector<std::string> stocks;
  std::vector<double> weights;
  std::vector<FactorModelSpec> factor_models;
  friend bool operator==(const PortfolioSection&, const PortfolioSection&) = default;
};

struct EvidenceSpec {
  std::vector<std::string> targets;
  std::string kind;  // "normal" | "observation"
  std::vector<double> mean;
  std::vector<double> sd;  // normal only
  std::string note;
  friend bool operator==(const EvidenceSpec&, const EvidenceSpec&) = default;
};

struct ModelDocument {
  int format_version = kFormatVersion;
  std::string name;
  std::vector<std::string> variables;
  std::vector<BeliefSpec> beliefs;
  std::optional<PortfolioSection> portfolio;
  std::vector<EvidenceSpec> evidence;
  friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

ModelDocument parse_model(std::string_view text);
// Canonical UTF-8 JSON: fixed key order, 2-space indent, shortest
// round-trip numbers, trailing newline.
std::string serialize_model(const ModelDocument& doc);

// Parses an evidence file: either {"format_version": 1, "evidence": [...]}
// or a bare array of evidence objects.
std::vector<EvidenceSpec> parse_evidence(std::string_view text);
std::string serialize_evidence(const std::vector<EvidenceSpec>& evidence);
// One evidence object, as accepted by the service.
EvidenceSpec parse_evidence_item(std::string_view text);

EvidenceItem to_evidence_item(const EvidenceSpec& spec);
EvidenceSpec from_evidence_item(const EvidenceItem& item);

// The document's beliefs become priors; the portfolio section is required.
PortfolioSpec to_portfolio_spec(const ModelDocument& doc);
// Belief network without the portfolio encoding (beliefs only).
ValuationNetwork to_network(const ModelDocument& doc);

std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Directory of model files, one "<id>.json" per model.
class ModelRepository {
 public:
  explicit ModelRepository(std::filesystem::path dir);
  std::vector<std::string> list() const;
  bool exists(const std::string& id) const;
  // Throws Error if the id is unknown or the file does not parse.
  ModelDocument load(const std::string& id) const;
  std::string load_text(const std::string& id) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct SessionRecord {
  int format_version = kFormatVersion;
  std::string id;
  std::string base_model;
  std::vector<EvidenceSpec> evidence;  // append-only
  std::string created;                 // ISO-8601 UTC
  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

std::string serialize_session(const SessionRecord& record);
SessionRecord parse_session(std::string_view text);

// One canonical file per session, "<id>.json". Writes to the same id are
// serialized.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);
  void save(const SessionRecord& record);
  // Throws Error for unknown ids or version mismatch.
  SessionRecord load(const std::string& id) const;
  bool exists(const std::string& id) const;
  std::vector<std::string> list() const;

 private:
  std::filesystem::path path_for(const std::string& id) const;
  std::mutex& lock_for(const std::string& id);

  std::filesystem::path dir_;
  std::mutex locks_guard_;
  std::map<std::string, std::mutex> locks_;
};

// Session ids and model ids are restricted to [A-Za-z0-9_-]+.
bool valid_id(std::string_view id);

}  // namespace lbf::io

#endif  // LBF_MODEL_IO_HPP
