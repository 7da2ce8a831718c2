#include "lbf/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lbf::io {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---- Reading with JSON-pointer error locations ----

class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const json& value() const { return value_; }
  const std::string& path() const { return path_.empty() ? root_ : path_; }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(path(), message); }

  void expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        Node(value_[key], path_ + "/" + key).fail("unknown field");
  }

  bool has(const std::string& key) const { return value_.contains(key); }

  Node at(const std::string& key) const {
    if (!value_.contains(key)) Node(value_, path_ + "/" + key).fail("missing field");
    return Node(value_.at(key), path_ + "/" + key);
  }

  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "/" + std::to_string(i)); }

  std::vector<Node> array() const {
    if (!value_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value_.size(); ++i) out.push_back(at(i));
    return out;
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double x = value_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }

  int integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    return value_.get<int>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& n : array()) out.push_back(n.number());
    return out;
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (const auto& n : array()) out.push_back(n.string());
    return out;
  }

  Matrix matrix(std::size_t rows, std::size_t cols) const {
    const auto items = array();
    if (items.size() != rows)
      fail("expected " + std::to_string(rows) + " rows, got " + std::to_string(items.size()));
    Matrix out;
    for (const auto& row : items) {
      auto r = row.numbers();
      if (r.size() != cols)
        row.fail("expected " + std::to_string(cols) + " columns, got " + std::to_string(r.size()));
      out.push_back(std::move(r));
    }
    return out;
  }

  std::vector<double> numbers(std::size_t n) const {
    auto out = numbers();
    if (out.size() != n)
      fail("expected " + std::to_string(n) + " entries, got " + std::to_string(out.size()));
    return out;
  }

 private:
  inline static const std::string root_ = "/";
  const json& value_;
  std::string path_;
};

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string msg = e.what();
    if (auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column), msg);
  }
}

VariableList to_vars(const std::vector<std::string>& names) {
  return VariableList(names.begin(), names.end());
}

std::vector<std::string> names_of(const VariableList& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(v.name);
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd to_eigen(const Matrix& m, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i).at(j);
  return out;
}

std::vector<std::string> variable_names(const Node& n, const std::set<std::string>& declared) {
  auto names = n.strings();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!declared.count(names[i])) n.at(i).fail("undeclared variable '" + names[i] + "'");
    if (!seen.insert(names[i]).second) n.at(i).fail("duplicate variable '" + names[i] + "'");
  }
  return names;
}

BeliefParams parse_params(const Node& n, const std::string& kind,
                          const std::set<std::string>& declared) {
  if (kind == "normal") {
    n.expect_object({"label", "kind", "variables", "mean", "covariance"});
    NormalBelief b;
    b.variables = to_vars(variable_names(n.at("variables"), declared));
    b.mean = n.at("mean").numbers(b.variables.size());
    b.covariance = n.at("covariance").matrix(b.variables.size(), b.variables.size());
    return b;
  }
  if (kind == "observation") {
    n.expect_object({"label", "kind", "variables", "values"});
    ObservationBelief b;
    b.variables = to_vars(variable_names(n.at("variables"), declared));
    b.values = n.at("values").numbers(b.variables.size());
    return b;
  }
  if (kind == "vacuous") {
    n.expect_object({"label", "kind", "variables"});
    return VacuousBelief{to_vars(variable_names(n.at("variables"), declared))};
  }
  if (kind == "proper") {
    n.expect_object({"label", "kind", "ignorant", "known", "mean", "covariance"});
    ProperBelief b;
    b.ignorant = to_vars(variable_names(n.at("ignorant"), declared));
    b.known = to_vars(variable_names(n.at("known"), declared));
    b.mean = n.at("mean").numbers(b.known.size());
    b.covariance = n.at("covariance").matrix(b.known.size(), b.known.size());
    return b;
  }
  if (kind == "linear_equation" || kind == "regression") {
    const bool regression = kind == "regression";
    if (regression)
      n.expect_object({"label", "kind", "inputs", "outputs", "coefficients", "intercept",
                       "residual_covariance"});
    else
      n.expect_object({"label", "kind", "inputs", "outputs", "coefficients", "intercept"});
    const auto inputs = to_vars(variable_names(n.at("inputs"), declared));
    const auto outputs = to_vars(variable_names(n.at("outputs"), declared));
    const auto coef = n.at("coefficients").matrix(inputs.size(), outputs.size());
    const auto intercept = n.at("intercept").numbers(outputs.size());
    if (!regression) return LinearEquationBelief{inputs, outputs, coef, intercept};
    return RegressionBelief{inputs, outputs, coef, intercept,
                            n.at("residual_covariance").matrix(outputs.size(), outputs.size())};
  }
  n.at("kind").fail("unknown belief kind '" + kind + "'");
}

EvidenceSpec parse_evidence_node(const Node& n) {
  n.expect_object({"targets", "kind", "mean", "sd", "value", "note"});
  EvidenceSpec e;
  const auto targets = n.at("targets");
  e.targets = targets.strings();
  e.kind = n.at("kind").string();
  if (e.kind == "normal") {
    if (n.has("value")) n.at("value").fail("normal evidence takes mean and sd");
    e.mean = n.at("mean").numbers(e.targets.size());
    e.sd = n.at("sd").numbers(e.targets.size());
    const auto sd = n.at("sd");
    for (std::size_t i = 0; i < e.sd.size(); ++i)
      if (!(e.sd[i] > 0.0)) sd.at(i).fail("sd must be > 0");
  } else if (e.kind == "observation") {
    if (n.has("sd") || n.has("mean")) n.at("value").fail("observation evidence takes only value");
    e.mean = n.at("value").numbers(e.targets.size());
  } else {
    n.at("kind").fail("unknown evidence kind '" + e.kind + "' (expected normal or observation)");
  }
  if (n.has("note")) e.note = n.at("note").string();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < e.targets.size(); ++i) {
    if (e.targets[i].empty()) targets.at(i).fail("empty variable name");
    if (!seen.insert(e.targets[i]).second) targets.at(i).fail("duplicate target");
  }
  if (e.targets.empty()) targets.fail("at least one target required");
  return e;
}

FactorModelSpec parse_factor_model(const Node& n, const std::set<std::string>& declared) {
  n.expect_object({"stock", "intercept", "betas", "residual", "residual_sd"});
  FactorModelSpec fm;
  auto var = [&](const Node& v) {
    auto name = v.string();
    if (!declared.count(name)) v.fail("undeclared variable '" + name + "'");
    return name;
  };
  fm.stock = var(n.at("stock"));
  fm.intercept = n.at("intercept").number();
  for (const auto& b : n.at("betas").array()) {
    b.expect_object({"factor", "beta"});
    fm.betas.emplace_back(var(b.at("factor")), b.at("beta").number());
  }
  fm.residual = var(n.at("residual"));
  if (n.has("residual_sd") && !n.at("residual_sd").value().is_null()) {
    const auto sd = n.at("residual_sd");
    fm.residual_sd = sd.number();
    if (*fm.residual_sd < 0.0) sd.fail("residual_sd must be >= 0");
  }
  return fm;
}

PortfolioSection parse_portfolio(const Node& n, const std::set<std::string>& declared) {
  n.expect_object({"variable", "stocks", "weights", "factor_models"});
  PortfolioSection p;
  p.variable = n.at("variable").string();
  if (!declared.count(p.variable))
    n.at("variable").fail("undeclared variable '" + p.variable + "'");
  const auto stocks = n.at("stocks");
  p.stocks = variable_names(stocks, declared);
  const auto weights = n.at("weights");
  p.weights = weights.numbers(p.stocks.size());
  const double total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "weights sum to " << total << ", expected 1";
    weights.fail(os.str());
  }
  for (const auto& fm : n.at("factor_models").array())
    p.factor_models.push_back(parse_factor_model(fm, declared));
  return p;
}

// ---- Writing ----

ordered_json write_matrix(const Matrix& m) {
  ordered_json out = ordered_json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

ordered_json write_params(const std::string& label, const BeliefParams& params) {
  ordered_json j;
  j["label"] = label;
  j["kind"] = std::string(kind_name(params));
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, NormalBelief>) {
          j["variables"] = names_of(b.variables);
          j["mean"] = b.mean;
          j["covariance"] = write_matrix(b.covariance);
        } else if constexpr (std::is_same_v<T, ObservationBelief>) {
          j["variables"] = names_of(b.variables);
          j["values"] = b.values;
        } else if constexpr (std::is_same_v<T, VacuousBelief>) {
          j["variables"] = names_of(b.variables);
        } else if constexpr (std::is_same_v<T, ProperBelief>) {
          j["ignorant"] = names_of(b.ignorant);
          j["known"] = names_of(b.known);
          j["mean"] = b.mean;
          j["covariance"] = write_matrix(b.covariance);
        } else {
          j["inputs"] = names_of(b.inputs);
          j["outputs"] = names_of(b.outputs);
          j["coefficients"] = write_matrix(b.coefficients);
          j["intercept"] = b.intercept;
          if constexpr (std::is_same_v<T, RegressionBelief>)
            j["residual_covariance"] = write_matrix(b.residual_covariance);
        }
      },
      params);
  return j;
}

ordered_json write_evidence(const EvidenceSpec& e) {
  ordered_json j;
  j["targets"] = e.targets;
  j["kind"] = e.kind;
  if (e.kind == "observation") {
    j["value"] = e.mean;
  } else {
    j["mean"] = e.mean;
    j["sd"] = e.sd;
  }
  j["note"] = e.note;
  return j;
}

ordered_json write_evidence_list(const std::vector<EvidenceSpec>& list) {
  ordered_json out = ordered_json::array();
  for (const auto& e : list) out.push_back(write_evidence(e));
  return out;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string_view kind_name(const BeliefParams& p) {
  static constexpr std::string_view kNames[] = {"normal",  "observation",     "vacuous",
                                                "proper",  "linear_equation", "regression"};
  return kNames[p.index()];
}

VariableList domain(const BeliefParams& p) {
  return std::visit(
      [](const auto& b) -> VariableList {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ProperBelief>) {
          VariableList out = b.ignorant;
          out.insert(out.end(), b.known.begin(), b.known.end());
          return out;
        } else if constexpr (std::is_same_v<T, LinearEquationBelief> ||
                             std::is_same_v<T, RegressionBelief>) {
          VariableList out = b.inputs;
          out.insert(out.end(), b.outputs.begin(), b.outputs.end());
          return out;
        } else {
          return b.variables;
        }
      },
      p);
}

MomentMatrix to_moment_matrix(const BeliefParams& p) {
  return std::visit(
      [](const auto& b) -> MomentMatrix {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, NormalBelief>) {
          const auto n = b.variables.size();
          return from_normal(b.variables, to_eigen(b.mean), to_eigen(b.covariance, n, n));
        } else if constexpr (std::is_same_v<T, ObservationBelief>) {
          return from_observation(b.variables, to_eigen(b.values));
        } else if constexpr (std::is_same_v<T, VacuousBelief>) {
          return vacuous(b.variables);
        } else if constexpr (std::is_same_v<T, ProperBelief>) {
          const auto n = b.known.size();
          return proper_lbf(b.ignorant, b.known, to_eigen(b.mean), to_eigen(b.covariance, n, n));
        } else if constexpr (std::is_same_v<T, LinearEquationBelief>) {
          return from_linear_equation(b.inputs, b.outputs,
                                      to_eigen(b.coefficients, b.inputs.size(), b.outputs.size()),
                                      to_eigen(b.intercept));
        } else {
          const auto q = b.outputs.size();
          return from_regression(b.inputs, b.outputs,
                                 to_eigen(b.coefficients, b.inputs.size(), q),
                                 to_eigen(b.intercept), to_eigen(b.residual_covariance, q, q));
        }
      },
      p);
}

ModelDocument parse_model(std::string_view text) {
  const json j = parse_json(text);
  const Node root(j, "");
  root.expect_object({"format_version", "name", "variables", "beliefs", "portfolio", "evidence"});

  ModelDocument doc;
  const auto version = root.at("format_version");
  doc.format_version = version.integer();
  if (doc.format_version != kFormatVersion)
    version.fail("unsupported format_version " + std::to_string(doc.format_version) +
                 " (expected " + std::to_string(kFormatVersion) + ")");
  if (root.has("name")) doc.name = root.at("name").string();

  const auto vars = root.at("variables");
  doc.variables = vars.strings();
  std::set<std::string> declared;
  for (std::size_t i = 0; i < doc.variables.size(); ++i) {
    if (doc.variables[i].empty()) vars.at(i).fail("empty variable name");
    if (!declared.insert(doc.variables[i]).second)
      vars.at(i).fail("duplicate variable '" + doc.variables[i] + "'");
  }

  std::set<std::string> labels;
  for (const auto& b : root.at("beliefs").array()) {
    if (!b.value().is_object()) b.fail("expected an object");
    BeliefSpec spec;
    spec.label = b.at("label").string();
    if (spec.label.empty()) b.at("label").fail("empty label");
    if (!labels.insert(spec.label).second) b.at("label").fail("duplicate label '" + spec.label + "'");
    spec.params = parse_params(b, b.at("kind").string(), declared);
    try {
      to_moment_matrix(spec.params);
    } catch (const Error& e) {
      b.fail("belief '" + spec.label + "': " + e.what());
    }
    doc.beliefs.push_back(std::move(spec));
  }

  if (root.has("portfolio")) {
    doc.portfolio = parse_portfolio(root.at("portfolio"), declared);
    try {
      validate(to_portfolio_spec(ModelDocument{doc.format_version, "", doc.variables, {},
                                               doc.portfolio, {}}));
    } catch (const Error& e) {
      root.at("portfolio").fail(e.what());
    }
  }
  if (root.has("evidence")) {
    for (const auto& e : root.at("evidence").array()) {
      auto item = parse_evidence_node(e);
      for (std::size_t i = 0; i < item.targets.size(); ++i)
        if (!declared.count(item.targets[i]))
          e.at("targets").at(i).fail("undeclared variable '" + item.targets[i] + "'");
      doc.evidence.push_back(std::move(item));
    }
  }
  return doc;
}

std::string serialize_model(const ModelDocument& doc) {
  ordered_json j;
  j["format_version"] = doc.format_version;
  j["name"] = doc.name;
  j["variables"] = doc.variables;
  ordered_json beliefs = ordered_json::array();
  for (const auto& b : doc.beliefs) beliefs.push_back(write_params(b.label, b.params));
  j["beliefs"] = std::move(beliefs);
  if (doc.portfolio) {
    const auto& p = *doc.portfolio;
    ordered_json pj;
    pj["variable"] = p.variable;
    pj["stocks"] = p.stocks;
    pj["weights"] = p.weights;
    ordered_json models = ordered_json::array();
    for (const auto& fm : p.factor_models) {
      ordered_json mj;
      mj["stock"] = fm.stock;
      mj["intercept"] = fm.intercept;
      ordered_json betas = ordered_json::array();
      for (const auto& [factor, beta] : fm.betas) {
        ordered_json bj;
        bj["factor"] = factor;
        bj["beta"] = beta;
        betas.push_back(std::move(bj));
      }
      mj["betas"] = std::move(betas);
      mj["residual"] = fm.residual;
      mj["residual_sd"] = fm.residual_sd ? ordered_json(*fm.residual_sd) : ordered_json(nullptr);
      models.push_back(std::move(mj));
    }
    pj["factor_models"] = std::move(models);
    j["portfolio"] = std::move(pj);
  }
  j["evidence"] = write_evidence_list(doc.evidence);
  return dump(j);
}

std::vector<EvidenceSpec> parse_evidence(std::string_view text) {
  const json j = parse_json(text);
  const Node root(j, "");
  std::vector<EvidenceSpec> out;
  if (j.is_array()) {
    for (const auto& e : root.array()) out.push_back(parse_evidence_node(e));
    return out;
  }
  root.expect_object({"format_version", "evidence"});
  const auto version = root.at("format_version");
  if (version.integer() != kFormatVersion)
    version.fail("unsupported format_version " + std::to_string(version.integer()));
  for (const auto& e : root.at("evidence").array()) out.push_back(parse_evidence_node(e));
  return out;
}

std::string serialize_evidence(const std::vector<EvidenceSpec>& evidence) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["evidence"] = write_evidence_list(evidence);
  return dump(j);
}

EvidenceSpec parse_evidence_item(std::string_view text) {
  const json j = parse_json(text);
  return parse_evidence_node(Node(j, ""));
}

EvidenceItem to_evidence_item(const EvidenceSpec& spec) {
  EvidenceItem item;
  item.targets = to_vars(spec.targets);
  if (spec.kind == "normal") {
    item.kind = EvidenceKind::kNormal;
  } else if (spec.kind == "observation") {
    item.kind = EvidenceKind::kObservation;
  } else {
    throw DomainError("evidence: unknown kind '" + spec.kind + "'");
  }
  item.mean = spec.mean;
  item.sd = spec.sd;
  item.note = spec.note;
  validate(item);
  return item;
}

EvidenceSpec from_evidence_item(const EvidenceItem& item) {
  EvidenceSpec spec;
  spec.targets = names_of(item.targets);
  spec.kind = item.kind == EvidenceKind::kNormal ? "normal" : "observation";
  spec.mean = item.mean;
  spec.sd = item.sd;
  spec.note = item.note;
  return spec;
}

PortfolioSpec to_portfolio_spec(const ModelDocument& doc) {
  if (!doc.portfolio) throw DomainError("model has no portfolio section");
  const auto& p = *doc.portfolio;
  PortfolioSpec spec;
  spec.portfolio = p.variable;
  spec.stocks = to_vars(p.stocks);
  spec.weights = p.weights;
  for (const auto& fm : p.factor_models) {
    FactorModel m;
    m.stock = fm.stock;
    m.intercept = fm.intercept;
    for (const auto& [factor, beta] : fm.betas) m.betas.emplace_back(factor, beta);
    m.residual = fm.residual;
    m.residual_sd = fm.residual_sd;
    spec.factor_models.push_back(std::move(m));
  }
  for (const auto& b : doc.beliefs) spec.priors.push_back(Prior{b.label, to_moment_matrix(b.params)});
  return spec;
}

ValuationNetwork to_network(const ModelDocument& doc) {
  ValuationNetwork net;
  for (const auto& v : doc.variables) net = net.add_variable(v);
  for (const auto& b : doc.beliefs) net = net.add_belief(b.label, to_moment_matrix(b.params));
  return net;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

bool valid_id(std::string_view id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

// ---- ModelRepository ----

ModelRepository::ModelRepository(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) throw Error("model directory not found: " + dir_.string());
}

std::vector<std::string> ModelRepository::list() const {
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    auto id = entry.path().stem().string();
    if (valid_id(id)) out.push_back(std::move(id));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool ModelRepository::exists(const std::string& id) const {
  return valid_id(id) && std::filesystem::is_regular_file(dir_ / (id + ".json"));
}

std::string ModelRepository::load_text(const std::string& id) const {
  if (!exists(id)) throw Error("unknown model '" + id + "'");
  return read_file(dir_ / (id + ".json"));
}

ModelDocument ModelRepository::load(const std::string& id) const {
  return parse_model(load_text(id));
}

// ---- Sessions ----

std::string serialize_session(const SessionRecord& record) {
  ordered_json j;
  j["format_version"] = record.format_version;
  j["id"] = record.id;
  j["base_model"] = record.base_model;
  j["created"] = record.created;
  j["evidence"] = write_evidence_list(record.evidence);
  return dump(j);
}

SessionRecord parse_session(std::string_view text) {
  const json j = parse_json(text);
  const Node root(j, "");
  root.expect_object({"format_version", "id", "base_model", "created", "evidence"});
  SessionRecord r;
  const auto version = root.at("format_version");
  r.format_version = version.integer();
  if (r.format_version != kFormatVersion)
    version.fail("session format_version " + std::to_string(r.format_version) +
                 " does not match " + std::to_string(kFormatVersion));
  r.id = root.at("id").string();
  if (!valid_id(r.id)) root.at("id").fail("invalid session id");
  r.base_model = root.at("base_model").string();
  r.created = root.at("created").string();
  for (const auto& e : root.at("evidence").array()) r.evidence.push_back(parse_evidence_node(e));
  return r;
}

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path SessionStore::path_for(const std::string& id) const {
  if (!valid_id(id)) throw Error("invalid session id '" + id + "'");
  return dir_ / (id + ".json");
}

std::mutex& SessionStore::lock_for(const std::string& id) {
  std::lock_guard guard(locks_guard_);
  return locks_[id];
}

void SessionStore::save(const SessionRecord& record) {
  const auto path = path_for(record.id);
  std::lock_guard lock(lock_for(record.id));
  write_file_atomic(path, serialize_session(record));
}

SessionRecord SessionStore::load(const std::string& id) const {
  const auto path = path_for(id);
  if (!std::filesystem::is_regular_file(path)) throw Error("unknown session '" + id + "'");
  SessionRecord r = parse_session(read_file(path));
  if (r.id != id) throw Error("session file " + path.string() + " holds id '" + r.id + "'");
  return r;
}

bool SessionStore::exists(const std::string& id) const {
  return valid_id(id) && std::filesystem::is_regular_file(dir_ / (id + ".json"));
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    auto id = entry.path().stem().string();
    if (valid_id(id)) out.push_back(std::move(id));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lbf::io
