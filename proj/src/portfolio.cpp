#include "lbf/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace lbf {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

bool contains(const VariableList& vars, const VariableId& v) {
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

void push_unique(VariableList& vars, const VariableId& v) {
  if (!contains(vars, v)) vars.push_back(v);
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MomentMatrix residual_prior(const VariableId& residual, double sd) {
  // N(0, sd^2) in potential form: mean 0, block -1/sd^2.
  return sweep(from_normal({residual}, VectorXd::Zero(1), MatrixXd::Constant(1, 1, sd * sd)),
               {residual});
}

// The factor model as a linear equation, with the residual entering at coefficient 1, or
// without the residual when the model is exact.
MomentMatrix factor_equation(const FactorModel& fm, bool with_residual) {
  VariableList inputs;
  for (const auto& [factor, beta] : fm.betas) inputs.push_back(factor);
  if (with_residual) inputs.push_back(fm.residual);
  MatrixXd coef = MatrixXd::Ones(static_cast<Eigen::Index>(inputs.size()), 1);
  for (std::size_t i = 0; i < fm.betas.size(); ++i)
    coef(static_cast<Eigen::Index>(i), 0) = fm.betas[i].second;
  return from_linear_equation(std::move(inputs), {fm.stock}, coef,
                              VectorXd::Constant(1, fm.intercept));
}

}  // namespace

void validate(const EvidenceItem& item) {
  if (item.targets.empty()) throw DimensionError("evidence: no target variables");
  if (item.mean.size() != item.targets.size())
    throw DimensionError("evidence: expected " + std::to_string(item.targets.size()) +
                         " mean/value entries, got " + std::to_string(item.mean.size()));
  for (double x : item.mean)
    if (!std::isfinite(x)) throw DomainError("evidence: non-finite mean/value");
  if (item.kind == EvidenceKind::kNormal) {
    if (item.sd.size() != item.targets.size())
      throw DimensionError("evidence: expected " + std::to_string(item.targets.size()) +
                           " sd entries, got " + std::to_string(item.sd.size()));
    for (double s : item.sd)
      if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("evidence: sd must be > 0");
  } else if (!item.sd.empty()) {
    throw DimensionError("evidence: observation takes no sd");
  }
  std::set<VariableId> seen(item.targets.begin(), item.targets.end());
  if (seen.size() != item.targets.size()) throw VariableError("evidence: duplicate target");
}

MomentMatrix to_moment_matrix(const EvidenceItem& item) {
  validate(item);
  const VectorXd mean = to_vector(item.mean);
  if (item.kind == EvidenceKind::kObservation) return from_observation(item.targets, mean);
  const VectorXd sd = to_vector(item.sd);
  return from_normal(item.targets, mean, sd.array().square().matrix().asDiagonal());
}

void validate(const PortfolioSpec& spec) {
  if (spec.portfolio.name.empty()) throw VariableError("portfolio: empty portfolio variable");
  if (spec.stocks.empty()) throw DimensionError("portfolio: no stocks");
  std::set<VariableId> stocks(spec.stocks.begin(), spec.stocks.end());
  if (stocks.size() != spec.stocks.size()) throw VariableError("portfolio: duplicate stock");
  if (stocks.count(spec.portfolio))
    throw VariableError("portfolio: portfolio variable " + spec.portfolio.name + " is also a stock");
  if (spec.weights.size() != spec.stocks.size())
    throw DimensionError("portfolio: " + std::to_string(spec.weights.size()) + " weights for " +
                         std::to_string(spec.stocks.size()) + " stocks");
  const double total = std::accumulate(spec.weights.begin(), spec.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9)
    throw DomainError("portfolio: weights sum to " + std::to_string(total) + ", expected 1");

  std::set<VariableId> modelled;
  for (const auto& fm : spec.factor_models) {
    if (!stocks.count(fm.stock))
      throw VariableError("portfolio: factor model for unknown stock " + fm.stock.name);
    if (!modelled.insert(fm.stock).second)
      throw VariableError("portfolio: duplicate factor model for " + fm.stock.name);
    if (fm.residual.name.empty())
      throw VariableError("portfolio: factor model for " + fm.stock.name + " has no residual");
    if (fm.residual_sd && !(*fm.residual_sd >= 0.0))
      throw DomainError("portfolio: residual sd for " + fm.stock.name + " must be >= 0");
  }
  if (modelled.size() != stocks.size()) {
    for (const auto& s : spec.stocks)
      if (!modelled.count(s)) throw VariableError("portfolio: no factor model for " + s.name);
  }
}

ValuationNetwork build_network(const PortfolioSpec& spec) {
  validate(spec);

  ValuationNetwork net;
  VariableList known;
  for (const auto& fm : spec.factor_models) {
    for (const auto& [factor, beta] : fm.betas) push_unique(known, factor);
    push_unique(known, fm.residual);
    push_unique(known, fm.stock);
  }
  push_unique(known, spec.portfolio);

  for (const auto& fm : spec.factor_models) {
    // sd == 0: the stock is an exact function of its factors and the
    // residual variable stays unconnected.
    const bool exact = fm.residual_sd && *fm.residual_sd == 0.0;
    net = net.add_belief("model(" + fm.stock.name + ")", factor_equation(fm, !exact));
    if (exact) {
      net = net.add_variable(fm.residual);
      continue;
    }
    if (fm.residual_sd)
      net = net.add_belief("residual(" + fm.residual.name + ")",
                           residual_prior(fm.residual, *fm.residual_sd));
  }

  MatrixXd w(static_cast<Eigen::Index>(spec.weights.size()), 1);
  w.col(0) = to_vector(spec.weights);
  net = net.add_belief("blend(" + spec.portfolio.name + ")",
                       from_linear_equation(spec.stocks, {spec.portfolio}, w, VectorXd::Zero(1)));

  for (const auto& prior : spec.priors) {
    for (const auto& v : prior.matrix.variables())
      if (!contains(known, v))
        throw VariableError("portfolio: prior " + prior.label + " refers to unknown variable " +
                            v.name);
    net = net.add_belief(prior.label, prior.matrix);
  }
  return net;
}

ValuationNetwork add_evidence(const ValuationNetwork& net, const std::vector<EvidenceItem>& items) {
  ValuationNetwork out = net;
  for (std::size_t i = 0; i < items.size(); ++i) {
    validate(items[i]);
    if (items[i].kind != EvidenceKind::kNormal) continue;
    for (const auto& v : items[i].targets)
      if (!net.has_variable(v)) throw VariableError("evidence: unknown variable " + v.name);
    out = out.add_belief("evidence[" + std::to_string(i) + "]", to_moment_matrix(items[i]));
  }
  return out;
}

GaussianSummary query_summary(const ValuationNetwork& net, const std::vector<EvidenceItem>& evidence,
                              const VariableList& query) {
  const ValuationNetwork full = add_evidence(net, evidence);

  // Observations are applied by exact conditioning after marginalization.
  VariableList observed;
  std::vector<double> values;
  for (const auto& item : evidence) {
    if (item.kind != EvidenceKind::kObservation) continue;
    for (std::size_t k = 0; k < item.targets.size(); ++k) {
      const auto& v = item.targets[k];
      if (!net.has_variable(v)) throw VariableError("evidence: unknown variable " + v.name);
      if (contains(observed, v))
        throw DomainError("evidence: variable " + v.name + " observed more than once");
      observed.push_back(v);
      values.push_back(item.mean[k]);
    }
  }

  VariableList extended = query;
  for (const auto& v : observed) push_unique(extended, v);
  MomentMatrix joint = marginal(full, extended);
  if (!observed.empty()) joint = condition(joint, observed, to_vector(values));
  const GaussianSummary free = to_summary(joint);

  const auto n = static_cast<Eigen::Index>(query.size());
  GaussianSummary out{query, VectorXd::Zero(n), MatrixXd::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& vi = query[static_cast<std::size_t>(i)];
    auto obs = std::find(observed.begin(), observed.end(), vi);
    if (obs != observed.end()) {
      out.mean(i) = values[static_cast<std::size_t>(obs - observed.begin())];
      continue;
    }
    out.mean(i) = free.mean_of(vi);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& vj = query[static_cast<std::size_t>(j)];
      if (!contains(observed, vj)) out.covariance(i, j) = free.covariance_of(vi, vj);
    }
  }
  return out;
}

AssetReport evaluate(const PortfolioSpec& spec, const std::vector<EvidenceItem>& evidence,
                     double riskless_rate) {
  const ValuationNetwork net = build_network(spec);
  VariableList query{spec.portfolio};
  query.insert(query.end(), spec.stocks.begin(), spec.stocks.end());
  const GaussianSummary s = query_summary(net, evidence, query);

  AssetReport report;
  report.variables = s.variables;
  report.mean = s.mean;
  report.covariance = s.covariance;
  report.sd = s.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  report.riskless_rate = riskless_rate;

  const auto k = static_cast<Eigen::Index>(spec.stocks.size());
  try {
    report.optimal_weights = tangency_weights(s.mean.tail(k), s.covariance.bottomRightCorner(k, k),
                                              riskless_rate);
  } catch (const Error& e) {
    report.optimal_weights_error = e.what();
  }
  return report;
}

VectorXd tangency_weights(const VectorXd& mean, const MatrixXd& cov, double riskless_rate) {
  const auto n = mean.size();
  if (n == 0) throw DimensionError("tangency_weights: no assets");
  if (cov.rows() != n || cov.cols() != n)
    throw DimensionError("tangency_weights: covariance must be " + std::to_string(n) + "x" +
                         std::to_string(n));
  const double scale = std::max(1e-300, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tolerance::kSymmetry * scale)
    throw DomainError("tangency_weights: covariance is not symmetric");
  const MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::JacobiSVD<MatrixXd> svd(sym);
  const VectorXd& sv = svd.singularValues();
  Eigen::LLT<MatrixXd> llt(sym);
  if (!(sv(0) > 0.0) || sv(n - 1) <= tolerance::kSingular * sv(0) || llt.info() != Eigen::Success)
    throw SingularBlockError("tangency_weights: covariance is not positive definite");

  const VectorXd excess = mean.array() - riskless_rate;
  if (excess.cwiseAbs().maxCoeff() == 0.0)
    throw DomainError("tangency_weights: excess returns are all zero");
  const VectorXd raw = llt.solve(excess);
  const double total = raw.sum();
  if (std::abs(total) <= 1e-14 * raw.cwiseAbs().sum())
    throw DomainError("tangency_weights: optimal direction has zero net investment");
  return raw / total;
}

double sharpe_ratio(const VectorXd& weights, const VectorXd& mean, const MatrixXd& cov,
                    double riskless_rate) {
  const double excess = weights.dot(mean) - riskless_rate * weights.sum();
  return excess / std::sqrt(weights.dot(cov * weights));
}

}  // namespace lbf
