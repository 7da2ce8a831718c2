#ifndef LBF_PORTFOLIO_HPP
#define LBF_PORTFOLIO_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lbf/moment_matrix.hpp"
#include "lbf/valuation_network.hpp"

namespace lbf {

// stock = intercept + sum(beta_k * factor_k) + residual
struct FactorModel {
  VariableId stock;
  double intercept = 0.0;
  std::vector<std::pair<VariableId, double>> betas;
  VariableId residual;
  // Regression standard error. Without it the residual stays vacuous.
  std::optional<double> residual_sd;
};

struct Prior {
  std::string label;
  MomentMatrix matrix;
};

struct PortfolioSpec {
  VariableId portfolio{"P"};
  VariableList stocks;
  // Value fractions, one per stock, summing to 1.
  std::vector<double> weights;
  std::vector<FactorModel> factor_models;
  std::vector<Prior> priors;
};

enum class EvidenceKind { kNormal, kObservation };

// Knowledge entered after the model is built. Normal evidence carries one
// mean and one standard deviation per target (independent); observation
// evidence carries one value per target in `mean`.
struct EvidenceItem {
  VariableList targets;
  EvidenceKind kind = EvidenceKind::kNormal;
  std::vector<double> mean;
  std::vector<double> sd;
  std::string note;
};

// Throws DomainError/DimensionError if the item is malformed.
void validate(const EvidenceItem& item);
MomentMatrix to_moment_matrix(const EvidenceItem& item);

struct AssetReport {
  // Portfolio variable first, then the stocks.
  VariableList variables;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::MatrixXd covariance;
  double riskless_rate = 0.0;
  // Tangency weights over the stocks; empty when the stock covariance is
  // singular (e.g. every stock observed).
  std::optional<Eigen::VectorXd> optimal_weights;
  std::string optimal_weights_error;
};

// Throws DomainError/VariableError when the spec's invariants do not hold.
void validate(const PortfolioSpec& spec);

ValuationNetwork build_network(const PortfolioSpec& spec);

// Adds evidence items as beliefs labelled "evidence[i]". Observations are
// not added; see evaluate().
ValuationNetwork add_evidence(const ValuationNetwork& net, const std::vector<EvidenceItem>& items);

// Belief on `query` given the network and evidence, as a fully unswept
// Gaussian. Observed variables come back with zero variance.
GaussianSummary query_summary(const ValuationNetwork& net, const std::vector<EvidenceItem>& evidence,
                              const VariableList& query);

AssetReport evaluate(const PortfolioSpec& spec, const std::vector<EvidenceItem>& evidence,
                     double riskless_rate = 0.0);

// Maximum-Sharpe weights, proportional to cov^-1 (mean - rate), summing to 1.
// No sign constraint.
Eigen::VectorXd tangency_weights(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                 double riskless_rate = 0.0);

double sharpe_ratio(const Eigen::VectorXd& weights, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov, double riskless_rate = 0.0);

}  // namespace lbf

#endif  // LBF_PORTFOLIO_HPP
