#ifndef LBF_VALUATION_NETWORK_HPP
#define LBF_VALUATION_NETWORK_HPP

#include <string>
#include <vector>

#include "lbf/moment_matrix.hpp"

namespace lbf {

struct Belief {
  std::string label;
  MomentMatrix matrix;
};

// Bipartite graph of variables and belief functions. Edges are implied by
// each belief's domain. Networks are values: add_* return a new network.
class ValuationNetwork {
 public:
  ValuationNetwork() = default;

  // Registers a variable with no belief attached. No-op if already present.
  ValuationNetwork add_variable(const VariableId& v) const;
  // Appends a belief; unknown variables in its domain are registered in the
  // matrix's order. Throws VariableError on a duplicate label.
  ValuationNetwork add_belief(std::string label, MomentMatrix m) const;

  const VariableList& variables() const { return variables_; }
  const std::vector<Belief>& beliefs() const { return beliefs_; }
  bool has_variable(const VariableId& v) const;
  const Belief* find_belief(const std::string& label) const;
  // Labels of the beliefs whose domain contains `v`.
  std::vector<std::string> neighbors(const VariableId& v) const;

 private:
  VariableList variables_;
  std::vector<Belief> beliefs_;
};

using EliminationOrder = VariableList;

// Greedy min-fill order over the interaction graph (variables sharing a
// belief are adjacent), eliminating everything outside `query`. Ties go to
// the variable registered first.
EliminationOrder elimination_order(const ValuationNetwork& net, const VariableList& query);

// Joint belief on `query` by variable elimination. The result is in query
// order and may be partially swept; variables no belief informs come back
// vacuous.
MomentMatrix marginal(const ValuationNetwork& net, const VariableList& query);
// As above with a caller-supplied order, which must be a permutation of the
// non-query variables.
MomentMatrix marginal(const ValuationNetwork& net, const VariableList& query,
                      const EliminationOrder& order);

// Combines a list of beliefs, choosing at each step the next operand that
// can be aligned with the running result. Throws SingularBlockError if no
// remaining operand can be combined.
MomentMatrix combine_all(std::vector<MomentMatrix> beliefs);

}  // namespace lbf

#endif  // LBF_VALUATION_NETWORK_HPP
