#include "lbf/valuation_network.hpp"

#include <algorithm>
#include <set>

namespace lbf {
namespace {

bool contains(const VariableList& vars, const VariableId& v) {
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

}  // namespace

ValuationNetwork ValuationNetwork::add_variable(const VariableId& v) const {
  if (v.name.empty()) throw VariableError("add_variable: empty variable name");
  ValuationNetwork out = *this;
  if (!has_variable(v)) out.variables_.push_back(v);
  return out;
}

ValuationNetwork ValuationNetwork::add_belief(std::string label, MomentMatrix m) const {
  if (label.empty()) throw VariableError("add_belief: empty label");
  if (find_belief(label)) throw VariableError("add_belief: duplicate label " + label);
  ValuationNetwork out = *this;
  for (const auto& v : m.variables())
    if (!out.has_variable(v)) out.variables_.push_back(v);
  out.beliefs_.push_back(Belief{std::move(label), std::move(m)});
  return out;
}

bool ValuationNetwork::has_variable(const VariableId& v) const { return contains(variables_, v); }

const Belief* ValuationNetwork::find_belief(const std::string& label) const {
  for (const auto& b : beliefs_)
    if (b.label == label) return &b;
  return nullptr;
}

std::vector<std::string> ValuationNetwork::neighbors(const VariableId& v) const {
  std::vector<std::string> out;
  for (const auto& b : beliefs_)
    if (b.matrix.contains(v)) out.push_back(b.label);
  return out;
}

EliminationOrder elimination_order(const ValuationNetwork& net, const VariableList& query) {
  const VariableList& vars = net.variables();
  const std::size_t n = vars.size();
  auto index = [&](const VariableId& v) {
    return static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin());
  };

  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& b : net.beliefs()) {
    const auto& dom = b.matrix.variables();
    for (const auto& x : dom)
      for (const auto& y : dom)
        if (x != y) adj[index(x)].insert(index(y));
  }

  std::vector<bool> pending(n, false);
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!contains(query, vars[i])) {
      pending[i] = true;
      ++remaining;
    }

  EliminationOrder order;
  while (remaining > 0) {
    std::size_t best = n;
    std::size_t best_fill = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pending[i]) continue;
      std::size_t fill = 0;
      for (auto a = adj[i].begin(); a != adj[i].end(); ++a)
        for (auto b = std::next(a); b != adj[i].end(); ++b)
          if (!adj[*a].count(*b)) ++fill;
      if (best == n || fill < best_fill) {
        best = i;
        best_fill = fill;
      }
    }
    for (auto a : adj[best])
      for (auto b : adj[best])
        if (a != b) adj[a].insert(b);
    for (auto a : adj[best]) adj[a].erase(best);
    adj[best].clear();
    pending[best] = false;
    --remaining;
    order.push_back(vars[best]);
  }
  return order;
}

MomentMatrix combine_all(std::vector<MomentMatrix> beliefs) {
  if (beliefs.empty()) return MomentMatrix{};
  MomentMatrix acc = std::move(beliefs.front());
  beliefs.erase(beliefs.begin());
  while (!beliefs.empty()) {
    bool progressed = false;
    for (auto it = beliefs.begin(); it != beliefs.end(); ++it) {
      try {
        acc = combine(acc, *it);
      } catch (const SingularBlockError&) {
        continue;
      }
      beliefs.erase(it);
      progressed = true;
      break;
    }
    if (!progressed)
      throw SingularBlockError("combine_all: no remaining belief can be combined with " +
                               to_string(acc.variables()));
  }
  return acc;
}

MomentMatrix marginal(const ValuationNetwork& net, const VariableList& query) {
  return marginal(net, query, elimination_order(net, query));
}

MomentMatrix marginal(const ValuationNetwork& net, const VariableList& query,
                      const EliminationOrder& order) {
  for (const auto& q : query)
    if (!net.has_variable(q)) throw VariableError("marginal: unknown query variable " + q.name);
  {
    VariableList expected;
    for (const auto& v : net.variables())
      if (!contains(query, v)) expected.push_back(v);
    VariableList given = order;
    std::sort(expected.begin(), expected.end());
    std::sort(given.begin(), given.end());
    if (expected != given)
      throw VariableError("marginal: elimination order must cover exactly the non-query variables");
  }

  std::vector<MomentMatrix> pool;
  for (const auto& b : net.beliefs()) pool.push_back(b.matrix);

  for (const auto& v : order) {
    std::vector<MomentMatrix> touching;
    std::vector<MomentMatrix> rest;
    for (auto& m : pool) (m.contains(v) ? touching : rest).push_back(std::move(m));
    pool = std::move(rest);
    if (touching.empty()) continue;

    MomentMatrix fused = combine_all(std::move(touching));
    VariableList keep;
    for (const auto& w : fused.variables())
      if (w != v) keep.push_back(w);
    try {
      fused = marginalize(fused, keep);
    } catch (const SingularBlockError& e) {
      throw SingularBlockError("marginal: eliminating " + v.name + " failed: " + e.what());
    }
    if (!fused.empty()) pool.push_back(std::move(fused));
  }

  MomentMatrix joint = combine_all(std::move(pool));
  VariableList missing;
  for (const auto& q : query)
    if (!joint.contains(q)) missing.push_back(q);
  joint = extend(joint, missing);
  return permute(marginalize(joint, query), query);
}

}  // namespace lbf
