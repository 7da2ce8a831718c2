#include "lbf/moment_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace lbf {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

void require_unique(const VariableList& vars, const char* what) {
  std::unordered_set<VariableId> seen;
  for (const auto& v : vars) {
    if (v.name.empty()) throw VariableError(std::string(what) + ": empty variable name");
    if (!seen.insert(v).second)
      throw VariableError(std::string(what) + ": duplicate variable " + v.name);
  }
}

void require_disjoint(const VariableList& a, const VariableList& b, const char* what) {
  for (const auto& v : a)
    if (std::find(b.begin(), b.end(), v) != b.end())
      throw DomainError(std::string(what) + ": variable " + v.name + " appears in both lists");
}

void require_square(const MatrixXd& m, Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << what << ": expected " << n << "x" << n << " matrix, got " << m.rows() << "x"
       << m.cols();
    throw DimensionError(os.str());
  }
}

void require_length(const VectorXd& v, Index n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << ": expected length " << n << ", got " << v.size();
    throw DimensionError(os.str());
  }
}

void require_symmetric_psd(const MatrixXd& cov, const char* what) {
  if (cov.size() == 0) return;
  if (!cov.allFinite()) throw DomainError(std::string(what) + ": non-finite covariance entry");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tolerance::kSymmetry * scale)
    throw DomainError(std::string(what) + ": covariance is not symmetric");
  const MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const double floor = -tolerance::kPsdFloor * std::abs(sym.trace());
  if (eig.eigenvalues().minCoeff() < floor)
    throw DomainError(std::string(what) + ": covariance is not positive semidefinite");
}

// Inverse of `a` if its singular values pass the relative threshold.
std::optional<MatrixXd> checked_inverse(const MatrixXd& a) {
  if (a.size() == 0) return MatrixXd(0, 0);
  if (!a.allFinite()) return std::nullopt;
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double largest = s(0);
  const double smallest = s(s.size() - 1);
  if (!(largest > 0.0) || smallest <= tolerance::kSingular * largest) return std::nullopt;
  return svd.solve(MatrixXd::Identity(a.rows(), a.cols()));
}

IndexList indices_of(const MomentMatrix& m, const VariableList& vars, const char* what) {
  IndexList out;
  out.reserve(vars.size());
  for (const auto& v : vars) {
    auto i = m.index_of(v);
    if (!i) throw VariableError(std::string(what) + ": variable " + v.name + " not in matrix");
    out.push_back(static_cast<Index>(*i));
  }
  return out;
}

IndexList complement(std::size_t n, const IndexList& picked) {
  IndexList out;
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    if (std::find(picked.begin(), picked.end(), i) == picked.end()) out.push_back(i);
  return out;
}

MatrixXd symmetrized(const MatrixXd& b) { return 0.5 * (b + b.transpose()); }

enum class Direction { kForward, kReverse };

// Block sweep of the indices in `s`. The forward and reverse transforms
// differ only in the sign applied to the pivot-row entries.
MomentMatrix sweep_indices(const MomentMatrix& m, const IndexList& s, Direction dir) {
  if (s.empty()) return m;
  const IndexList r = complement(m.size(), s);
  const MatrixXd& b = m.block();
  const VectorXd& mu = m.mean();

  const auto inv = checked_inverse(b(s, s));
  if (!inv) {
    std::ostringstream os;
    os << (dir == Direction::kForward ? "sweep" : "unsweep") << ": singular block on {";
    for (std::size_t k = 0; k < s.size(); ++k)
      os << (k ? ", " : "") << m.variables()[static_cast<std::size_t>(s[k])].name;
    os << "}";
    throw SingularBlockError(os.str());
  }
  const double sign = dir == Direction::kForward ? 1.0 : -1.0;

  const MatrixXd coef = (*inv) * b(s, r);  // S11^-1 S12
  const Eigen::RowVectorXd mu_s = mu(s).transpose();
  const Eigen::RowVectorXd mu_s_inv = mu_s * (*inv);

  MatrixXd out(b.rows(), b.cols());
  VectorXd mean(mu.size());
  out(s, s) = -(*inv);
  out(s, r) = sign * coef;
  out(r, s) = sign * coef.transpose();
  out(r, r) = b(r, r) - b(r, s) * coef;
  mean(s) = (sign * mu_s_inv).transpose();
  mean(r) = mu(r) - (mu_s_inv * b(s, r)).transpose();

  std::vector<bool> swept = m.swept_flags();
  for (Index i : s) swept[static_cast<std::size_t>(i)] = dir == Direction::kForward;
  return MomentMatrix(m.variables(), std::move(swept), std::move(mean), symmetrized(out));
}

// Restriction to the given indices, in the given order.
MomentMatrix restrict_to(const MomentMatrix& m, const IndexList& idx) {
  VariableList vars;
  std::vector<bool> swept;
  for (Index i : idx) {
    vars.push_back(m.variables()[static_cast<std::size_t>(i)]);
    swept.push_back(m.swept_flags()[static_cast<std::size_t>(i)]);
  }
  return MomentMatrix(std::move(vars), std::move(swept), m.mean()(idx), m.block()(idx, idx));
}

// a's variables followed by b's variables not in a.
VariableList union_order(const VariableList& a, const VariableList& b) {
  VariableList out = a;
  for (const auto& v : b)
    if (std::find(a.begin(), a.end(), v) == a.end()) out.push_back(v);
  return out;
}

// Variables `m` carries information on: unswept ones, plus swept ones with
// a nonzero mean or block entry. Swept all-zero coordinates are vacuous.
VariableList informed(const MomentMatrix& m) {
  const double zero = tolerance::kZero * std::max(1.0, m.max_abs());
  VariableList out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto ii = static_cast<Index>(i);
    if (!m.swept_flags()[i] || std::abs(m.mean()(ii)) > zero ||
        m.block().row(ii).cwiseAbs().maxCoeff() > zero)
      out.push_back(m.variables()[i]);
  }
  return out;
}

// Unswept variables of `m` that `other` has information on. Sweeping
// exactly these on each side makes the two summable entrywise.
VariableList needs_sweep(const MomentMatrix& m, const MomentMatrix& other) {
  const VariableList info = informed(other);
  VariableList out;
  for (const auto& v : m.unswept_variables())
    if (std::find(info.begin(), info.end(), v) != info.end()) out.push_back(v);
  return out;
}

// Entrywise sum on the union domain; both operands already swept-compatible.
MomentMatrix add_aligned(const MomentMatrix& a, const MomentMatrix& b) {
  const VariableList vars = union_order(a.variables(), b.variables());
  const VariableList a_new(vars.begin() + static_cast<std::ptrdiff_t>(a.size()), vars.end());
  VariableList b_new;
  for (const auto& v : vars)
    if (!b.contains(v)) b_new.push_back(v);
  const MomentMatrix ea = extend(a, a_new);
  const MomentMatrix eb = permute(extend(b, b_new), vars);

  // A coordinate unswept on one side is a vacuous extension on the other,
  // so it stays unswept. Everything else is swept on both sides.
  std::vector<bool> swept(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i)
    swept[i] = ea.swept_flags()[i] && eb.swept_flags()[i];
  return MomentMatrix(vars, std::move(swept), ea.mean() + eb.mean(),
                      symmetrized(ea.block() + eb.block()));
}

}  // namespace

// ---- GaussianSummary ----

std::optional<std::size_t> GaussianSummary::index_of(const VariableId& v) const {
  auto it = std::find(variables.begin(), variables.end(), v);
  if (it == variables.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables.begin());
}

double GaussianSummary::mean_of(const VariableId& v) const {
  auto i = index_of(v);
  if (!i) throw VariableError("summary: unknown variable " + v.name);
  return mean(static_cast<Index>(*i));
}

double GaussianSummary::variance_of(const VariableId& v) const { return covariance_of(v, v); }

double GaussianSummary::covariance_of(const VariableId& a, const VariableId& b) const {
  auto i = index_of(a);
  auto j = index_of(b);
  if (!i || !j) throw VariableError("summary: unknown variable " + (i ? b.name : a.name));
  return covariance(static_cast<Index>(*i), static_cast<Index>(*j));
}

// ---- MomentMatrix ----

MomentMatrix::MomentMatrix(VariableList variables, std::vector<bool> swept, Eigen::VectorXd mean,
                           Eigen::MatrixXd block)
    : variables_(std::move(variables)),
      swept_(std::move(swept)),
      mean_(std::move(mean)),
      block_(std::move(block)) {
  require_unique(variables_, "moment matrix");
  const auto n = static_cast<Index>(variables_.size());
  if (swept_.size() != variables_.size())
    throw DimensionError("moment matrix: swept flags do not match variable count");
  require_length(mean_, n, "moment matrix mean");
  require_square(block_, n, "moment matrix block");
  if (!mean_.allFinite() || !block_.allFinite())
    throw DomainError("moment matrix: non-finite entry");
  if (n == 0) return;
  const double scale = std::max(1.0, block_.cwiseAbs().maxCoeff());
  if ((block_ - block_.transpose()).cwiseAbs().maxCoeff() > tolerance::kSymmetry * scale)
    throw DomainError("moment matrix: block is not symmetric");
  // Unswept block is a covariance, swept block a negated precision.
  const auto check_sign = [&](bool swept_part, double sign, const char* what) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (swept_[static_cast<std::size_t>(i)] == swept_part) idx.push_back(i);
    if (idx.empty()) return;
    const MatrixXd sub = sign * block_(idx, idx);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (sub + sub.transpose()),
                                                Eigen::EigenvaluesOnly);
    const double floor = tolerance::kPsdFloor * std::abs(sub.trace()) + tolerance::kSingular * scale;
    if (eig.eigenvalues().minCoeff() < -floor)
      throw DomainError(std::string("moment matrix: ") + what);
  };
  check_sign(false, 1.0, "unswept block is not positive semidefinite");
  check_sign(true, -1.0, "swept block is not negative semidefinite");
}

std::optional<std::size_t> MomentMatrix::index_of(const VariableId& v) const {
  auto it = std::find(variables_.begin(), variables_.end(), v);
  if (it == variables_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables_.begin());
}

bool MomentMatrix::is_swept(const VariableId& v) const {
  auto i = index_of(v);
  if (!i) throw VariableError("variable " + v.name + " not in matrix");
  return swept_[*i];
}

VariableList MomentMatrix::swept_variables() const {
  VariableList out;
  for (std::size_t i = 0; i < size(); ++i)
    if (swept_[i]) out.push_back(variables_[i]);
  return out;
}

VariableList MomentMatrix::unswept_variables() const {
  VariableList out;
  for (std::size_t i = 0; i < size(); ++i)
    if (!swept_[i]) out.push_back(variables_[i]);
  return out;
}

bool MomentMatrix::fully_swept() const {
  return std::all_of(swept_.begin(), swept_.end(), [](bool b) { return b; });
}

double MomentMatrix::mean_at(const VariableId& v) const {
  auto i = index_of(v);
  if (!i) throw VariableError("variable " + v.name + " not in matrix");
  return mean_(static_cast<Index>(*i));
}

double MomentMatrix::entry(const VariableId& row, const VariableId& col) const {
  auto i = index_of(row);
  auto j = index_of(col);
  if (!i || !j)
    throw VariableError("variable " + (i ? col.name : row.name) + " not in matrix");
  return block_(static_cast<Index>(*i), static_cast<Index>(*j));
}

double MomentMatrix::max_abs() const {
  if (empty()) return 0.0;
  return std::max(mean_.cwiseAbs().maxCoeff(), block_.cwiseAbs().maxCoeff());
}

// ---- Constructors ----

MomentMatrix from_normal(VariableList vars, const VectorXd& mean, const MatrixXd& cov) {
  const auto n = static_cast<Index>(vars.size());
  require_length(mean, n, "from_normal mean");
  require_square(cov, n, "from_normal covariance");
  require_symmetric_psd(cov, "from_normal");
  std::vector<bool> swept(vars.size(), false);
  return MomentMatrix(std::move(vars), std::move(swept), mean, symmetrized(cov));
}

MomentMatrix from_observation(VariableList vars, const VectorXd& values) {
  const auto n = static_cast<Index>(vars.size());
  require_length(values, n, "from_observation values");
  if (!values.allFinite()) throw DomainError("from_observation: non-finite value");
  std::vector<bool> swept(vars.size(), false);
  return MomentMatrix(std::move(vars), std::move(swept), values, MatrixXd::Zero(n, n));
}

MomentMatrix vacuous(VariableList vars) {
  const auto n = static_cast<Index>(vars.size());
  std::vector<bool> swept(vars.size(), true);
  return MomentMatrix(std::move(vars), std::move(swept), VectorXd::Zero(n), MatrixXd::Zero(n, n));
}

MomentMatrix proper_lbf(VariableList ignorant, VariableList known, const VectorXd& mean,
                        const MatrixXd& cov) {
  require_disjoint(ignorant, known, "proper_lbf");
  const auto k = static_cast<Index>(known.size());
  require_length(mean, k, "proper_lbf mean");
  require_square(cov, k, "proper_lbf covariance");
  require_symmetric_psd(cov, "proper_lbf");
  const auto u = static_cast<Index>(ignorant.size());
  const Index n = u + k;

  VectorXd mu = VectorXd::Zero(n);
  mu.tail(k) = mean;
  MatrixXd block = MatrixXd::Zero(n, n);
  block.bottomRightCorner(k, k) = symmetrized(cov);

  std::vector<bool> swept(static_cast<std::size_t>(n), false);
  std::fill(swept.begin(), swept.begin() + u, true);
  VariableList vars = std::move(ignorant);
  vars.insert(vars.end(), known.begin(), known.end());
  return MomentMatrix(std::move(vars), std::move(swept), std::move(mu), std::move(block));
}

MomentMatrix from_linear_equation(VariableList inputs, VariableList outputs,
                                  const MatrixXd& coefficients, const VectorXd& intercept) {
  const auto q = static_cast<Index>(outputs.size());
  return from_regression(std::move(inputs), std::move(outputs), coefficients, intercept,
                         MatrixXd::Zero(q, q));
}

MomentMatrix from_regression(VariableList inputs, VariableList outputs,
                             const MatrixXd& coefficients, const VectorXd& intercept,
                             const MatrixXd& residual_cov) {
  require_disjoint(inputs, outputs, "regression");
  const auto p = static_cast<Index>(inputs.size());
  const auto q = static_cast<Index>(outputs.size());
  if (coefficients.rows() != p || coefficients.cols() != q) {
    std::ostringstream os;
    os << "regression: coefficient matrix must be " << p << "x" << q << ", got "
       << coefficients.rows() << "x" << coefficients.cols();
    throw DimensionError(os.str());
  }
  require_length(intercept, q, "regression intercept");
  require_square(residual_cov, q, "regression residual covariance");
  require_symmetric_psd(residual_cov, "regression residual");

  const Index n = p + q;
  VectorXd mu = VectorXd::Zero(n);
  mu.tail(q) = intercept;
  MatrixXd block = MatrixXd::Zero(n, n);
  block.topRightCorner(p, q) = coefficients;
  block.bottomLeftCorner(q, p) = coefficients.transpose();
  block.bottomRightCorner(q, q) = symmetrized(residual_cov);

  std::vector<bool> swept(static_cast<std::size_t>(n), false);
  std::fill(swept.begin(), swept.begin() + p, true);
  VariableList vars = std::move(inputs);
  vars.insert(vars.end(), outputs.begin(), outputs.end());
  return MomentMatrix(std::move(vars), std::move(swept), std::move(mu), std::move(block));
}

// ---- Sweeping ----

MomentMatrix sweep(const MomentMatrix& m, const VariableList& targets) {
  require_unique(targets, "sweep targets");
  const IndexList s = indices_of(m, targets, "sweep");
  for (std::size_t k = 0; k < s.size(); ++k)
    if (m.swept_flags()[static_cast<std::size_t>(s[k])])
      throw VariableError("sweep: variable " + targets[k].name + " is already swept");
  return sweep_indices(m, s, Direction::kForward);
}

MomentMatrix unsweep(const MomentMatrix& m, const VariableList& targets) {
  require_unique(targets, "unsweep targets");
  const IndexList s = indices_of(m, targets, "unsweep");
  for (std::size_t k = 0; k < s.size(); ++k)
    if (!m.swept_flags()[static_cast<std::size_t>(s[k])])
      throw VariableError("unsweep: variable " + targets[k].name + " is not swept");
  return sweep_indices(m, s, Direction::kReverse);
}

// ---- Inference ----

MomentMatrix marginalize(const MomentMatrix& m, const VariableList& keep) {
  require_unique(keep, "marginalize keep set");
  indices_of(m, keep, "marginalize");

  const double zero = tolerance::kZero * std::max(1.0, m.max_abs());
  VariableList drop_as_is;
  VariableList to_unsweep;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& v = m.variables()[i];
    if (std::find(keep.begin(), keep.end(), v) != keep.end() || !m.swept_flags()[i]) continue;
    const auto ii = static_cast<Index>(i);
    const bool uncorrelated_ignorance = std::abs(m.mean()(ii)) <= zero &&
                                        m.block().row(ii).cwiseAbs().maxCoeff() <= zero;
    (uncorrelated_ignorance ? drop_as_is : to_unsweep).push_back(v);
  }

  // Ignorance that touches nothing else is removed exactly by restriction.
  MomentMatrix work = m;
  if (!drop_as_is.empty()) {
    VariableList rest;
    for (const auto& v : m.variables())
      if (std::find(drop_as_is.begin(), drop_as_is.end(), v) == drop_as_is.end())
        rest.push_back(v);
    work = restrict_to(m, indices_of(m, rest, "marginalize"));
  }
  if (!to_unsweep.empty()) {
    try {
      work = unsweep(work, to_unsweep);
    } catch (const SingularBlockError&) {
      throw SingularBlockError("marginalize: cannot remove swept variables " +
                               to_string(to_unsweep) +
                               " (vacuous and correlated with the rest of the matrix)");
    }
  }

  IndexList idx;
  for (std::size_t i = 0; i < work.size(); ++i)
    if (std::find(keep.begin(), keep.end(), work.variables()[i]) != keep.end())
      idx.push_back(static_cast<Index>(i));
  return restrict_to(work, idx);
}

MomentMatrix extend(const MomentMatrix& m, const VariableList& new_vars) {
  if (new_vars.empty()) return m;
  for (const auto& v : new_vars)
    if (m.contains(v)) throw VariableError("extend: variable " + v.name + " already present");
  VariableList vars = m.variables();
  vars.insert(vars.end(), new_vars.begin(), new_vars.end());
  const auto n = static_cast<Index>(vars.size());
  const auto old = static_cast<Index>(m.size());
  std::vector<bool> swept = m.swept_flags();
  swept.resize(vars.size(), true);
  VectorXd mean = VectorXd::Zero(n);
  mean.head(old) = m.mean();
  MatrixXd block = MatrixXd::Zero(n, n);
  block.topLeftCorner(old, old) = m.block();
  return MomentMatrix(std::move(vars), std::move(swept), std::move(mean), std::move(block));
}

namespace {

// Sweeps as many of `targets` as possible, one at a time, always taking the
// one with the largest remaining share of its variance. What is left has no
// conditional variance: exact linear functions of the swept variables.
std::pair<MomentMatrix, VariableList> sweep_maximal(const MomentMatrix& m,
                                                    const VariableList& targets) {
  MomentMatrix out = m;
  VariableList left = targets;
  while (!left.empty()) {
    std::size_t best = 0;
    double best_share = -1.0;
    for (std::size_t k = 0; k < left.size(); ++k) {
      const double initial = m.entry(left[k], left[k]);
      const double share = initial > 0.0 ? out.entry(left[k], left[k]) / initial : 0.0;
      if (share > best_share) {
        best_share = share;
        best = k;
      }
    }
    if (best_share <= tolerance::kSingular) break;
    out = sweep(out, {left[best]});
    left.erase(left.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return {out, left};
}

// Rewrites `b` with each d in `det` replaced by its exact expression in
// `a`: d = mean_a(d) + sum_p x_p * a(p, d) over a's swept p. The result no
// longer mentions `det`; a's parents appear as swept coordinates.
MomentMatrix substitute(const MomentMatrix& b, const MomentMatrix& a, const VariableList& det) {
  VariableList parents;
  for (const auto& p : a.swept_variables())
    for (const auto& d : det)
      if (a.entry(p, d) != 0.0) {
        parents.push_back(p);
        break;
      }

  VariableList to_sweep;
  for (const auto& v : b.unswept_variables())
    if (std::find(det.begin(), det.end(), v) != det.end() ||
        std::find(parents.begin(), parents.end(), v) != parents.end())
      to_sweep.push_back(v);
  const MomentMatrix bs = sweep(b, to_sweep);

  // y: b's variables without det, then parents b lacks.
  VariableList y;
  std::vector<bool> y_swept;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const auto& v = bs.variables()[i];
    if (std::find(det.begin(), det.end(), v) != det.end()) continue;
    y.push_back(v);
    y_swept.push_back(bs.swept_flags()[i]);
  }
  for (const auto& p : parents)
    if (!bs.contains(p)) {
      y.push_back(p);
      y_swept.push_back(true);
    }
  const auto position = [&](const VariableId& v) {
    return static_cast<Index>(std::find(y.begin(), y.end(), v) - y.begin());
  };

  IndexList s_idx;  // swept in bs
  IndexList u_idx;  // unswept in bs
  for (std::size_t i = 0; i < bs.size(); ++i)
    (bs.swept_flags()[i] ? s_idx : u_idx).push_back(static_cast<Index>(i));
  IndexList ys_idx;
  IndexList yu_idx;
  for (std::size_t i = 0; i < y.size(); ++i)
    (y_swept[i] ? ys_idx : yu_idx).push_back(static_cast<Index>(i));

  // x_S = T y_S + t
  const auto ns = static_cast<Index>(s_idx.size());
  MatrixXd t_map = MatrixXd::Zero(ns, static_cast<Index>(y.size()));
  VectorXd shift = VectorXd::Zero(ns);
  for (Index r = 0; r < ns; ++r) {
    const auto& v = bs.variables()[static_cast<std::size_t>(s_idx[static_cast<std::size_t>(r)])];
    if (std::find(det.begin(), det.end(), v) == det.end()) {
      t_map(r, position(v)) = 1.0;
      continue;
    }
    shift(r) = a.mean_at(v);
    for (const auto& p : parents) t_map(r, position(p)) = a.entry(p, v);
  }
  const MatrixXd tm = t_map(Eigen::all, ys_idx);

  const VectorXd h = bs.mean()(s_idx);
  const MatrixXd bss = bs.block()(s_idx, s_idx);
  const MatrixXd bsu = bs.block()(s_idx, u_idx);

  const auto n = static_cast<Index>(y.size());
  VectorXd mean = VectorXd::Zero(n);
  MatrixXd block = MatrixXd::Zero(n, n);
  mean(ys_idx) = tm.transpose() * (h + bss * shift);
  mean(yu_idx) = bs.mean()(u_idx) + bsu.transpose() * shift;
  block(ys_idx, ys_idx) = tm.transpose() * bss * tm;
  block(ys_idx, yu_idx) = tm.transpose() * bsu;
  block(yu_idx, ys_idx) = block(ys_idx, yu_idx).transpose();
  block(yu_idx, yu_idx) = bs.block()(u_idx, u_idx);
  return MomentMatrix(std::move(y), std::move(y_swept), std::move(mean), symmetrized(block));
}

VariableList without(const VariableList& a, const VariableList& b) {
  VariableList out;
  for (const auto& v : a)
    if (std::find(b.begin(), b.end(), v) == b.end()) out.push_back(v);
  return out;
}

}  // namespace

MomentMatrix combine(const MomentMatrix& a, const MomentMatrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  // Smallest alignment: sweep each side where the other is informed.
  const VariableList sa = needs_sweep(a, b);
  const VariableList sb = needs_sweep(b, a);
  try {
    // Exact relations cannot be swept; substitute them into the other side.
    auto [a1, da] = sweep_maximal(a, sa);
    if (!da.empty()) return combine(a1, substitute(b, a1, da));
    auto [b1, db] = sweep_maximal(b, sb);
    if (!db.empty())
      return permute(combine(substitute(a, b1, db), b1),
                     union_order(a.variables(), b.variables()));
    return add_aligned(a1, b1);
  } catch (const SingularBlockError&) {
    throw SingularBlockError("combine: cannot align sweeps of " + to_string(a.variables()) +
                             " and " + to_string(b.variables()) +
                             " (conflicting exact knowledge on shared variables; condition instead)");
  }
}

MomentMatrix condition(const MomentMatrix& m, const VariableList& observed,
                       const VectorXd& values) {
  require_unique(observed, "condition");
  require_length(values, static_cast<Index>(observed.size()), "condition values");
  indices_of(m, observed, "condition");

  VariableList to_sweep;
  for (const auto& v : observed)
    if (!m.is_swept(v)) to_sweep.push_back(v);
  const MomentMatrix swept = sweep(m, to_sweep);

  const IndexList obs = indices_of(swept, observed, "condition");
  const IndexList rest = complement(swept.size(), obs);
  MomentMatrix r = restrict_to(swept, rest);
  // Given X = x the remaining mean row shifts by x times the X rows.
  VectorXd mean = r.mean() + (values.transpose() * swept.block()(obs, rest)).transpose();
  return MomentMatrix(r.variables(), r.swept_flags(), std::move(mean), r.block());
}

GaussianSummary to_summary(const MomentMatrix& m) {
  MomentMatrix u = m;
  const VariableList swept = m.swept_variables();
  if (!swept.empty()) {
    try {
      u = unsweep(m, swept);
    } catch (const SingularBlockError&) {
      throw SingularBlockError("to_summary: vacuous component among " + to_string(swept) +
                               " has no mean/covariance reading");
    }
  }
  return GaussianSummary{u.variables(), u.mean(), u.block()};
}

// ---- Utilities ----

MomentMatrix permute(const MomentMatrix& m, const VariableList& order) {
  if (order.size() != m.size())
    throw VariableError("permute: order has " + std::to_string(order.size()) +
                        " variables, matrix has " + std::to_string(m.size()));
  require_unique(order, "permute");
  return restrict_to(m, indices_of(m, order, "permute"));
}

double max_abs_difference(const MomentMatrix& a, const MomentMatrix& b) {
  const MomentMatrix bb = permute(b, a.variables());
  if (bb.swept_flags() != a.swept_flags())
    throw VariableError("max_abs_difference: swept sets differ");
  if (a.empty()) return 0.0;
  return std::max((a.mean() - bb.mean()).cwiseAbs().maxCoeff(),
                  (a.block() - bb.block()).cwiseAbs().maxCoeff());
}

std::string to_string(const VariableList& vars) {
  std::string out = "{";
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ", ";
    out += vars[i].name;
  }
  return out + "}";
}

}  // namespace lbf
