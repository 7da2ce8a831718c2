#ifndef LBF_MOMENT_MATRIX_HPP
#define LBF_MOMENT_MATRIX_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lbf {

// Numerical thresholds shared by every operation.
namespace tolerance {
// A block is invertible iff sigma_min > kSingular * sigma_max.
inline constexpr double kSingular = 1e-10;
// PSD check: smallest eigenvalue >= -kPsdFloor * trace.
inline constexpr double kPsdFloor = 1e-8;
// Symmetry check on user-supplied covariance, relative to the largest entry.
inline constexpr double kSymmetry = 1e-9;
// Entries treated as zero when deciding if a swept variable is uncorrelated
// ignorance, relative to max(1, largest entry of the matrix).
inline constexpr double kZero = 1e-12;
}  // namespace tolerance

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Bad input values: asymmetric or indefinite covariance, overlapping lists.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A block that had to be inverted was singular. Raised when sweeping an
// observation or unsweeping a vacuous variable.
class SingularBlockError : public Error {
 public:
  using Error::Error;
};

// Operation refers to a variable in the wrong state (already swept, not
// present, duplicated).
class VariableError : public Error {
 public:
  using Error::Error;
};

struct VariableId {
  std::string name;

  VariableId() = default;
  VariableId(std::string n) : name(std::move(n)) {}  // NOLINT(implicit)
  VariableId(const char* n) : name(n) {}              // NOLINT(implicit)

  friend bool operator==(const VariableId&, const VariableId&) = default;
  friend auto operator<=>(const VariableId&, const VariableId&) = default;
};

using VariableList = std::vector<VariableId>;

// Mean and covariance of a fully unswept matrix.
struct GaussianSummary {
  VariableList variables;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  std::optional<std::size_t> index_of(const VariableId& v) const;
  double mean_of(const VariableId& v) const;
  double variance_of(const VariableId& v) const;
  double covariance_of(const VariableId& a, const VariableId& b) const;
};

// A linear belief function as a (partially swept) moment matrix.
//
// The layout follows the swept moment matrix
//
//     [ mu_1 S11^-1              mu_2 - mu_1 S11^-1 S12   ]
//     [ -S11^-1                  S11^-1 S12               ]
//     [ S21 S11^-1               S22 - S21 S11^-1 S12     ]
//
// where subscript 1 marks the swept variables. The block stored here is the
// lower two rows; mean() is the top row. Swept x swept entries hold negated
// precision, unswept x unswept hold (conditional) covariance, and mixed
// entries hold regression coefficients of the unswept on the swept
// variables. The block is symmetric.
//
// Values are immutable: every operation returns a new matrix.
class MomentMatrix {
 public:
  // Empty matrix, neutral under combination.
  MomentMatrix() = default;

  // Fully validated construction from raw parts. `swept[i]` marks variable i.
  MomentMatrix(VariableList variables, std::vector<bool> swept,
               Eigen::VectorXd mean, Eigen::MatrixXd block);

  const VariableList& variables() const { return variables_; }
  const std::vector<bool>& swept_flags() const { return swept_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& block() const { return block_; }
  std::size_t size() const { return variables_.size(); }
  bool empty() const { return variables_.empty(); }

  std::optional<std::size_t> index_of(const VariableId& v) const;
  bool contains(const VariableId& v) const { return index_of(v).has_value(); }
  // Throws VariableError if `v` is not in the matrix.
  bool is_swept(const VariableId& v) const;
  VariableList swept_variables() const;
  VariableList unswept_variables() const;
  bool fully_swept() const;

  double mean_at(const VariableId& v) const;
  double entry(const VariableId& row, const VariableId& col) const;

  // Largest absolute entry over mean and block.
  double max_abs() const;

 private:
  VariableList variables_;
  std::vector<bool> swept_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd block_;
};

// ---- Construction of the six special cases ----

MomentMatrix from_normal(VariableList vars, const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov);
MomentMatrix from_observation(VariableList vars, const Eigen::VectorXd& values);
MomentMatrix vacuous(VariableList vars);
// Normal on `known`, no opinion on `ignorant`.
MomentMatrix proper_lbf(VariableList ignorant, VariableList known,
                        const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);
// outputs = inputs * coefficients + intercept, with `coefficients` shaped
// |inputs| x |outputs|. Variable order in the result: inputs, then outputs.
MomentMatrix from_linear_equation(VariableList inputs, VariableList outputs,
                                  const Eigen::MatrixXd& coefficients,
                                  const Eigen::VectorXd& intercept);
// Same as from_linear_equation plus N(0, residual_cov) noise on the outputs.
MomentMatrix from_regression(VariableList inputs, VariableList outputs,
                             const Eigen::MatrixXd& coefficients,
                             const Eigen::VectorXd& intercept,
                             const Eigen::MatrixXd& residual_cov);

// ---- Sweeping ----

// Forward sweep on `targets` (all currently unswept).
MomentMatrix sweep(const MomentMatrix& m, const VariableList& targets);
// Reverse sweep on `targets` (all currently swept).
MomentMatrix unsweep(const MomentMatrix& m, const VariableList& targets);

// ---- Inference ----

// Remove every variable not in `keep`. Swept variables being removed are
// reverse swept first; uncorrelated vacuous ones are dropped as-is.
MomentMatrix marginalize(const MomentMatrix& m, const VariableList& keep);
// Append `new_vars` as swept zero (vacuous) coordinates.
MomentMatrix extend(const MomentMatrix& m, const VariableList& new_vars);
// Dempster's rule. Variable order: a's variables, then b's new ones.
MomentMatrix combine(const MomentMatrix& a, const MomentMatrix& b);
// Exact conditioning on observed = values.
MomentMatrix condition(const MomentMatrix& m, const VariableList& observed,
                       const Eigen::VectorXd& values);
GaussianSummary to_summary(const MomentMatrix& m);

// ---- Utilities ----

// Reorders `m` to `order`, which must be a permutation of m's variables.
MomentMatrix permute(const MomentMatrix& m, const VariableList& order);
// Largest entrywise difference after aligning b to a's variable order.
// Throws VariableError unless both have the same variables and swept sets.
double max_abs_difference(const MomentMatrix& a, const MomentMatrix& b);

std::string to_string(const VariableList& vars);

}  // namespace lbf

template <>
struct std::hash<lbf::VariableId> {
  std::size_t operator()(const lbf::VariableId& v) const noexcept {
    return std::hash<std::string>{}(v.name);
  }
};

#endif  // LBF_MOMENT_MATRIX_HPP
