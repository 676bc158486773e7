#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace poa::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };

struct Variable {
  std::string name;
  double objective = 0.0;
  double lower = 0.0;
  double upper = kInfinity;
};

struct Constraint {
  std::string name;
  std::vector<double> coefficients;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// Dense LP: optimize c^T x subject to rows (a_i^T x rel b_i) and per-variable
/// bounds. Lower bounds may be -infinity; a free variable is simply one with
/// both bounds infinite.
class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::Minimize) : sense_(sense) {}

  std::size_t add_variable(std::string name, double objective, double lower = 0.0, double upper = kInfinity);
  /// Coefficient vector length must equal the current variable count.
  std::size_t add_constraint(std::string name, std::vector<double> coefficients, Relation relation, double rhs);

  Sense sense() const { return sense_; }
  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  /// Throws std::invalid_argument on dimension mismatch, NaN or inverted bounds.
  void validate() const;

  /// Objective value of an assignment in the program's own sense.
  double evaluate(const std::vector<double>& x) const;
  /// Largest violation of any row or bound at x (0 when feasible).
  double max_violation(const std::vector<double>& x) const;

 private:
  Sense sense_;
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
};

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(Status status);

struct SolverOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-8;
  double optimality_tolerance = 1e-8;
  /// 0 selects a size-dependent default.
  std::size_t max_iterations = 0;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t degenerate_switch = 50;
};

struct Solution {
  Status status = Status::NumericalFailure;
  double objective = 0.0;
  std::vector<double> values;
  /// d(objective)/d(rhs) per constraint, from the final basis.
  std::vector<double> duals;
  /// b^T y plus the bound terms, in the program's own sense.
  double dual_objective = 0.0;
  double max_violation = 0.0;
  double max_dual_infeasibility = 0.0;
  std::size_t iterations = 0;
  std::string diagnostics;

  bool optimal() const { return status == Status::Optimal; }
};

Solution solve(const LinearProgram& lp, const SolverOptions& options = {});

struct DualPair {
  Solution primal;
  double dual_objective = 0.0;
};

class SolveError : public std::runtime_error {
 public:
  SolveError(Status status, const std::string& what) : std::runtime_error(what), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

/// Solves and returns the primal together with the objective of the dual
/// built from the solver's multipliers. Throws SolveError unless optimal or
/// when the two objectives differ by more than 1e-6.
DualPair solve_dual_pair(const LinearProgram& lp, const SolverOptions& options = {});

/// CPLEX LP text format, readable by glpsol, HiGHS, CBC and friends.
void write_lp_format(const LinearProgram& lp, std::ostream& out);

}  // namespace poa::lp
