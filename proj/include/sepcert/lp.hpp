#pragma once

#include <limits>
#include <vector>

namespace sepcert::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, greater_equal, equal };
enum class Status { optimal, infeasible, unbounded };

struct Term {
  int var;
  double coef;
};

/// A small dense linear program
///
///   minimize (or maximize)  c . x
///   subject to              rows (<=, >=, =) rhs,  lower <= x <= upper.
///
/// Built incrementally; solved by `solve` with the two-phase simplex method.
class Program {
 public:
  int add_variable(double lower = 0.0, double upper = kInf);
  int add_free_variable() { return add_variable(-kInf, kInf); }

  void add_constraint(const std::vector<Term>& terms, Relation rel, double rhs);
  void minimize(const std::vector<Term>& terms);
  void maximize(const std::vector<Term>& terms);

  int num_variables() const { return static_cast<int>(lower_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }

 private:
  friend struct Access;
  struct Row {
    std::vector<Term> terms;
    Relation rel;
    double rhs;
  };
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
  std::vector<Term> objective_;
  bool maximize_ = false;
};

struct Options {
  /// Reduced-cost and pivot tolerance.
  double tolerance = 1e-9;
  int max_iterations = 100000;
};

struct Solution {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;

  bool feasible() const { return status != Status::infeasible; }
};

/// Two-phase primal simplex on a dense tableau with Bland's smallest-index
/// rule for both the entering and the leaving variable (no cycling).
Solution solve(const Program& program, const Options& options = {});

}  // namespace sepcert::lp
