#pragma once

#include "sepcert/amp.hpp"
#include "sepcert/approx.hpp"
#include "sepcert/cone.hpp"
#include "sepcert/expr.hpp"
#include "sepcert/ocp.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sepcert::io {

using Json = nlohmann::ordered_json;

/// Every problem found while reading a document, one message per entry.
class ProblemError : public std::invalid_argument {
 public:
  explicit ProblemError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct NeedleEntry {
  double t = 0.0;
  Vec u;
  double weight = 1.0;
};

struct ControlOptions {
  int mesh = 1000;
  double certify_tol = 1e-6;
  double refute_tol = 1e-4;
  int needle_times = 16;
  std::optional<std::vector<NeedleEntry>> needles;
  std::uint64_t seed = 0;
  /// Needle-expansion ladder: eps0, eps0/2, ... (halvings + 1 values).
  double eps0 = 0.1;
  int halvings = 5;
  double min_decay = 1.5;
};

struct ControlSpec {
  int n = 0;
  int m = 0;
  double a = 0.0;
  double b = 1.0;
  Vec x0;
  std::vector<expr::Ast> dynamics;
  std::optional<expr::Ast> lagrangian;
  expr::Ast terminal_cost;
  /// Exactly one of: free (neither set), a cone, or constraint expressions.
  std::optional<Cone> target_cone;
  std::optional<std::pair<std::vector<expr::Ast>, std::vector<expr::Ast>>> target_constraints;
  std::vector<Vec> control_samples;
  std::vector<Vec> candidate;
  ControlOptions options;

  ControlProblem build() const;
  PmpOptions pmp_options() const;
};

struct AbstractSpec {
  AbstractProblem problem;
};

/// min Psi(x) s.t. phi_i(x) = 0, h_j(x) <= 0, checked at `point`.
struct NlpSpec {
  int n = 0;
  expr::Ast cost;
  std::vector<expr::Ast> eq;
  std::vector<expr::Ast> ineq;
  Vec point;
  double tol = 1e-6;
};

struct ConePairSpec {
  Cone k1 = ConeV::zero(1);
  std::optional<Cone> k2;
};

struct OpenMapSpec {
  int m = 0;
  int n = 0;
  std::vector<expr::Ast> map;
  Vec base;
  Cone cone = ConeV::zero(1);
  double radius = 1.0;
  Mat l;
  Vec v;
  int targets = 200;
  double min_coverage = 0.99;
  std::uint64_t seed = 0;

  ConicMap build() const;
};

using ProblemFile = std::variant<ControlSpec, AbstractSpec, NlpSpec, ConePairSpec, OpenMapSpec>;

/// Reads a problem document, or the problem recorded inside a certificate.
ProblemFile load_problem(const std::string& path);
ProblemFile parse_problem(const Json& doc);
Json to_json(const ProblemFile& problem);

Json to_json(const Vec& v);
Json to_json(const Mat& m);
Json to_json(const Cone& k);
Cone cone_from_json(const Json& j, Eigen::Index dim);

/// Cartesian grid of `points` values per axis over [lower, upper].
std::vector<Vec> box_grid(const Vec& lower, const Vec& upper, int points);

}  // namespace sepcert::io
