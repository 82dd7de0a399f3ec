#pragma once

#include "sepcert/cone.hpp"
#include "sepcert/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sepcert {

/// Cone-level data at a candidate point y*: an approximating cone R to the
/// reachable set, an approximating cone S to the target, and grad Psi(y*).
struct AbstractProblem {
  Cone reachable;
  Cone target;
  Vec cost_gradient;

  Eigen::Index dim() const { return cost_gradient.size(); }
  void validate() const;
};

/// The pair (lambda, lambda_c) of the abstract maximum principle.
struct Multipliers {
  Vec lambda;
  double lambda_c = 0.0;
  /// ||(lambda, lambda_c)||_inf == 1.
  bool normalized = true;

  /// Rescaled so that lambda_c is -1 (when negative) or 0.
  Multipliers unit_cost_view() const;
};

enum class Normality { normal, abnormal, undetermined };

std::string to_string(Normality n);

/// Cones in R^{n+1}: S x (-inf, 0] and {(v, grad Psi . v) : v in R}.
struct AugmentedCones {
  Cone profitable;
  Cone augmented_reachable;
};

AugmentedCones augment(const AbstractProblem& problem);

/// Nonzero (lambda, lambda_c) with lambda_c <= 0, lambda in -polar(S) and
/// (lambda + lambda_c grad Psi) . v <= 0 on R. Tries lambda_c = -1 first, so
/// a normal multiplier is returned whenever one exists.
std::optional<Multipliers> solve_amp(const AbstractProblem& problem);

struct AmpCheck {
  bool nontrivial = false;
  bool cost_sign = false;
  bool maximization = false;
  bool non_transversality = false;
  /// sup over R ∩ {|v|_inf <= 1} of (lambda + lambda_c grad Psi) . v.
  double max_hamiltonian = 0.0;

  bool ok() const { return nontrivial && cost_sign && maximization && non_transversality; }
};

/// Independent re-verification of the three conditions against the cones.
AmpCheck check_amp(const AbstractProblem& problem, const Multipliers& m, double tol = 1e-9);

/// Requires some multiplier to exist (throws PreconditionError otherwise).
Normality classify_normality(const AbstractProblem& problem);

bool fermat_check(const Vec& grad_psi, double tol);

struct LagrangeResult {
  Vec alphas;
  double lambda_c = -1.0;
  double residual = 0.0;
  bool certified = false;
};

/// Solves sum alpha_i grad phi_i(x*) + lambda_c grad Psi = 0 with
/// lambda_c = -1 in the least-squares sense.
LagrangeResult lagrange_multipliers(const std::vector<ScalarFn>& constraints,
                                    const Vec& grad_psi, const Vec& x_star,
                                    double certify_tol = 1e-6);

struct KktResult {
  Vec alphas;
  /// One entry per inequality; inactive ones are 0, active ones <= 0.
  Vec betas;
  std::vector<bool> active;
  double lambda_c = -1.0;
  double residual = 0.0;
  bool certified = false;
};

KktResult kkt_multipliers(const std::vector<ScalarFn>& eq_constraints,
                          const std::vector<ScalarFn>& ineq_constraints, const Vec& grad_psi,
                          const Vec& x_star, double certify_tol = 1e-6);

/// min ||A x - b|| subject to x_j >= 0 for j >= free_count (Lawson-Hanson
/// active set, with the first free_count columns never constrained).
Vec bounded_least_squares(const Mat& a, const Vec& b, Eigen::Index free_count);

}  // namespace sepcert
