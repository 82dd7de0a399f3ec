#include "sepcert/amp.hpp"

#include "sepcert/approx.hpp"
#include "sepcert/cone_lp.hpp"
#include "sepcert/lp.hpp"

#include <cmath>

namespace sepcert {

void AbstractProblem::validate() const {
  if (dim() < 1) throw DimensionError("abstract problem: empty cost gradient");
  require_dim(reachable.dim(), dim(), "reachable cone");
  require_dim(target.dim(), dim(), "target cone");
  if (!cost_gradient.allFinite()) throw std::invalid_argument("abstract problem: non-finite gradient");
}

Multipliers Multipliers::unit_cost_view() const {
  Multipliers out = *this;
  if (lambda_c < 0.0) {
    out.lambda = lambda / -lambda_c;
    out.lambda_c = -1.0;
  } else {
    out.lambda_c = 0.0;
  }
  out.normalized = false;
  return out;
}

std::string to_string(Normality n) {
  switch (n) {
    case Normality::normal: return "normal";
    case Normality::abnormal: return "abnormal";
    case Normality::undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

Vec lift(const Vec& v, double last) {
  Vec out(v.size() + 1);
  out.head(v.size()) = v;
  out(v.size()) = last;
  return out;
}

// Variables z = (lambda, lambda_c); adds lambda_c <= 0, lambda in -polar(S),
// lambda + lambda_c grad Psi in polar(R).
std::vector<int> build_multiplier_lp(lp::Program& prog, const AbstractProblem& p) {
  const Eigen::Index n = p.dim();
  std::vector<int> z;
  for (Eigen::Index i = 0; i <= n; ++i) z.push_back(prog.add_free_variable());
  prog.add_constraint({{z.back(), 1.0}}, lp::Relation::less_equal, 0.0);
  Mat t_target = Mat::Zero(n, n + 1);
  t_target.leftCols(n) = -Mat::Identity(n, n);
  cone_lp::constrain_polar(prog, t_target, z, p.target);
  Mat t_reach(n, n + 1);
  t_reach.leftCols(n) = Mat::Identity(n, n);
  t_reach.col(n) = p.cost_gradient;
  cone_lp::constrain_polar(prog, t_reach, z, p.reachable);
  return z;
}

Multipliers from_vec(const Vec& z) {
  const Eigen::Index n = z.size() - 1;
  Multipliers m;
  m.lambda = z.head(n);
  m.lambda_c = z(n);
  // The LP may return -0.0 or tiny positive values at the bound.
  if (m.lambda_c > 0.0) m.lambda_c = 0.0;
  return m;
}

}  // namespace

AugmentedCones augment(const AbstractProblem& problem) {
  problem.validate();
  const Eigen::Index n = problem.dim();
  const Vec down = -unit_vec(n + 1, n);
  auto lift_rows = [](const std::vector<Vec>& rows) {
    std::vector<Vec> out;
    for (const Vec& r : rows) out.push_back(lift(r, 0.0));
    return out;
  };

  Cone profitable = ConeV::zero(n + 1);
  if (const ConeV* s = problem.target.as_v()) {
    std::vector<Vec> gens = lift_rows(s->generators());
    gens.push_back(down);
    profitable = ConeV(n + 1, gens);
  } else {
    const ConeH& sh = *problem.target.as_h();
    std::vector<Vec> ineq = lift_rows(sh.ineq_normals());
    ineq.push_back(unit_vec(n + 1, n));  // last coordinate <= 0
    profitable = ConeH(n + 1, ineq, lift_rows(sh.eq_normals()));
  }

  Cone reach = ConeV::zero(n + 1);
  if (const ConeV* r = problem.reachable.as_v()) {
    std::vector<Vec> gens;
    for (const Vec& v : r->generators()) gens.push_back(lift(v, problem.cost_gradient.dot(v)));
    reach = ConeV(n + 1, gens);
  } else {
    const ConeH& rh = *problem.reachable.as_h();
    std::vector<Vec> eq = lift_rows(rh.eq_normals());
    eq.push_back(lift(problem.cost_gradient, -1.0));
    reach = ConeH(n + 1, lift_rows(rh.ineq_normals()), eq);
  }
  return AugmentedCones{profitable, reach};
}

std::optional<Multipliers> solve_amp(const AbstractProblem& problem) {
  problem.validate();
  const int n = static_cast<int>(problem.dim());
  std::vector<cone_lp::Pin> pins{{n, -1.0}};
  for (int k = 0; k < n; ++k) {
    pins.push_back({k, 1.0});
    pins.push_back({k, -1.0});
  }
  auto z = cone_lp::find_nonzero(
      [&](lp::Program& prog) { return build_multiplier_lp(prog, problem); }, pins);
  if (!z) return std::nullopt;
  return from_vec(*z);
}

AmpCheck check_amp(const AbstractProblem& problem, const Multipliers& m, double tol) {
  problem.validate();
  require_dim(m.lambda.size(), problem.dim(), "multipliers");
  AmpCheck check;
  check.nontrivial = m.lambda.cwiseAbs().maxCoeff() > tol || std::abs(m.lambda_c) > tol;
  check.cost_sign = m.lambda_c <= tol;
  const Vec q = m.lambda + m.lambda_c * problem.cost_gradient;
  auto max_over = [](const Cone& k, const Vec& c) {
    if (const ConeV* v = k.as_v()) {
      double best = 0.0;  // v = 0 is always in the cone
      for (const Vec& g : v->generators()) best = std::max(best, c.dot(g / g.cwiseAbs().maxCoeff()));
      return best;
    }
    return cone_lp::max_over_box([&](lp::Program& prog) { return cone_lp::add_member(prog, k); }, c);
  };
  check.max_hamiltonian = max_over(problem.reachable, q);
  check.maximization = check.max_hamiltonian <= tol;
  // lambda . s >= 0 on S  <=>  max of (-lambda) . s <= 0.
  check.non_transversality = max_over(problem.target, -m.lambda) <= tol;
  return check;
}

Normality classify_normality(const AbstractProblem& problem) {
  if (!solve_amp(problem)) {
    throw PreconditionError("classify_normality: no multipliers satisfy the conditions");
  }
  const int n = static_cast<int>(problem.dim());
  std::vector<cone_lp::Pin> pins;
  for (int k = 0; k < n; ++k) {
    pins.push_back({k, 1.0});
    pins.push_back({k, -1.0});
  }
  auto abnormal = cone_lp::find_nonzero(
      [&](lp::Program& prog) {
        std::vector<int> z = build_multiplier_lp(prog, problem);
        prog.add_constraint({{z.back(), 1.0}}, lp::Relation::equal, 0.0);
        return z;
      },
      pins);
  if (abnormal) return Normality::abnormal;
  Vec c = Vec::Zero(n + 1);
  c(n) = -1.0;
  double best = cone_lp::max_over_box(
      [&](lp::Program& prog) { return build_multiplier_lp(prog, problem); }, c);
  return best > 1e-9 ? Normality::normal : Normality::undetermined;
}

bool fermat_check(const Vec& grad_psi, double tol) {
  return grad_psi.size() == 0 || grad_psi.cwiseAbs().maxCoeff() <= tol;
}

Vec bounded_least_squares(const Mat& a, const Vec& b, Eigen::Index free_count) {
  const Eigen::Index k = a.cols();
  require_dim(b.size(), a.rows(), "bounded_least_squares");
  constexpr double ridge = 1e-12;
  constexpr double tol = 1e-12;
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  for (Eigen::Index j = 0; j < free_count; ++j) passive[static_cast<std::size_t>(j)] = true;

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Vec z = Vec::Zero(k);
    if (idx.empty()) return z;
    Mat ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) ap.col(static_cast<Eigen::Index>(j)) = a.col(idx[j]);
    Mat normal = ap.transpose() * ap;
    normal.diagonal().array() += ridge;
    Vec sol = normal.ldlt().solve(ap.transpose() * b);
    for (std::size_t j = 0; j < idx.size(); ++j) z(idx[j]) = sol(static_cast<Eigen::Index>(j));
    return z;
  };

  Vec x = solve_passive();
  for (int outer = 0; outer < 10 * static_cast<int>(k) + 10; ++outer) {
    Vec grad = a.transpose() * (b - a * x);
    Eigen::Index enter = -1;
    double best = tol * std::max(1.0, b.norm());
    for (Eigen::Index j = free_count; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best) {
        best = grad(j);
        enter = j;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;
    for (int inner = 0; inner <= k; ++inner) {
      Vec z = solve_passive();
      bool feasible = true;
      double step = 1.0;
      for (Eigen::Index j = free_count; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          feasible = false;
          double denom = x(j) - z(j);
          if (denom > 0.0) step = std::min(step, x(j) / denom);
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += step * (z - x);
      for (Eigen::Index j = free_count; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  for (Eigen::Index j = free_count; j < k; ++j) x(j) = std::max(0.0, x(j));
  return x;
}

LagrangeResult lagrange_multipliers(const std::vector<ScalarFn>& constraints,
                                    const Vec& grad_psi, const Vec& x_star,
                                    double certify_tol) {
  require_dim(grad_psi.size(), x_star.size(), "lagrange gradient");
  // Validates phi(x*) = 0 and independence of the gradients.
  tangent_level_set_cone(constraints, x_star);
  Mat jt(x_star.size(), static_cast<Eigen::Index>(constraints.size()));
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    jt.col(static_cast<Eigen::Index>(i)) = constraints[i].gradient(x_star);
  }
  LagrangeResult out;
  out.alphas = bounded_least_squares(jt, grad_psi, jt.cols());
  out.residual = (jt * out.alphas - grad_psi).norm();
  out.certified = out.residual <= certify_tol;
  return out;
}

KktResult kkt_multipliers(const std::vector<ScalarFn>& eq_constraints,
                          const std::vector<ScalarFn>& ineq_constraints, const Vec& grad_psi,
                          const Vec& x_star, double certify_tol) {
  require_dim(grad_psi.size(), x_star.size(), "kkt gradient");
  active_set_cone(eq_constraints, ineq_constraints, x_star);
  std::vector<std::size_t> active = active_indices(ineq_constraints, x_star);
  const auto neq = static_cast<Eigen::Index>(eq_constraints.size());
  const auto nact = static_cast<Eigen::Index>(active.size());
  // Columns: grad phi_i (free alpha), -grad h_j (gamma = -beta >= 0).
  Mat a(x_star.size(), neq + nact);
  for (Eigen::Index i = 0; i < neq; ++i) {
    a.col(i) = eq_constraints[static_cast<std::size_t>(i)].gradient(x_star);
  }
  for (Eigen::Index j = 0; j < nact; ++j) {
    a.col(neq + j) = -ineq_constraints[active[static_cast<std::size_t>(j)]].gradient(x_star);
  }
  Vec sol = bounded_least_squares(a, grad_psi, neq);

  KktResult out;
  out.alphas = sol.head(neq);
  out.betas = Vec::Zero(static_cast<Eigen::Index>(ineq_constraints.size()));
  out.active.assign(ineq_constraints.size(), false);
  for (Eigen::Index j = 0; j < nact; ++j) {
    out.betas(static_cast<Eigen::Index>(active[static_cast<std::size_t>(j)])) = -sol(neq + j);
    out.active[active[static_cast<std::size_t>(j)]] = true;
  }
  out.residual = (a * sol - grad_psi).norm();
  out.certified = out.residual <= certify_tol;
  return out;
}

}  // namespace sepcert
