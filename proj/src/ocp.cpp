#include "sepcert/ocp.hpp"

#include "sepcert/approx.hpp"
#include "sepcert/cone_lp.hpp"
#include "sepcert/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sepcert {

void ControlProblem::validate() const {
  if (n < 1) throw DimensionError("control problem: n must be positive");
  if (m < 0) throw DimensionError("control problem: m must be nonnegative");
  if (!(a < b)) throw std::invalid_argument("control problem: horizon requires a < b");
  require_dim(x0.size(), n, "x0");
  if (!dynamics.f || !dynamics.jac_x) throw std::invalid_argument("control problem: dynamics incomplete");
  if (!terminal_cost.value || !terminal_cost.gradient) {
    throw std::invalid_argument("control problem: terminal cost incomplete");
  }
  if (lagrangian && (!lagrangian->l || !lagrangian->grad_x)) {
    throw std::invalid_argument("control problem: lagrangian incomplete");
  }
  if (control_samples.empty()) throw std::invalid_argument("control problem: no control samples");
  for (const Vec& u : control_samples) require_dim(u.size(), m, "control sample");
  if (const auto* c = std::get_if<Cone>(&target)) require_dim(c->dim(), n, "target cone");
}

ControlSignal resample_control(const std::vector<Vec>& segments, int steps) {
  if (segments.empty()) throw std::invalid_argument("control: no segments");
  if (steps < 1) throw std::invalid_argument("control: mesh must have at least one step");
  const auto k = static_cast<double>(segments.size());
  ControlSignal out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double mid = (i + 0.5) / steps;
    auto j = static_cast<std::size_t>(std::floor(mid * k));
    out[static_cast<std::size_t>(i)] = segments[std::min(j, segments.size() - 1)];
  }
  return out;
}

namespace {

Vec lift(const Vec& v, double last) {
  Vec out(v.size() + 1);
  out.head(v.size()) = v;
  out(v.size()) = last;
  return out;
}

ScalarFn lift_fn(const ScalarFn& g, Eigen::Index n) {
  return {[g, n](const Vec& x) { return g.value(x.head(n)); },
          [g, n](const Vec& x) { return lift(g.gradient(x.head(n)), 0.0); }};
}

Cone lift_cone(const Cone& c) {
  const Eigen::Index n = c.dim();
  if (const ConeV* v = c.as_v()) {
    std::vector<Vec> gens;
    for (const Vec& g : v->generators()) gens.push_back(lift(g, 0.0));
    gens.push_back(unit_vec(n + 1, n));
    gens.push_back(-unit_vec(n + 1, n));
    return ConeV(n + 1, gens);
  }
  auto pad = [](const std::vector<Vec>& rows) {
    std::vector<Vec> out;
    for (const Vec& r : rows) out.push_back(lift(r, 0.0));
    return out;
  };
  return ConeH(n + 1, pad(c.as_h()->ineq_normals()), pad(c.as_h()->eq_normals()));
}

void check_finite(const Vec& v, const char* what, double t) {
  if (!v.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite value at t = " + std::to_string(t));
  }
}

Vec rk4_step(const ControlProblem& p, double t, double h, const Vec& x, const Vec& u) {
  const auto& f = p.dynamics.f;
  const Vec k1 = f(t, x, u);
  const Vec k2 = f(t + h / 2, x + h / 2 * k1, u);
  const Vec k3 = f(t + h / 2, x + h / 2 * k2, u);
  const Vec k4 = f(t + h, x + h * k3, u);
  return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Jacobians at the start, midpoint and end of every mesh interval.
struct Linearization {
  std::vector<Mat> start, mid, end;
};

Linearization linearize(const ControlProblem& p, const Process& proc, int from, ExecPolicy policy) {
  const int steps = proc.steps();
  Linearization lin;
  lin.start.resize(static_cast<std::size_t>(steps));
  lin.mid.resize(static_cast<std::size_t>(steps));
  lin.end.resize(static_cast<std::size_t>(steps));
  const double h = proc.step();
  for_each_index(policy, static_cast<std::size_t>(steps - from), [&](std::size_t i) {
    const auto j = static_cast<std::size_t>(from) + i;
    const Vec& u = proc.control[j];
    const double t = proc.mesh[j];
    lin.start[j] = p.dynamics.jac_x(t, proc.trajectory[j], u);
    lin.mid[j] = p.dynamics.jac_x(t + h / 2, midpoint_state(p, proc, static_cast<int>(j)), u);
    lin.end[j] = p.dynamics.jac_x(proc.mesh[j + 1], proc.trajectory[j + 1], u);
  });
  return lin;
}

Vec needle_direction(const ControlProblem& p, const Process& proc, int node, const Vec& u) {
  const auto k = static_cast<std::size_t>(node);
  const double t = proc.mesh[k];
  const Vec& x = proc.trajectory[k];
  return p.dynamics.f(t, x, u) - p.dynamics.f(t, x, proc.control[k - 1]);
}

Variation propagate(const ControlProblem& p, const Process& proc, const Linearization& lin,
                    const NeedleSpec& spec) {
  require_dim(spec.u.size(), p.m, "needle control");
  Variation var;
  var.node = snap_to_node(proc, spec.t);
  var.direction = needle_direction(p, proc, var.node, spec.u);
  const double h = proc.step();
  Vec w = var.direction;
  var.path.push_back(w);
  for (int j = var.node; j < proc.steps(); ++j) {
    const auto s = static_cast<std::size_t>(j);
    const Vec k1 = lin.start[s] * w;
    const Vec k2 = lin.mid[s] * (w + h / 2 * k1);
    const Vec k3 = lin.mid[s] * (w + h / 2 * k2);
    const Vec k4 = lin.end[s] * (w + h * k3);
    w += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    check_finite(w, "variation", proc.mesh[s + 1]);
    var.path.push_back(w);
  }
  return var;
}

double hamiltonian(const ControlProblem& p, double t, const Vec& x, const Vec& u, const Vec& pv,
                   double p_c) {
  double h = pv.dot(p.dynamics.f(t, x, u));
  if (p.lagrangian) h += p_c * p.lagrangian->l(t, x, u);
  return h;
}

// Least-violating normal multiplier: lambda in -polar(S) minimizing
// max_v (lambda - grad Psi) . v / |v|_inf over the generators of R.
std::optional<Vec> diagnostic_lambda(const AbstractProblem& ap, const ConeV& reach) {
  const Eigen::Index n = ap.dim();
  lp::Program prog;
  std::vector<int> z;
  for (Eigen::Index i = 0; i < n; ++i) z.push_back(prog.add_free_variable());
  const int tau = prog.add_variable();
  cone_lp::constrain_polar(prog, -Mat::Identity(n, n), z, ap.target);
  for (Eigen::Index i = 0; i < n; ++i) {
    prog.add_constraint({{z[static_cast<std::size_t>(i)], 1.0}}, lp::Relation::less_equal, 1e6);
    prog.add_constraint({{z[static_cast<std::size_t>(i)], 1.0}}, lp::Relation::greater_equal, -1e6);
  }
  for (const Vec& g : reach.generators()) {
    const Vec v = g / g.lpNorm<Eigen::Infinity>();
    std::vector<lp::Term> row;
    for (Eigen::Index i = 0; i < n; ++i) row.push_back({z[static_cast<std::size_t>(i)], v(i)});
    row.push_back({tau, -1.0});
    prog.add_constraint(row, lp::Relation::less_equal, ap.cost_gradient.dot(v));
  }
  prog.minimize({{tau, 1.0}});
  const lp::Solution sol = lp::solve(prog);
  if (!sol.feasible()) return std::nullopt;
  Vec lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) lambda(i) = sol.x[static_cast<std::size_t>(z[static_cast<std::size_t>(i)])];
  return lambda;
}

AdjointArc truncate(const AdjointArc& arc, Eigen::Index n) {
  AdjointArc out;
  out.mesh = arc.mesh;
  out.p_c = arc.p_c;
  for (const Vec& p : arc.p) out.p.push_back(p.head(n));
  return out;
}

}  // namespace

ControlProblem reduce_to_mayer(const ControlProblem& problem) {
  problem.validate();
  if (!problem.lagrangian) return problem;
  const Eigen::Index n = problem.n;
  const Dynamics dyn = problem.dynamics;
  const RunningCost run = *problem.lagrangian;
  ControlProblem r = problem;
  r.n = n + 1;
  r.x0 = lift(problem.x0, 0.0);
  r.lagrangian.reset();
  r.dynamics.f = [dyn, run, n](double t, const Vec& x, const Vec& u) {
    const Vec s = x.head(n);
    return lift(dyn.f(t, s, u), run.l(t, s, u));
  };
  r.dynamics.jac_x = [dyn, run, n](double t, const Vec& x, const Vec& u) {
    const Vec s = x.head(n);
    Mat j = Mat::Zero(n + 1, n + 1);
    j.topLeftCorner(n, n) = dyn.jac_x(t, s, u);
    j.block(n, 0, 1, n) = run.grad_x(t, s, u).transpose();
    return j;
  };
  const ScalarFn psi = problem.terminal_cost;
  r.terminal_cost = {[psi, n](const Vec& x) { return psi.value(x.head(n)) + x(n); },
                     [psi, n](const Vec& x) { return lift(psi.gradient(x.head(n)), 1.0); }};
  if (const auto* c = std::get_if<Cone>(&problem.target)) {
    r.target = lift_cone(*c);
  } else if (const auto* ec = std::get_if<EndpointConstraints>(&problem.target)) {
    EndpointConstraints lifted;
    for (const ScalarFn& g : ec->eq) lifted.eq.push_back(lift_fn(g, n));
    for (const ScalarFn& g : ec->ineq) lifted.ineq.push_back(lift_fn(g, n));
    r.target = lifted;
  }
  return r;
}

Process integrate_state(const ControlProblem& problem, const ControlSignal& control) {
  problem.validate();
  if (control.empty()) throw std::invalid_argument("integrate_state: empty control signal");
  const int steps = static_cast<int>(control.size());
  const double h = (problem.b - problem.a) / steps;
  Process proc;
  proc.control = control;
  proc.mesh.reserve(control.size() + 1);
  for (int k = 0; k <= steps; ++k) proc.mesh.push_back(problem.a + h * k);
  proc.mesh.back() = problem.b;
  proc.trajectory.push_back(problem.x0);
  for (int k = 0; k < steps; ++k) {
    const Vec& u = control[static_cast<std::size_t>(k)];
    require_dim(u.size(), problem.m, "control value");
    Vec next = rk4_step(problem, proc.mesh[static_cast<std::size_t>(k)], h, proc.trajectory.back(), u);
    check_finite(next, "state", proc.mesh[static_cast<std::size_t>(k) + 1]);
    proc.trajectory.push_back(std::move(next));
  }
  return proc;
}

Vec midpoint_state(const ControlProblem& problem, const Process& process, int k) {
  const auto s = static_cast<std::size_t>(k);
  const double h = process.step();
  const Vec& u = process.control[s];
  const Vec& x0 = process.trajectory[s];
  const Vec& x1 = process.trajectory[s + 1];
  const Vec f0 = problem.dynamics.f(process.mesh[s], x0, u);
  const Vec f1 = problem.dynamics.f(process.mesh[s + 1], x1, u);
  return (x0 + x1) / 2 + h / 8 * (f0 - f1);
}

double functional_value(const ControlProblem& problem, const Process& process) {
  double cost = problem.terminal_cost.value(process.trajectory.back());
  if (!problem.lagrangian) return cost;
  const auto& l = problem.lagrangian->l;
  const double h = process.step();
  for (int k = 0; k < process.steps(); ++k) {
    const auto s = static_cast<std::size_t>(k);
    const Vec& u = process.control[s];
    cost += h / 6 *
            (l(process.mesh[s], process.trajectory[s], u) +
             4 * l(process.mesh[s] + h / 2, midpoint_state(problem, process, k), u) +
             l(process.mesh[s + 1], process.trajectory[s + 1], u));
  }
  return cost;
}

int snap_to_node(const Process& process, double t) {
  const double a = process.mesh.front();
  const double b = process.mesh.back();
  if (!(t > a) || t > b) {
    throw std::invalid_argument("needle time " + std::to_string(t) + " outside (a, b]");
  }
  const auto k = static_cast<int>(std::lround((t - a) / process.step()));
  return std::clamp(k, 1, process.steps());
}

Variation propagate_variation(const ControlProblem& problem, const Process& process,
                              const NeedleSpec& spec) {
  const int node = snap_to_node(process, spec.t);
  return propagate(problem, process, linearize(problem, process, node, ExecPolicy::serial), spec);
}

ConeV build_reachable_cone(const ControlProblem& problem, const Process& process,
                           const std::vector<NeedleSpec>& specs, ExecPolicy policy) {
  if (specs.empty()) return ConeV::zero(problem.n);
  int first = process.steps();
  for (const NeedleSpec& s : specs) first = std::min(first, snap_to_node(process, s.t));
  const Linearization lin = linearize(problem, process, first, policy);
  std::vector<Vec> ends(specs.size());
  for_each_index(policy, specs.size(), [&](std::size_t i) {
    Vec w = propagate(problem, process, lin, specs[i]).at_end();
    if (!w.allFinite()) throw NumericalError("reachable cone: non-finite variation");
    ends[i] = std::move(w);
  });
  return ConeV(problem.n, dedup_directions(ends));
}

std::vector<NeedleSpec> default_needles(const ControlProblem& problem, int times) {
  std::vector<NeedleSpec> out;
  for (int j = 1; j <= times; ++j) {
    const double t = problem.a + (problem.b - problem.a) * j / (times + 1);
    for (const Vec& u : problem.control_samples) out.push_back({t, u});
  }
  return out;
}

double needle_endpoint_error(const ControlProblem& problem, const Process& process,
                             const std::vector<NeedleSpec>& specs, const std::vector<double>& eps) {
  if (eps.size() != specs.size()) throw DimensionError("needle widths: one per needle required");
  struct Window {
    double lo, hi;
    Vec u;
  };
  std::vector<Window> windows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (eps[i] < 0.0) throw std::invalid_argument("needle width must be nonnegative");
    const double t = process.mesh[static_cast<std::size_t>(snap_to_node(process, specs[i].t))];
    if (eps[i] > 0.0) windows.push_back({t - eps[i], t, specs[i].u});
  }
  if (windows.empty()) return 0.0;
  std::sort(windows.begin(), windows.end(), [](const Window& x, const Window& y) { return x.hi < y.hi; });
  const double a = process.mesh.front();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].lo < a) throw std::invalid_argument("needle interval leaves (a, b]");
    if (i > 0 && windows[i].lo < windows[i - 1].hi) {
      throw std::invalid_argument("needle intervals overlap");
    }
  }

  std::vector<double> cuts = process.mesh;
  for (const Window& w : windows) cuts.push_back(w.lo);
  std::sort(cuts.begin(), cuts.end());
  const double h = process.step();
  Vec x_ref = process.trajectory.front();
  Vec x_eps = x_ref;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double s0 = cuts[i];
    const double len = cuts[i + 1] - s0;
    if (len <= 1e-15) continue;
    const double mid = s0 + len / 2;
    const auto j = std::min(static_cast<std::size_t>(std::floor((mid - a) / h)), process.control.size() - 1);
    const Vec& u_ref = process.control[j];
    const Vec* u = &u_ref;
    for (const Window& w : windows) {
      if (mid > w.lo && mid < w.hi) u = &w.u;
    }
    x_ref = rk4_step(problem, s0, len, x_ref, u_ref);
    x_eps = rk4_step(problem, s0, len, x_eps, *u);
  }
  check_finite(x_eps, "perturbed state", process.mesh.back());

  const int first = [&] {
    int k = process.steps();
    for (const NeedleSpec& s : specs) k = std::min(k, snap_to_node(process, s.t));
    return k;
  }();
  const Linearization lin = linearize(problem, process, first, ExecPolicy::serial);
  Vec predicted = Vec::Zero(problem.n);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    predicted += eps[i] * propagate(problem, process, lin, specs[i]).at_end();
  }
  return (x_eps - x_ref - predicted).norm();
}

NeedleReport check_needle_expansion(const ControlProblem& problem, const Process& process,
                                    const std::vector<NeedleSpec>& specs,
                                    const std::vector<double>& weights,
                                    const std::vector<double>& scales, double min_decay) {
  if (weights.size() != specs.size()) throw DimensionError("needle weights: one per needle required");
  constexpr double kNoiseFloor = 1e-9;
  NeedleReport rep;
  const Vec wv = Eigen::Map<const Vec>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  for (double s : scales) {
    std::vector<double> eps;
    for (double w : weights) eps.push_back(s * w);
    const double err = needle_endpoint_error(problem, process, specs, eps);
    const double norm = s * wv.norm();
    rep.eps_scale.push_back(s);
    rep.error.push_back(err);
    rep.ratio.push_back(norm > 0.0 ? err / norm : 0.0);
  }
  rep.pass = rep.ratio.size() >= 2;
  for (std::size_t i = 1; i < rep.ratio.size(); ++i) {
    const double prev = rep.ratio[i - 1];
    const double cur = rep.ratio[i];
    if (cur <= kNoiseFloor) continue;
    if (prev < min_decay * cur) rep.pass = false;
  }
  return rep;
}

AdjointArc integrate_adjoint(const ControlProblem& problem, const Process& process, const Vec& p_b,
                             double p_c) {
  require_dim(p_b.size(), problem.n, "terminal adjoint");
  if (!p_b.allFinite()) throw std::invalid_argument("integrate_adjoint: non-finite p(b)");
  if (p_c > 0.0) throw PreconditionError("integrate_adjoint: p_c must be <= 0");
  const Linearization lin = linearize(problem, process, 0, ExecPolicy::serial);
  const double h = process.step();
  auto grad_l = [&](double t, const Vec& x, const Vec& u) -> Vec {
    if (!problem.lagrangian || p_c == 0.0) return Vec::Zero(problem.n);
    return p_c * problem.lagrangian->grad_x(t, x, u);
  };
  AdjointArc arc;
  arc.mesh = process.mesh;
  arc.p_c = p_c;
  arc.p.assign(process.mesh.size(), Vec());
  Vec p = p_b;
  arc.p.back() = p;
  for (int j = process.steps() - 1; j >= 0; --j) {
    const auto s = static_cast<std::size_t>(j);
    const Vec& u = process.control[s];
    const Vec gl_end = grad_l(process.mesh[s + 1], process.trajectory[s + 1], u);
    const Vec gl_mid = grad_l(process.mesh[s] + h / 2, midpoint_state(problem, process, j), u);
    const Vec gl_start = grad_l(process.mesh[s], process.trajectory[s], u);
    auto rhs = [&](const Mat& a, const Vec& gl, const Vec& q) -> Vec {
      return -(a.transpose() * q + gl);
    };
    const Vec k1 = rhs(lin.end[s], gl_end, p);
    const Vec k2 = rhs(lin.mid[s], gl_mid, p - h / 2 * k1);
    const Vec k3 = rhs(lin.mid[s], gl_mid, p - h / 2 * k2);
    const Vec k4 = rhs(lin.start[s], gl_start, p - h * k3);
    p = p - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    check_finite(p, "adjoint", process.mesh[s]);
    arc.p[s] = p;
  }
  return arc;
}

Cone target_cone_at(const ControlProblem& problem, const Vec& x) {
  if (std::holds_alternative<FreeEndpoint>(problem.target)) return ConeH::full_space(problem.n);
  if (const auto* c = std::get_if<Cone>(&problem.target)) return *c;
  const auto& ec = std::get<EndpointConstraints>(problem.target);
  return active_set_cone(ec.eq, ec.ineq, x);
}

std::optional<TerminalMultipliers> terminal_multipliers(const ControlProblem& problem,
                                                        const Process& process,
                                                        const ConeV& reachable) {
  const Vec& xb = process.trajectory.back();
  const AbstractProblem ap{reachable, target_cone_at(problem, xb), problem.terminal_cost.gradient(xb)};
  const auto sol = solve_amp(ap);
  if (!sol) return std::nullopt;
  TerminalMultipliers out;
  out.multipliers = sol->unit_cost_view();
  out.p_c = out.multipliers.lambda_c;
  out.p_b = out.p_c * ap.cost_gradient + out.multipliers.lambda;
  out.transversality_residual =
      (out.p_b - (out.p_c * ap.cost_gradient + out.multipliers.lambda)).lpNorm<Eigen::Infinity>();
  for (const Vec& g : reachable.generators()) {
    out.quasi_adjoint_max = std::max(out.quasi_adjoint_max, out.p_b.dot(g) / g.lpNorm<Eigen::Infinity>());
  }
  return out;
}

MaxConditionReport check_maximum_condition(const ControlProblem& problem, const Process& process,
                                           const AdjointArc& adjoint, double tol, ExecPolicy policy) {
  if (adjoint.p.size() != process.mesh.size()) {
    throw DimensionError("maximum condition: adjoint and process meshes differ");
  }
  MaxConditionReport rep;
  rep.residual.assign(process.mesh.size(), 0.0);
  const int steps = process.steps();
  for_each_index(policy, process.mesh.size(), [&](std::size_t k) {
    const double t = process.mesh[k];
    const Vec& x = process.trajectory[k];
    const Vec& u_star = process.control[std::min(k, static_cast<std::size_t>(steps - 1))];
    const double ref = hamiltonian(problem, t, x, u_star, adjoint.p[k], adjoint.p_c);
    double best = ref;
    for (const Vec& u : problem.control_samples) {
      best = std::max(best, hamiltonian(problem, t, x, u, adjoint.p[k], adjoint.p_c));
    }
    rep.residual[k] = best - ref;
  });
  for (std::size_t k = 0; k < rep.residual.size(); ++k) {
    if (rep.residual[k] > rep.max_residual) {
      rep.max_residual = rep.residual[k];
      rep.worst_time = process.mesh[k];
    }
    if (rep.residual[k] > tol) rep.violating_times.push_back(process.mesh[k]);
  }
  rep.pass = rep.max_residual <= tol;
  return rep;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::refuted: return "refuted";
    case Verdict::unverified: return "unverified";
  }
  return "unverified";
}

PmpCertificate verify_pmp(const ControlProblem& problem, const std::vector<Vec>& candidate,
                          const PmpOptions& options) {
  problem.validate();
  const ControlProblem reduced = reduce_to_mayer(problem);
  const Process proc = integrate_state(reduced, resample_control(candidate, options.mesh));
  const std::vector<NeedleSpec> specs =
      options.needles ? *options.needles : default_needles(reduced, options.needle_times);
  const ConeV reach = build_reachable_cone(reduced, proc, specs, options.policy);

  PmpCertificate cert;
  cert.needles = specs.size();
  cert.reachable_generators = reach.generators().size();
  cert.terminal_state = proc.trajectory.back().head(problem.n);
  cert.cost = reduced.terminal_cost.value(proc.trajectory.back());

  const Vec& xb = proc.trajectory.back();
  const AbstractProblem ap{reach, target_cone_at(reduced, xb), reduced.terminal_cost.gradient(xb)};
  Vec p_b;
  double p_c = -1.0;
  Vec lambda;
  if (auto tm = terminal_multipliers(reduced, proc, reach)) {
    cert.multiplier_source = "amp";
    p_b = tm->p_b;
    p_c = tm->p_c;
    lambda = tm->multipliers.lambda;
    cert.transversality_residual = tm->transversality_residual;
    cert.quasi_adjoint_max = tm->quasi_adjoint_max;
    cert.normality = classify_normality(ap);
  } else {
    cert.multiplier_source = "diagnostic";
    const auto diag = diagnostic_lambda(ap, reach);
    lambda = diag ? *diag : Vec::Zero(reduced.n);
    p_b = lambda - ap.cost_gradient;
    for (const Vec& g : reach.generators()) {
      cert.quasi_adjoint_max = std::max(cert.quasi_adjoint_max, p_b.dot(g) / g.lpNorm<Eigen::Infinity>());
    }
  }
  cert.lambda = lambda.head(problem.n);
  cert.lambda_c = p_c;
  cert.reduced_adjoint = integrate_adjoint(reduced, proc, p_b, p_c);
  cert.adjoint = truncate(cert.reduced_adjoint, problem.n);

  Process original = proc;
  for (Vec& x : original.trajectory) x = x.head(problem.n).eval();
  cert.max_condition =
      check_maximum_condition(problem, original, cert.adjoint, options.certify_tol, options.policy);

  cert.min_adjoint_norm = std::numeric_limits<double>::infinity();
  for (const Vec& p : cert.reduced_adjoint.p) {
    cert.min_adjoint_norm = std::min(cert.min_adjoint_norm, std::max(p.lpNorm<Eigen::Infinity>(), std::abs(p_c)));
  }

  const double worst = cert.max_condition.max_residual;
  if (cert.multiplier_source == "diagnostic") {
    cert.verdict = Verdict::refuted;
    cert.reason = "no multipliers: the reachable cone and the profitable cone are transversal";
  } else if (worst > options.refute_tol) {
    cert.verdict = Verdict::refuted;
    cert.reason = "maximum condition violated at t = " + std::to_string(cert.max_condition.worst_time);
  } else if (worst <= options.certify_tol && cert.min_adjoint_norm >= 1e-9 &&
             cert.quasi_adjoint_max <= options.certify_tol) {
    cert.verdict = Verdict::certified;
    cert.reason = "all conditions hold on the mesh";
  } else {
    cert.verdict = Verdict::unverified;
    cert.reason = "residuals between the certification and refutation tolerances";
  }
  return cert;
}

}  // namespace sepcert
