#pragma once

#include "sepcert/amp.hpp"
#include "sepcert/cone.hpp"
#include "sepcert/linalg.hpp"
#include "sepcert/parallel.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sepcert {

struct Dynamics {
  std::function<Vec(double t, const Vec& x, const Vec& u)> f;
  /// df/dx, n x n.
  std::function<Mat(double t, const Vec& x, const Vec& u)> jac_x;
};

struct RunningCost {
  std::function<double(double t, const Vec& x, const Vec& u)> l;
  std::function<Vec(double t, const Vec& x, const Vec& u)> grad_x;
};

struct FreeEndpoint {};

/// Endpoint constraints phi_i(x(b)) = 0, h_j(x(b)) <= 0.
struct EndpointConstraints {
  std::vector<ScalarFn> eq;
  std::vector<ScalarFn> ineq;
};

using Target = std::variant<FreeEndpoint, Cone, EndpointConstraints>;

/// minimize Psi(x(b)) + int_a^b l(t, x, u) dt  s.t.  x' = f(t, x, u),
/// x(a) = x0, u(t) in U, x(b) in the target.
struct ControlProblem {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double a = 0.0;
  double b = 1.0;
  Vec x0;
  Dynamics dynamics;
  std::optional<RunningCost> lagrangian;
  ScalarFn terminal_cost;
  Target target = FreeEndpoint{};
  /// Finite sample of the control set U; the maximum condition is checked
  /// against these values only.
  std::vector<Vec> control_samples;

  void validate() const;
};

/// Piecewise-constant control, one value per mesh interval.
using ControlSignal = std::vector<Vec>;

/// Maps k equal-length segments onto an N-interval mesh by interval midpoint.
ControlSignal resample_control(const std::vector<Vec>& segments, int steps);

struct Process {
  std::vector<double> mesh;
  ControlSignal control;
  std::vector<Vec> trajectory;

  int steps() const { return static_cast<int>(control.size()); }
  double step() const { return mesh[1] - mesh[0]; }
};

struct NeedleSpec {
  double t = 0.0;
  Vec u;
};

struct AdjointArc {
  std::vector<double> mesh;
  std::vector<Vec> p;
  double p_c = 0.0;
};

ControlProblem reduce_to_mayer(const ControlProblem& problem);

/// Fixed-step RK4 with control.size() steps.
Process integrate_state(const ControlProblem& problem, const ControlSignal& control);

/// State at the midpoint of interval k by cubic Hermite interpolation.
Vec midpoint_state(const ControlProblem& problem, const Process& process, int k);

/// Psi(x(b)) + int l dt, the integral by Simpson's rule on the mesh.
double functional_value(const ControlProblem& problem, const Process& process);

/// Mesh node a needle time snaps to (1..N); throws outside (a, b].
int snap_to_node(const Process& process, double t);

struct Variation {
  int node = 0;
  /// f(t_i, x*, u_i) - f(t_i, x*, u*(t_i)).
  Vec direction;
  /// w(t) on nodes node..N.
  std::vector<Vec> path;

  const Vec& at_end() const { return path.back(); }
};

/// Propagates the needle direction with the variational equation; never
/// forms the fundamental matrix.
Variation propagate_variation(const ControlProblem& problem, const Process& process,
                              const NeedleSpec& spec);

ConeV build_reachable_cone(const ControlProblem& problem, const Process& process,
                           const std::vector<NeedleSpec>& specs,
                           ExecPolicy policy = ExecPolicy::serial);

/// The default needle catalog: `times` interior times times every control sample.
std::vector<NeedleSpec> default_needles(const ControlProblem& problem, int times = 16);

/// |x_eps(b) - x*(b) - sum eps_i w_i(b)| for needle widths eps_i.
double needle_endpoint_error(const ControlProblem& problem, const Process& process,
                             const std::vector<NeedleSpec>& specs, const std::vector<double>& eps);

struct NeedleReport {
  std::vector<double> eps_scale;
  std::vector<double> error;
  std::vector<double> ratio;
  bool pass = false;
};

/// eps_i = scale * weights_i over a halving ladder of scales.
NeedleReport check_needle_expansion(const ControlProblem& problem, const Process& process,
                                    const std::vector<NeedleSpec>& specs,
                                    const std::vector<double>& weights,
                                    const std::vector<double>& scales, double min_decay = 1.5);

AdjointArc integrate_adjoint(const ControlProblem& problem, const Process& process,
                             const Vec& p_b, double p_c);

/// The approximating cone to the target at x: R^n, the given cone, or the
/// active-set cone of the endpoint constraints.
Cone target_cone_at(const ControlProblem& problem, const Vec& x);

struct TerminalMultipliers {
  Multipliers multipliers;
  Vec p_b;
  double p_c = 0.0;
  double transversality_residual = 0.0;
  /// max over reachable generators of p(b) . w / |w|_inf.
  double quasi_adjoint_max = 0.0;
};

std::optional<TerminalMultipliers> terminal_multipliers(const ControlProblem& problem,
                                                        const Process& process,
                                                        const ConeV& reachable);

struct MaxConditionReport {
  std::vector<double> residual;
  double max_residual = 0.0;
  double worst_time = 0.0;
  std::vector<double> violating_times;
  bool pass = false;
};

MaxConditionReport check_maximum_condition(const ControlProblem& problem, const Process& process,
                                           const AdjointArc& adjoint, double tol = 1e-6,
                                           ExecPolicy policy = ExecPolicy::serial);

enum class Verdict { certified, refuted, unverified };

std::string to_string(Verdict v);

struct PmpOptions {
  int mesh = 1000;
  int needle_times = 16;
  /// Replaces the default catalog when set (an empty list gives R = {0}).
  std::optional<std::vector<NeedleSpec>> needles;
  double certify_tol = 1e-6;
  double refute_tol = 1e-4;
  ExecPolicy policy = ExecPolicy::serial;
};

struct PmpCertificate {
  /// Adjoint in the original state dimension.
  AdjointArc adjoint;
  /// Adjoint of the Mayer-reduced problem (equal to `adjoint` when l = 0).
  AdjointArc reduced_adjoint;
  Vec lambda;
  double lambda_c = 0.0;
  /// "amp" when the multipliers come from the maximum principle LP;
  /// "diagnostic" when none exist and a least-violating normal multiplier
  /// is used only to report residuals.
  std::string multiplier_source;
  MaxConditionReport max_condition;
  double transversality_residual = 0.0;
  double quasi_adjoint_max = 0.0;
  double min_adjoint_norm = 0.0;
  std::optional<Normality> normality;
  std::size_t reachable_generators = 0;
  std::size_t needles = 0;
  Vec terminal_state;
  double cost = 0.0;
  Verdict verdict = Verdict::unverified;
  std::string reason;
};

/// Mayer reduction, state integration, reachable cone, multipliers at b,
/// backward adjoint, maximum condition on the mesh, verdict.
PmpCertificate verify_pmp(const ControlProblem& problem, const std::vector<Vec>& candidate,
                          const PmpOptions& options = {});

}  // namespace sepcert
