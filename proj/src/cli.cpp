#include "sepcert/cli.hpp"

#include "sepcert/approx.hpp"
#include "sepcert/problem_io.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sepcert::cli {

namespace {

using io::Json;

struct Flags {
  std::string command;
  std::string file;
  std::string cert;
  std::optional<int> mesh;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string needles;
};

struct Outcome {
  int code = kInputError;
  Json report = Json::object();
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string vec_text(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v(i));
  return s + "]";
}

const char* kUsage =
    "usage: sepcert <command> <problem.json> [--cert <path>] [--mesh N] [--tol x] [--seed k] [--needles grid]\n"
    "commands:\n"
    "  cone separate|transversal|polar   cone pair files\n"
    "  amp solve                          abstract problem files\n"
    "  kkt verify | lagrange verify | fermat   nlp files\n"
    "  openmap check                      openmap files\n"
    "  pmp verify | needle check          control files\n"
    "exit status: 0 certified/true, 1 refuted/false, 2 unverified, 3 input error\n";

template <class T>
const T& expect(const io::ProblemFile& p, const char* kind) {
  if (const T* s = std::get_if<T>(&p)) return *s;
  throw UsageError(std::string("this command needs a '") + kind + "' problem");
}

void apply_flags(io::ProblemFile& p, const Flags& f) {
  if (auto* c = std::get_if<io::ControlSpec>(&p)) {
    if (f.mesh) c->options.mesh = *f.mesh;
    if (f.tol) c->options.certify_tol = *f.tol;
    if (f.seed) c->options.seed = *f.seed;
    if (!f.needles.empty()) {
      if (f.needles.find(',') == std::string::npos && f.needles.find('.') == std::string::npos) {
        c->options.needle_times = std::stoi(f.needles);
        c->options.needles.reset();
      } else {
        std::vector<io::NeedleEntry> list;
        std::stringstream ss(f.needles);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const double t = std::stod(item);
          for (const Vec& u : c->control_samples) list.push_back({t, u, 1.0});
        }
        c->options.needles = list;
      }
    }
    if (c->options.mesh < 1) throw UsageError("--mesh must be positive");
  } else if (auto* n = std::get_if<io::NlpSpec>(&p)) {
    if (f.tol) n->tol = *f.tol;
  } else if (auto* o = std::get_if<io::OpenMapSpec>(&p)) {
    if (f.seed) o->seed = *f.seed;
  }
}

Outcome cone_command(const std::string& what, const io::ConePairSpec& s, std::ostream& out) {
  Outcome o;
  if (what == "polar") {
    const Cone p = polar(s.k1);
    out << "polar: " << describe(p) << "\n";
    o.report["polar"] = io::to_json(p);
    o.code = kTrue;
    return o;
  }
  if (!s.k2) throw UsageError("cone " + what + " needs both 'k1' and 'k2'");
  const Cone& k2 = *s.k2;
  const auto sep = linear_separation(s.k1, k2);
  if (sep) o.report["separating_form"] = io::to_json(sep->p);
  if (what == "separate") {
    if (sep) {
      out << "separable: p = " << vec_text(sep->p) << " (" << sep->scale_note << ")\n";
      o.report["separable"] = true;
      o.code = kTrue;
    } else {
      out << "not separable\n";
      o.report["separable"] = false;
      o.code = kFalse;
    }
    return o;
  }
  const bool t = is_transversal(s.k1, k2);
  o.report["transversal"] = t;
  if (t) {
    const bool strong = is_strongly_transversal(s.k1, k2);
    o.report["strongly_transversal"] = strong;
    out << (strong ? "strongly transversal\n" : "transversal, not strongly transversal\n");
    o.code = kTrue;
  } else {
    out << "not transversal; separating form p = " << (sep ? vec_text(sep->p) : "?") << "\n";
    o.code = kFalse;
  }
  return o;
}

Outcome amp_command(const io::AbstractSpec& s, std::ostream& out) {
  Outcome o;
  const auto m = solve_amp(s.problem);
  if (!m) {
    out << "no multipliers: the augmented cones are transversal\n";
    o.report["multipliers"] = nullptr;
    o.code = kFalse;
    return o;
  }
  const AmpCheck check = check_amp(s.problem, *m);
  const Normality normality = classify_normality(s.problem);
  out << "lambda = " << vec_text(m->lambda) << "\nlambda_c = " << num(m->lambda_c) << "\n"
      << "normality: " << to_string(normality) << "\n"
      << "check: " << (check.ok() ? "ok" : "failed") << "\n";
  o.report["lambda"] = io::to_json(m->lambda);
  o.report["lambda_c"] = m->lambda_c;
  o.report["normality"] = to_string(normality);
  o.report["max_hamiltonian"] = check.max_hamiltonian;
  o.report["check_ok"] = check.ok();
  o.code = check.ok() ? kTrue : kUnverified;
  return o;
}

std::vector<ScalarFn> fns(const std::vector<expr::Ast>& xs) {
  std::vector<ScalarFn> out;
  for (const auto& e : xs) out.push_back(expr::scalar_fn(e));
  return out;
}

Outcome nlp_command(const std::string& what, const io::NlpSpec& s, std::ostream& out) {
  Outcome o;
  const Vec grad = expr::scalar_fn(s.cost).gradient(s.point);
  o.report["cost_gradient"] = io::to_json(grad);
  if (what == "fermat") {
    const bool ok = fermat_check(grad, s.tol);
    out << "grad Psi = " << vec_text(grad) << "\n" << (ok ? "stationary\n" : "not stationary\n");
    o.report["stationary"] = ok;
    o.code = ok ? kTrue : kFalse;
    return o;
  }
  const auto eq = fns(s.eq);
  const auto ineq = fns(s.ineq);
  if (what == "lagrange" && !ineq.empty()) throw UsageError("lagrange verify takes equality constraints only");
  for (std::size_t i = 0; i < eq.size(); ++i) {
    if (std::abs(eq[i].value(s.point)) > kActiveTol) {
      out << "refuted: equality constraint " << i + 1 << " violated\n";
      o.code = kFalse;
      return o;
    }
  }
  for (std::size_t j = 0; j < ineq.size(); ++j) {
    if (ineq[j].value(s.point) > kActiveTol) {
      out << "refuted: inequality constraint " << j + 1 << " violated\n";
      o.code = kFalse;
      return o;
    }
  }
  double residual = 0.0;
  bool certified = false;
  if (what == "lagrange") {
    const LagrangeResult r = lagrange_multipliers(eq, grad, s.point, s.tol);
    out << "alpha = " << vec_text(r.alphas) << "\nlambda_c = -1\nresidual = " << num(r.residual) << "\n";
    o.report["alphas"] = io::to_json(r.alphas);
    o.report["lambda_c"] = r.lambda_c;
    residual = r.residual;
    certified = r.certified;
  } else {
    const KktResult r = kkt_multipliers(eq, ineq, grad, s.point, s.tol);
    out << "alpha = " << vec_text(r.alphas) << "\nbeta = " << vec_text(r.betas)
        << "\nlambda_c = -1\nresidual = " << num(r.residual) << "\n";
    o.report["alphas"] = io::to_json(r.alphas);
    o.report["betas"] = io::to_json(r.betas);
    o.report["lambda_c"] = r.lambda_c;
    Json act = Json::array();
    for (bool b : r.active) act.push_back(b);
    o.report["active"] = act;
    residual = r.residual;
    certified = r.certified;
  }
  o.report["residual"] = residual;
  o.code = certified ? kTrue : residual > 100 * s.tol ? kFalse : kUnverified;
  out << (o.code == kTrue ? "certified\n" : o.code == kFalse ? "refuted\n" : "unverified\n");
  return o;
}

Outcome openmap_command(const io::OpenMapSpec& s, std::ostream& out) {
  Outcome o;
  const ConicMap map = s.build();
  DiffOptions d;
  d.seed = s.seed;
  const DiffReport diff = check_directional_diff(map, s.l, d);
  o.report["differentiable"] = diff.pass;
  if (!diff.pass) {
    out << "directional differential check failed: " << diff.note << "\n";
    o.code = kFalse;
    return o;
  }
  OpenMapOptions w;
  w.targets = s.targets;
  w.seed = s.seed;
  const OpenMappingWitness r = open_mapping_witness(map, s.l, s.v, w);
  out << "r_bar = " << num(r.r_bar) << "\nalpha = " << num(r.alpha) << "\nbeta = " << num(r.beta)
      << "\ns_bar = " << num(r.s_bar) << "\ncoverage = " << r.attained << "/" << r.targets << "\n";
  o.report["r_bar"] = r.r_bar;
  o.report["alpha"] = r.alpha;
  o.report["beta"] = r.beta;
  o.report["s_star"] = r.s_star;
  o.report["s_bar"] = r.s_bar;
  o.report["gamma"] = io::to_json(Cone(r.gamma));
  o.report["targets"] = r.targets;
  o.report["attained"] = r.attained;
  o.report["coverage_fraction"] = r.coverage_fraction;
  o.code = r.coverage_fraction >= s.min_coverage ? kTrue : kFalse;
  return o;
}

Json arc_json(const AdjointArc& arc) {
  Json p = Json::array();
  for (const Vec& v : arc.p) p.push_back(io::to_json(v));
  return {{"p_c", arc.p_c}, {"p", p}};
}

Outcome pmp_command(const io::ControlSpec& s, std::ostream& out) {
  Outcome o;
  const PmpOptions opts = s.pmp_options();
  const PmpCertificate c = verify_pmp(s.build(), s.candidate, opts);
  const double worst = c.max_condition.max_residual;
  out << "verdict: " << to_string(c.verdict) << " (" << c.reason << ")\n"
      << "multipliers: " << c.multiplier_source << ", p_c = " << num(c.lambda_c)
      << ", lambda = " << vec_text(c.lambda) << "\n"
      << "normality: " << (c.normality ? to_string(*c.normality) : std::string("n/a")) << "\n"
      << "p(a) = " << vec_text(c.adjoint.p.front()) << ", p(b) = " << vec_text(c.adjoint.p.back()) << "\n"
      << "maximum condition residual: " << num(worst) << " at t = " << num(c.max_condition.worst_time) << "\n"
      << "transversality residual: " << num(c.transversality_residual) << "\n"
      << "max p(b).w over reachable generators: " << num(c.quasi_adjoint_max) << "\n"
      << "mesh: " << opts.mesh << " steps, " << c.needles << " needles, " << c.reachable_generators
      << " generators\n";
  o.report["verdict"] = to_string(c.verdict);
  o.report["reason"] = c.reason;
  o.report["multiplier_source"] = c.multiplier_source;
  o.report["p_c"] = c.lambda_c;
  o.report["lambda"] = io::to_json(c.lambda);
  o.report["normality"] = c.normality ? Json(to_string(*c.normality)) : Json(nullptr);
  o.report["transversality_residual"] = c.transversality_residual;
  o.report["quasi_adjoint_max"] = c.quasi_adjoint_max;
  o.report["min_adjoint_norm"] = c.min_adjoint_norm;
  o.report["max_condition_residual"] = worst;
  o.report["worst_time"] = c.max_condition.worst_time;
  o.report["terminal_state"] = io::to_json(c.terminal_state);
  o.report["cost"] = c.cost;
  o.report["mesh"] = {{"steps", opts.mesh}, {"a", s.a}, {"b", s.b}};
  o.report["needles"] = c.needles;
  o.report["reachable_generators"] = c.reachable_generators;
  o.report["tolerances"] = {{"certify", opts.certify_tol}, {"refute", opts.refute_tol}};
  o.report["adjoint"] = arc_json(c.adjoint);
  Json res = Json::array();
  for (double r : c.max_condition.residual) res.push_back(r);
  o.report["residual_per_node"] = res;
  o.code = c.verdict == Verdict::certified ? kTrue : c.verdict == Verdict::refuted ? kFalse : kUnverified;
  return o;
}

Outcome needle_command(const io::ControlSpec& s, std::ostream& out) {
  Outcome o;
  const ControlProblem reduced = reduce_to_mayer(s.build());
  const Process proc = integrate_state(reduced, resample_control(s.candidate, s.options.mesh));
  std::vector<NeedleSpec> specs;
  std::vector<double> weights;
  if (s.options.needles) {
    for (const io::NeedleEntry& n : *s.options.needles) {
      specs.push_back({n.t, n.u});
      weights.push_back(n.weight);
    }
  } else {
    // One needle at the midpoint with the sample farthest from the candidate there.
    const double t = (s.a + s.b) / 2;
    const Vec& u_star = proc.control[static_cast<std::size_t>(snap_to_node(proc, t) - 1)];
    const Vec* best = &reduced.control_samples.front();
    for (const Vec& u : reduced.control_samples) {
      if ((u - u_star).norm() > (*best - u_star).norm()) best = &u;
    }
    specs.push_back({t, *best});
    weights.push_back(1.0);
  }
  std::vector<double> scales;
  for (int k = 0; k <= s.options.halvings; ++k) scales.push_back(s.options.eps0 / std::pow(2.0, k));
  const NeedleReport r = check_needle_expansion(reduced, proc, specs, weights, scales, s.options.min_decay);
  out << "eps            error          ratio\n";
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.ratio.size(); ++i) {
    out << num(r.eps_scale[i]) << "  " << num(r.error[i]) << "  " << num(r.ratio[i]) << "\n";
    rows.push_back({{"eps", r.eps_scale[i]}, {"error", r.error[i]}, {"ratio", r.ratio[i]}});
  }
  out << (r.pass ? "pass\n" : "fail\n");
  o.report["ladder"] = rows;
  o.report["min_decay"] = s.options.min_decay;
  o.report["pass"] = r.pass;
  o.code = r.pass ? kTrue : kFalse;
  return o;
}

Outcome dispatch(const std::string& command, const io::ProblemFile& p, std::ostream& out) {
  if (command.rfind("cone ", 0) == 0) return cone_command(command.substr(5), expect<io::ConePairSpec>(p, "cones"), out);
  if (command == "amp solve") return amp_command(expect<io::AbstractSpec>(p, "abstract"), out);
  if (command == "kkt verify") return nlp_command("kkt", expect<io::NlpSpec>(p, "nlp"), out);
  if (command == "lagrange verify") return nlp_command("lagrange", expect<io::NlpSpec>(p, "nlp"), out);
  if (command == "fermat") return nlp_command("fermat", expect<io::NlpSpec>(p, "nlp"), out);
  if (command == "openmap check") return openmap_command(expect<io::OpenMapSpec>(p, "openmap"), out);
  if (command == "pmp verify") return pmp_command(expect<io::ControlSpec>(p, "control"), out);
  if (command == "needle check") return needle_command(expect<io::ControlSpec>(p, "control"), out);
  throw UsageError("unknown command '" + command + "'");
}

std::optional<Flags> parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Separation-based certificates for cone, multiplier and maximum principle conditions", "sepcert"};
  app.fallthrough();
  app.require_subcommand(1);
  Flags f;
  app.add_option("--cert", f.cert, "write a JSON certificate to this path");
  app.add_option("--mesh", f.mesh, "mesh steps for control problems");
  app.add_option("--tol", f.tol, "certification tolerance");
  app.add_option("--seed", f.seed, "seed for randomized checks");
  app.add_option("--needles", f.needles, "needle grid: a count of times, or a comma list of times");

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& full) {
    CLI::App* sub = parent->add_subcommand(name);
    sub->add_option("file", f.file, "problem or certificate file")->required();
    sub->callback([&f, full] { f.command = full; });
  };
  CLI::App* cone = app.add_subcommand("cone", "cone predicates");
  cone->require_subcommand(1);
  for (const char* w : {"separate", "transversal", "polar"}) leaf(cone, w, std::string("cone ") + w);
  CLI::App* amp = app.add_subcommand("amp", "abstract maximum principle");
  amp->require_subcommand(1);
  leaf(amp, "solve", "amp solve");
  CLI::App* kkt = app.add_subcommand("kkt", "KKT multipliers");
  kkt->require_subcommand(1);
  leaf(kkt, "verify", "kkt verify");
  CLI::App* lag = app.add_subcommand("lagrange", "Lagrange multipliers");
  lag->require_subcommand(1);
  leaf(lag, "verify", "lagrange verify");
  leaf(&app, "fermat", "fermat");
  CLI::App* om = app.add_subcommand("openmap", "directional open mapping");
  om->require_subcommand(1);
  leaf(om, "check", "openmap check");
  CLI::App* pmp = app.add_subcommand("pmp", "maximum principle");
  pmp->require_subcommand(1);
  leaf(pmp, "verify", "pmp verify");
  CLI::App* needle = app.add_subcommand("needle", "needle-variation expansion");
  needle->require_subcommand(1);
  leaf(needle, "check", "needle check");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << kUsage;
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kUsage;
    f.command.clear();
    return f;
  }
  return f;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto flags = parse_args(args, out, err);
  if (!flags) return kTrue;
  if (flags->command.empty()) return kInputError;
  try {
    io::ProblemFile problem = io::load_problem(flags->file);
    apply_flags(problem, *flags);
    Outcome o = dispatch(flags->command, problem, out);
    if (!flags->cert.empty()) {
      Json cert;
      cert["command"] = flags->command;
      cert["exit_code"] = o.code;
      cert["problem"] = io::to_json(problem);
      cert["result"] = o.report;
      std::ofstream file(flags->cert);
      if (!file) throw std::runtime_error("cannot write certificate '" + flags->cert + "'");
      file << cert.dump(2) << "\n";
    }
    return o.code;
  } catch (const io::ProblemError& e) {
    for (const std::string& msg : e.errors()) err << "error: " << msg << "\n";
    return kInputError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << kUsage;
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    out << "unverified\n";
    return kUnverified;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace sepcert::cli
