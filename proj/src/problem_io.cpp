#include "sepcert/problem_io.hpp"

#include <fstream>
#include <sstream>

namespace sepcert::io {

ProblemError::ProblemError(std::vector<std::string> errors)
    : std::invalid_argument([&] {
        std::string joined;
        for (const std::string& e : errors) joined += (joined.empty() ? "" : "; ") + e;
        return joined;
      }()),
      errors_(std::move(errors)) {}

namespace {

// Collects every error instead of stopping at the first one; accessors
// return placeholders after recording a failure.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  const Json* get(const Json& obj, const std::string& path, const char* key, bool required = true) {
    if (!obj.is_object()) {
      fail(path, "expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) errors.push_back("missing field '" + join(path, key) + "'");
      return nullptr;
    }
    return &*it;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  double number(const Json* j, const std::string& path, double fallback = 0.0) {
    if (!j) return fallback;
    if (!j->is_number()) {
      fail(path, "expected a number");
      return fallback;
    }
    return j->get<double>();
  }

  int integer(const Json* j, const std::string& path, int fallback = 0) {
    if (!j) return fallback;
    if (!j->is_number_integer()) {
      fail(path, "expected an integer");
      return fallback;
    }
    return j->get<int>();
  }

  Vec vec(const Json* j, const std::string& path, Eigen::Index size = -1) {
    if (!j) return Vec::Zero(std::max<Eigen::Index>(size, 0));
    if (!j->is_array()) {
      fail(path, "expected an array of numbers");
      return Vec::Zero(std::max<Eigen::Index>(size, 0));
    }
    Vec v(static_cast<Eigen::Index>(j->size()));
    for (std::size_t i = 0; i < j->size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = number(&(*j)[i], path + "[" + std::to_string(i) + "]");
    }
    if (size >= 0 && v.size() != size) {
      fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
      return Vec::Zero(size);
    }
    return v;
  }

  std::vector<Vec> vec_list(const Json* j, const std::string& path, Eigen::Index size) {
    std::vector<Vec> out;
    if (!j) return out;
    if (!j->is_array()) {
      fail(path, "expected an array of vectors");
      return out;
    }
    for (std::size_t i = 0; i < j->size(); ++i) out.push_back(vec(&(*j)[i], path + "[" + std::to_string(i) + "]", size));
    return out;
  }

  Mat matrix(const Json* j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
    const std::vector<Vec> r = vec_list(j, path, cols);
    if (j && static_cast<Eigen::Index>(r.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows");
      return Mat::Zero(rows, cols);
    }
    Mat m = Mat::Zero(rows, cols);
    for (std::size_t i = 0; i < r.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = r[i].transpose();
    return m;
  }

  expr::Ast expression(const Json* j, const std::string& path, expr::Dims dims) {
    if (!j) return nullptr;
    if (!j->is_string()) {
      fail(path, "expected an expression string");
      return nullptr;
    }
    try {
      return expr::parse(j->get<std::string>(), dims);
    } catch (const expr::ParseError& e) {
      fail(path, e.what());
      return nullptr;
    }
  }

  std::vector<expr::Ast> expressions(const Json* j, const std::string& path, expr::Dims dims) {
    std::vector<expr::Ast> out;
    if (!j) return out;
    if (!j->is_array()) {
      fail(path, "expected an array of expression strings");
      return out;
    }
    for (std::size_t i = 0; i < j->size(); ++i) {
      out.push_back(expression(&(*j)[i], path + "[" + std::to_string(i) + "]", dims));
    }
    return out;
  }

  std::optional<Cone> cone(const Json* j, const std::string& path, Eigen::Index dim) {
    if (!j) return std::nullopt;
    if (j->is_string()) {
      const auto s = j->get<std::string>();
      if (s == "free" || s == "full") return Cone(ConeH::full_space(dim));
      if (s == "zero") return Cone(ConeV::zero(dim));
      fail(path, "unknown cone '" + s + "'");
      return std::nullopt;
    }
    if (!j->is_object()) {
      fail(path, "expected a cone object");
      return std::nullopt;
    }
    const std::size_t before = errors.size();
    if (j->contains("generators")) {
      std::vector<Vec> gens = vec_list(get(*j, path, "generators"), join(path, "generators"), dim);
      if (errors.size() != before) return std::nullopt;
      try {
        return Cone(ConeV(dim, std::move(gens)));
      } catch (const std::exception& e) {
        fail(path, e.what());
        return std::nullopt;
      }
    }
    if (j->contains("ineq_normals") || j->contains("eq_normals")) {
      auto ineq = vec_list(get(*j, path, "ineq_normals", false), join(path, "ineq_normals"), dim);
      auto eq = vec_list(get(*j, path, "eq_normals", false), join(path, "eq_normals"), dim);
      if (errors.size() != before) return std::nullopt;
      return Cone(ConeH(dim, std::move(ineq), std::move(eq)));
    }
    fail(path, "cone needs 'generators' or 'ineq_normals'/'eq_normals'");
    return std::nullopt;
  }

  void finish() const {
    if (!errors.empty()) throw ProblemError(errors);
  }
};

ControlOptions read_options(Reader& r, const Json* j, int m) {
  ControlOptions o;
  if (!j) return o;
  const std::string p = "options";
  o.mesh = r.integer(r.get(*j, p, "mesh", false), p + ".mesh", o.mesh);
  o.certify_tol = r.number(r.get(*j, p, "certify_tol", false), p + ".certify_tol", o.certify_tol);
  o.refute_tol = r.number(r.get(*j, p, "refute_tol", false), p + ".refute_tol", o.refute_tol);
  o.needle_times = r.integer(r.get(*j, p, "needle_times", false), p + ".needle_times", o.needle_times);
  o.seed = static_cast<std::uint64_t>(r.integer(r.get(*j, p, "seed", false), p + ".seed", 0));
  o.eps0 = r.number(r.get(*j, p, "eps0", false), p + ".eps0", o.eps0);
  o.halvings = r.integer(r.get(*j, p, "halvings", false), p + ".halvings", o.halvings);
  o.min_decay = r.number(r.get(*j, p, "min_decay", false), p + ".min_decay", o.min_decay);
  if (o.mesh < 1) r.fail(p + ".mesh", "must be positive");
  if (const Json* nj = r.get(*j, p, "needles", false)) {
    if (!nj->is_array()) {
      r.fail(p + ".needles", "expected an array");
    } else {
      std::vector<NeedleEntry> list;
      for (std::size_t i = 0; i < nj->size(); ++i) {
        const std::string q = p + ".needles[" + std::to_string(i) + "]";
        const Json& e = (*nj)[i];
        NeedleEntry n;
        n.t = r.number(r.get(e, q, "t"), q + ".t");
        n.u = r.vec(r.get(e, q, "u"), q + ".u", m);
        n.weight = r.number(r.get(e, q, "weight", false), q + ".weight", 1.0);
        list.push_back(n);
      }
      o.needles = std::move(list);
    }
  }
  return o;
}

ControlSpec read_control(Reader& r, const Json& doc) {
  ControlSpec s;
  if (const Json* dims = r.get(doc, "", "dims")) {
    s.n = r.integer(r.get(*dims, "dims", "n"), "dims.n");
    s.m = r.integer(r.get(*dims, "dims", "m"), "dims.m");
    if (s.n < 1) r.fail("dims.n", "must be positive");
    if (s.m < 0) r.fail("dims.m", "must be nonnegative");
  }
  if (const Json* h = r.get(doc, "", "horizon")) {
    s.a = r.number(r.get(*h, "horizon", "a"), "horizon.a");
    s.b = r.number(r.get(*h, "horizon", "b"), "horizon.b");
    if (!(s.a < s.b)) r.fail("horizon", "requires a < b");
  }
  if (!r.errors.empty()) return s;
  const expr::Dims d{s.n, s.m};
  s.x0 = r.vec(r.get(doc, "", "x0"), "x0", s.n);
  const Json* dyn = r.get(doc, "", "dynamics");
  s.dynamics = r.expressions(dyn, "dynamics", d);
  if (dyn && dyn->is_array() && static_cast<int>(dyn->size()) != s.n) {
    r.fail("dynamics", "expected " + std::to_string(s.n) + " expressions");
  }
  if (const Json* l = r.get(doc, "", "lagrangian", false)) s.lagrangian = r.expression(l, "lagrangian", d);
  s.terminal_cost = r.expression(r.get(doc, "", "terminal_cost"), "terminal_cost", {s.n, 0});

  if (const Json* t = r.get(doc, "", "target")) {
    if (t->is_string() && t->get<std::string>() == "free") {
      // free endpoint
    } else if (t->is_object() && (t->contains("eq") || t->contains("ineq"))) {
      s.target_constraints.emplace(r.expressions(r.get(*t, "target", "eq", false), "target.eq", {s.n, 0}),
                                   r.expressions(r.get(*t, "target", "ineq", false), "target.ineq", {s.n, 0}));
    } else {
      s.target_cone = r.cone(t, "target", s.n);
    }
  }

  const Json* samples = r.get(doc, "", "control_samples", false);
  const Json* box = r.get(doc, "", "control_box", false);
  if (samples) {
    s.control_samples = r.vec_list(samples, "control_samples", s.m);
  } else if (box) {
    const Vec lo = r.vec(r.get(*box, "control_box", "lower"), "control_box.lower", s.m);
    const Vec hi = r.vec(r.get(*box, "control_box", "upper"), "control_box.upper", s.m);
    const int pts = r.integer(r.get(*box, "control_box", "points", false), "control_box.points", 9);
    if (pts < 1) r.fail("control_box.points", "must be positive");
    if ((lo.array() > hi.array()).any()) r.fail("control_box", "lower exceeds upper");
    if (r.errors.empty()) s.control_samples = box_grid(lo, hi, pts);
  } else {
    r.errors.push_back("missing field 'control_samples'");
  }
  if ((samples || box) && s.control_samples.empty() && r.errors.empty()) {
    r.fail("control_samples", "must be nonempty");
  }
  s.candidate = r.vec_list(r.get(doc, "", "candidate"), "candidate", s.m);
  if (r.get(doc, "", "candidate", false) && s.candidate.empty()) r.fail("candidate", "must be nonempty");
  s.options = read_options(r, r.get(doc, "", "options", false), s.m);
  return s;
}

AbstractSpec read_abstract(Reader& r, const Json& doc) {
  const int n = r.integer(r.get(doc, "", "dim"), "dim");
  if (n < 1) {
    r.fail("dim", "must be positive");
    return {AbstractProblem{ConeV::zero(1), ConeV::zero(1), Vec::Zero(1)}};
  }
  auto reach = r.cone(r.get(doc, "", "reachable"), "reachable", n);
  auto target = r.cone(r.get(doc, "", "target"), "target", n);
  Vec g = r.vec(r.get(doc, "", "cost_gradient"), "cost_gradient", n);
  return {AbstractProblem{reach.value_or(ConeV::zero(n)), target.value_or(ConeV::zero(n)), g}};
}

NlpSpec read_nlp(Reader& r, const Json& doc) {
  NlpSpec s;
  s.n = r.integer(r.get(doc, "", "dim"), "dim");
  if (s.n < 1) {
    r.fail("dim", "must be positive");
    return s;
  }
  const expr::Dims d{s.n, 0};
  s.cost = r.expression(r.get(doc, "", "cost"), "cost", d);
  s.eq = r.expressions(r.get(doc, "", "eq", false), "eq", d);
  s.ineq = r.expressions(r.get(doc, "", "ineq", false), "ineq", d);
  s.point = r.vec(r.get(doc, "", "point"), "point", s.n);
  s.tol = r.number(r.get(doc, "", "tol", false), "tol", s.tol);
  return s;
}

ConePairSpec read_cones(Reader& r, const Json& doc) {
  ConePairSpec s;
  const int n = r.integer(r.get(doc, "", "dim"), "dim");
  if (n < 1) {
    r.fail("dim", "must be positive");
    return s;
  }
  s.k1 = r.cone(r.get(doc, "", "k1"), "k1", n).value_or(ConeV::zero(n));
  s.k2 = r.cone(r.get(doc, "", "k2", false), "k2", n);
  return s;
}

OpenMapSpec read_openmap(Reader& r, const Json& doc) {
  OpenMapSpec s;
  if (const Json* dims = r.get(doc, "", "dims")) {
    s.m = r.integer(r.get(*dims, "dims", "m"), "dims.m");
    s.n = r.integer(r.get(*dims, "dims", "n"), "dims.n");
    if (s.m < 1 || s.n < 1) r.fail("dims", "m and n must be positive");
  }
  if (!r.errors.empty()) return s;
  const Json* mj = r.get(doc, "", "map");
  s.map = r.expressions(mj, "map", {s.m, 0});
  if (mj && mj->is_array() && static_cast<int>(mj->size()) != s.n) {
    r.fail("map", "expected " + std::to_string(s.n) + " expressions");
  }
  s.base = r.get(doc, "", "base", false) ? r.vec(r.get(doc, "", "base"), "base", s.m) : Vec(Vec::Zero(s.m));
  s.cone = r.cone(r.get(doc, "", "cone"), "cone", s.m).value_or(ConeV::zero(s.m));
  s.radius = r.number(r.get(doc, "", "radius", false), "radius", 1.0);
  s.l = r.matrix(r.get(doc, "", "differential"), "differential", s.n, s.m);
  s.v = r.vec(r.get(doc, "", "v"), "v", s.n);
  s.targets = r.integer(r.get(doc, "", "targets", false), "targets", s.targets);
  s.min_coverage = r.number(r.get(doc, "", "min_coverage", false), "min_coverage", s.min_coverage);
  s.seed = static_cast<std::uint64_t>(r.integer(r.get(doc, "", "seed", false), "seed", 0));
  return s;
}

Json exprs_json(const std::vector<expr::Ast>& xs) {
  Json a = Json::array();
  for (const auto& e : xs) a.push_back(expr::print(e));
  return a;
}

Json vec_list_json(const std::vector<Vec>& vs) {
  Json a = Json::array();
  for (const Vec& v : vs) a.push_back(to_json(v));
  return a;
}

Json control_json(const ControlSpec& s) {
  Json j;
  j["kind"] = "control";
  j["dims"] = {{"n", s.n}, {"m", s.m}};
  j["horizon"] = {{"a", s.a}, {"b", s.b}};
  j["x0"] = to_json(s.x0);
  j["dynamics"] = exprs_json(s.dynamics);
  if (s.lagrangian) j["lagrangian"] = expr::print(*s.lagrangian);
  j["terminal_cost"] = expr::print(s.terminal_cost);
  if (s.target_cone) {
    j["target"] = to_json(*s.target_cone);
  } else if (s.target_constraints) {
    j["target"] = {{"eq", exprs_json(s.target_constraints->first)},
                   {"ineq", exprs_json(s.target_constraints->second)}};
  } else {
    j["target"] = "free";
  }
  j["control_samples"] = vec_list_json(s.control_samples);
  j["candidate"] = vec_list_json(s.candidate);
  const ControlOptions& o = s.options;
  Json opt = {{"mesh", o.mesh},     {"certify_tol", o.certify_tol}, {"refute_tol", o.refute_tol},
              {"needle_times", o.needle_times}, {"seed", o.seed},   {"eps0", o.eps0},
              {"halvings", o.halvings},         {"min_decay", o.min_decay}};
  if (o.needles) {
    Json list = Json::array();
    for (const NeedleEntry& n : *o.needles) list.push_back({{"t", n.t}, {"u", to_json(n.u)}, {"weight", n.weight}});
    opt["needles"] = list;
  }
  j["options"] = opt;
  return j;
}

}  // namespace

ControlProblem ControlSpec::build() const {
  ControlProblem p;
  p.n = n;
  p.m = m;
  p.a = a;
  p.b = b;
  p.x0 = x0;
  const auto dyn = dynamics;
  p.dynamics.f = [dyn](double t, const Vec& x, const Vec& u) {
    Vec out(static_cast<Eigen::Index>(dyn.size()));
    for (std::size_t i = 0; i < dyn.size(); ++i) out(static_cast<Eigen::Index>(i)) = expr::eval(dyn[i], {t, x, u});
    return out;
  };
  p.dynamics.jac_x = [dyn](double t, const Vec& x, const Vec& u) {
    Mat j(static_cast<Eigen::Index>(dyn.size()), x.size());
    for (std::size_t i = 0; i < dyn.size(); ++i) {
      j.row(static_cast<Eigen::Index>(i)) = expr::gradient_x(dyn[i], {t, x, u}).transpose();
    }
    return j;
  };
  if (lagrangian) {
    const expr::Ast l = *lagrangian;
    p.lagrangian = RunningCost{[l](double t, const Vec& x, const Vec& u) { return expr::eval(l, {t, x, u}); },
                               [l](double t, const Vec& x, const Vec& u) { return expr::gradient_x(l, {t, x, u}); }};
  }
  p.terminal_cost = expr::scalar_fn(terminal_cost);
  if (target_cone) {
    p.target = *target_cone;
  } else if (target_constraints) {
    EndpointConstraints ec;
    for (const auto& e : target_constraints->first) ec.eq.push_back(expr::scalar_fn(e));
    for (const auto& e : target_constraints->second) ec.ineq.push_back(expr::scalar_fn(e));
    p.target = ec;
  }
  p.control_samples = control_samples;
  return p;
}

PmpOptions ControlSpec::pmp_options() const {
  PmpOptions o;
  o.mesh = options.mesh;
  o.needle_times = options.needle_times;
  o.certify_tol = options.certify_tol;
  o.refute_tol = options.refute_tol;
  if (options.needles) {
    std::vector<NeedleSpec> specs;
    for (const NeedleEntry& n : *options.needles) specs.push_back({n.t, n.u});
    o.needles = specs;
  }
  return o;
}

ConicMap OpenMapSpec::build() const {
  ConicMap f;
  f.m = m;
  f.n = n;
  f.base = base;
  f.cone = cone;
  f.radius = radius;
  const auto comps = map;
  f.eval = [comps](const Vec& x) {
    Vec out(static_cast<Eigen::Index>(comps.size()));
    for (std::size_t i = 0; i < comps.size(); ++i) out(static_cast<Eigen::Index>(i)) = expr::eval(comps[i], {0.0, x, Vec()});
    return out;
  };
  return f;
}

ProblemFile parse_problem(const Json& doc_in) {
  const Json& doc = doc_in.is_object() && doc_in.contains("problem") ? doc_in["problem"] : doc_in;
  Reader r;
  const Json* kind = r.get(doc, "", "kind");
  if (!kind || !kind->is_string()) {
    if (kind) r.fail("kind", "expected a string");
    r.finish();
  }
  const std::string k = kind->get<std::string>();
  ProblemFile out;
  if (k == "control") {
    out = read_control(r, doc);
  } else if (k == "abstract") {
    out = read_abstract(r, doc);
  } else if (k == "nlp") {
    out = read_nlp(r, doc);
  } else if (k == "cones") {
    out = read_cones(r, doc);
  } else if (k == "openmap") {
    out = read_openmap(r, doc);
  } else {
    r.fail("kind", "unknown problem kind '" + k + "'");
  }
  r.finish();
  return out;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError({path + ": cannot open file"});
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ProblemError({path + ": " + e.what()});
  }
  return parse_problem(doc);
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

Json to_json(const Cone& k) {
  if (const ConeV* v = k.as_v()) return {{"generators", vec_list_json(v->generators())}};
  return {{"ineq_normals", vec_list_json(k.as_h()->ineq_normals())},
          {"eq_normals", vec_list_json(k.as_h()->eq_normals())}};
}

Cone cone_from_json(const Json& j, Eigen::Index dim) {
  Reader r;
  auto c = r.cone(&j, "cone", dim);
  r.finish();
  return *c;
}

Json to_json(const ProblemFile& problem) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ControlSpec>) {
          return control_json(s);
        } else if constexpr (std::is_same_v<T, AbstractSpec>) {
          return {{"kind", "abstract"},
                  {"dim", s.problem.dim()},
                  {"reachable", to_json(s.problem.reachable)},
                  {"target", to_json(s.problem.target)},
                  {"cost_gradient", to_json(s.problem.cost_gradient)}};
        } else if constexpr (std::is_same_v<T, NlpSpec>) {
          return {{"kind", "nlp"},       {"dim", s.n},     {"cost", expr::print(s.cost)},
                  {"eq", exprs_json(s.eq)}, {"ineq", exprs_json(s.ineq)}, {"point", to_json(s.point)},
                  {"tol", s.tol}};
        } else if constexpr (std::is_same_v<T, ConePairSpec>) {
          Json j = {{"kind", "cones"}, {"dim", s.k1.dim()}, {"k1", to_json(s.k1)}};
          if (s.k2) j["k2"] = to_json(*s.k2);
          return j;
        } else {
          return {{"kind", "openmap"},
                  {"dims", {{"m", s.m}, {"n", s.n}}},
                  {"map", exprs_json(s.map)},
                  {"base", to_json(s.base)},
                  {"cone", to_json(s.cone)},
                  {"radius", s.radius},
                  {"differential", to_json(s.l)},
                  {"v", to_json(s.v)},
                  {"targets", s.targets},
                  {"min_coverage", s.min_coverage},
                  {"seed", s.seed}};
        }
      },
      problem);
}

std::vector<Vec> box_grid(const Vec& lower, const Vec& upper, int points) {
  const Eigen::Index m = lower.size();
  std::vector<Vec> out{Vec(m)};
  for (Eigen::Index axis = 0; axis < m; ++axis) {
    std::vector<Vec> next;
    for (const Vec& head : out) {
      for (int k = 0; k < points; ++k) {
        Vec v = head;
        v(axis) = points == 1 ? (lower(axis) + upper(axis)) / 2
                              : lower(axis) + (upper(axis) - lower(axis)) * k / (points - 1);
        next.push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace sepcert::io
