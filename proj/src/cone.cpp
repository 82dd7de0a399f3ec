#include "sepcert/cone.hpp"

#include "sepcert/cone_lp.hpp"
#include "sepcert/lp.hpp"

#include <cmath>
#include <sstream>

namespace sepcert {

namespace {

void check_rows(const std::vector<Vec>& rows, Eigen::Index dim, const char* what) {
  for (const Vec& r : rows) {
    require_dim(r.size(), dim, what);
    if (!r.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

void require_same_dim(const Cone& k1, const Cone& k2) {
  require_dim(k2.dim(), k1.dim(), "cone pair");
}

}  // namespace

ConeV::ConeV(Eigen::Index dim, std::vector<Vec> generators)
    : dim_(dim), generators_(std::move(generators)) {
  if (dim_ < 1) throw DimensionError("cone: dimension must be positive");
  check_rows(generators_, dim_, "cone generator");
  for (const Vec& g : generators_) {
    if (g.isZero(0.0)) throw std::invalid_argument("cone generator: zero vector");
  }
}

ConeV ConeV::full_space(Eigen::Index dim) {
  std::vector<Vec> gens;
  for (Eigen::Index k = 0; k < dim; ++k) {
    gens.push_back(unit_vec(dim, k));
    gens.push_back(-unit_vec(dim, k));
  }
  return ConeV(dim, std::move(gens));
}

ConeH::ConeH(Eigen::Index dim, std::vector<Vec> ineq_normals, std::vector<Vec> eq_normals)
    : dim_(dim), ineq_(std::move(ineq_normals)), eq_(std::move(eq_normals)) {
  if (dim_ < 1) throw DimensionError("cone: dimension must be positive");
  check_rows(ineq_, dim_, "cone inequality normal");
  check_rows(eq_, dim_, "cone equality normal");
}

Eigen::Index Cone::dim() const {
  return std::visit([](const auto& c) { return c.dim(); }, rep_);
}

namespace cone_lp {

void constrain_member(lp::Program& prog, const std::vector<int>& w, const Cone& k) {
  const Eigen::Index n = k.dim();
  require_dim(static_cast<Eigen::Index>(w.size()), n, "cone encoding");
  if (const ConeV* v = k.as_v()) {
    std::vector<int> mu;
    for (std::size_t j = 0; j < v->generators().size(); ++j) mu.push_back(prog.add_variable());
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<lp::Term> row{{w[static_cast<std::size_t>(i)], 1.0}};
      for (std::size_t j = 0; j < mu.size(); ++j) {
        double g = v->generators()[j](i);
        if (g != 0.0) row.push_back({mu[j], -g});
      }
      prog.add_constraint(row, lp::Relation::equal, 0.0);
    }
    return;
  }
  const ConeH& h = *k.as_h();
  auto add_rows = [&](const std::vector<Vec>& rows, lp::Relation rel) {
    for (const Vec& a : rows) {
      std::vector<lp::Term> row;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (a(i) != 0.0) row.push_back({w[static_cast<std::size_t>(i)], a(i)});
      }
      if (!row.empty()) prog.add_constraint(row, rel, 0.0);
    }
  };
  add_rows(h.ineq_normals(), lp::Relation::less_equal);
  add_rows(h.eq_normals(), lp::Relation::equal);
}

std::vector<int> add_member(lp::Program& prog, const Cone& k) {
  std::vector<int> w;
  for (Eigen::Index i = 0; i < k.dim(); ++i) w.push_back(prog.add_free_variable());
  constrain_member(prog, w, k);
  return w;
}

void constrain_polar(lp::Program& prog, const Mat& t, const std::vector<int>& z, const Cone& k) {
  const Eigen::Index n = k.dim();
  require_dim(t.rows(), n, "polar encoding");
  require_dim(t.cols(), static_cast<Eigen::Index>(z.size()), "polar encoding");
  if (const ConeV* v = k.as_v()) {
    // g . (T z) <= 0 for each generator.
    for (const Vec& g : v->generators()) {
      Vec coef = t.transpose() * g;
      std::vector<lp::Term> row;
      for (Eigen::Index j = 0; j < coef.size(); ++j) {
        if (coef(j) != 0.0) row.push_back({z[static_cast<std::size_t>(j)], coef(j)});
      }
      if (!row.empty()) prog.add_constraint(row, lp::Relation::less_equal, 0.0);
    }
    return;
  }
  // T z = sum mu_i a_i + sum nu_j b_j with mu >= 0.
  const ConeH& h = *k.as_h();
  std::vector<int> mu, nu;
  for (std::size_t i = 0; i < h.ineq_normals().size(); ++i) mu.push_back(prog.add_variable());
  for (std::size_t j = 0; j < h.eq_normals().size(); ++j) nu.push_back(prog.add_free_variable());
  for (Eigen::Index r = 0; r < n; ++r) {
    std::vector<lp::Term> row;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      if (t(r, j) != 0.0) row.push_back({z[static_cast<std::size_t>(j)], t(r, j)});
    }
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double a = h.ineq_normals()[i](r);
      if (a != 0.0) row.push_back({mu[i], -a});
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
      double b = h.eq_normals()[j](r);
      if (b != 0.0) row.push_back({nu[j], -b});
    }
    prog.add_constraint(row, lp::Relation::equal, 0.0);
  }
}

namespace {

void add_box(lp::Program& prog, const std::vector<int>& z) {
  for (int var : z) {
    prog.add_constraint({{var, 1.0}}, lp::Relation::less_equal, 1.0);
    prog.add_constraint({{var, 1.0}}, lp::Relation::greater_equal, -1.0);
  }
}

}  // namespace

std::optional<Vec> find_nonzero(const std::function<std::vector<int>(lp::Program&)>& build,
                                const std::vector<Pin>& pins) {
  std::vector<Pin> order = pins;
  if (order.empty()) {
    lp::Program probe;
    const int n = static_cast<int>(build(probe).size());
    for (int k = 0; k < n; ++k) {
      order.push_back({k, 1.0});
      order.push_back({k, -1.0});
    }
  }
  for (const Pin& pin : order) {
    lp::Program prog;
    std::vector<int> z = build(prog);
    add_box(prog, z);
    prog.add_constraint({{z.at(static_cast<std::size_t>(pin.coord)), 1.0}}, lp::Relation::equal,
                        pin.sign);
    // Among feasible points prefer the one with least l1 norm.
    std::vector<lp::Term> obj;
    for (int var : z) {
      int t = prog.add_variable();
      prog.add_constraint({{t, 1.0}, {var, -1.0}}, lp::Relation::greater_equal, 0.0);
      prog.add_constraint({{t, 1.0}, {var, 1.0}}, lp::Relation::greater_equal, 0.0);
      obj.push_back({t, 1.0});
    }
    prog.minimize(obj);
    lp::Solution sol = lp::solve(prog);
    if (sol.status != lp::Status::optimal) continue;
    Vec out(static_cast<Eigen::Index>(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = sol.x[static_cast<std::size_t>(z[i])];
    }
    return out;
  }
  return std::nullopt;
}

double max_over_box(const std::function<std::vector<int>(lp::Program&)>& build, const Vec& c) {
  lp::Program prog;
  std::vector<int> z = build(prog);
  require_dim(c.size(), static_cast<Eigen::Index>(z.size()), "max_over_box");
  add_box(prog, z);
  std::vector<lp::Term> obj;
  for (std::size_t i = 0; i < z.size(); ++i) obj.push_back({z[i], c(static_cast<Eigen::Index>(i))});
  prog.maximize(obj);
  lp::Solution sol = lp::solve(prog);
  if (sol.status != lp::Status::optimal) {
    // The zero vector is always feasible and the box bounds the objective.
    throw NumericalError("max_over_box: LP did not reach an optimum");
  }
  return sol.objective;
}

}  // namespace cone_lp

bool membership(const Cone& k, const Vec& x, double tol) {
  require_dim(x.size(), k.dim(), "membership");
  if (const ConeH* h = k.as_h()) {
    const double xn = x.norm();
    for (const Vec& a : h->ineq_normals()) {
      if (a.dot(x) > tol * std::max(1.0, a.norm() * xn)) return false;
    }
    for (const Vec& b : h->eq_normals()) {
      if (std::abs(b.dot(x)) > tol * std::max(1.0, b.norm() * xn)) return false;
    }
    return true;
  }
  if (x.isZero(0.0)) return true;
  const ConeV& v = *k.as_v();
  lp::Program prog;
  std::vector<int> mu;
  for (std::size_t j = 0; j < v.generators().size(); ++j) mu.push_back(prog.add_variable());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::vector<lp::Term> row;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      double g = v.generators()[j](i);
      if (g != 0.0) row.push_back({mu[j], g});
    }
    if (row.empty()) {
      if (std::abs(x(i)) > tol) return false;
      continue;
    }
    prog.add_constraint(row, lp::Relation::equal, x(i));
  }
  lp::Options opts;
  opts.tolerance = tol;
  return lp::solve(prog, opts).feasible();
}

Cone polar(const Cone& k) {
  if (const ConeV* v = k.as_v()) return ConeH(v->dim(), v->generators(), {});
  const ConeH& h = *k.as_h();
  std::vector<Vec> gens;
  for (const Vec& a : h.ineq_normals()) gens.push_back(a);
  for (const Vec& b : h.eq_normals()) {
    gens.push_back(b);
    gens.push_back(-b);
  }
  return ConeV(h.dim(), dedup_directions(gens));
}

std::vector<Vec> dedup_directions(const std::vector<Vec>& vs, double zero_tol) {
  std::vector<Vec> out;
  std::vector<Vec> units;
  for (const Vec& v : vs) {
    double nrm = v.norm();
    if (!(nrm > zero_tol)) continue;
    Vec u = v / nrm;
    bool seen = false;
    for (const Vec& w : units) {
      if ((u - w).cwiseAbs().maxCoeff() <= 1e-12) {
        seen = true;
        break;
      }
    }
    if (seen) continue;
    units.push_back(u);
    out.push_back(v);
  }
  return out;
}

ConeV cone_difference(const Cone& k1, const Cone& k2) {
  require_same_dim(k1, k2);
  const ConeV* v1 = k1.as_v();
  const ConeV* v2 = k2.as_v();
  if (!v1 || !v2) {
    throw std::invalid_argument("cone_difference: halfspace-form cones are not supported");
  }
  std::vector<Vec> gens = v1->generators();
  for (const Vec& g : v2->generators()) gens.push_back(-g);
  return ConeV(k1.dim(), dedup_directions(gens));
}

ConeV cone_sum(const ConeV& k1, const ConeV& k2) {
  require_dim(k2.dim(), k1.dim(), "cone_sum");
  std::vector<Vec> gens = k1.generators();
  gens.insert(gens.end(), k2.generators().begin(), k2.generators().end());
  return ConeV(k1.dim(), dedup_directions(gens));
}

std::optional<SeparationCertificate> linear_separation(const Cone& k1, const Cone& k2) {
  require_same_dim(k1, k2);
  const Eigen::Index n = k1.dim();
  auto build = [&](lp::Program& prog) {
    std::vector<int> p;
    for (Eigen::Index i = 0; i < n; ++i) p.push_back(prog.add_free_variable());
    const Mat id = Mat::Identity(n, n);
    cone_lp::constrain_polar(prog, -id, p, k1);  // p . k1 >= 0
    cone_lp::constrain_polar(prog, id, p, k2);   // p . k2 <= 0
    return p;
  };
  std::optional<Vec> p = cone_lp::find_nonzero(build);
  if (!p) return std::nullopt;
  return SeparationCertificate{*p};
}

bool is_transversal(const Cone& k1, const Cone& k2) { return !linear_separation(k1, k2); }

std::optional<Vec> nonzero_common_element(const Cone& k1, const Cone& k2) {
  require_same_dim(k1, k2);
  auto build = [&](lp::Program& prog) {
    std::vector<int> w = cone_lp::add_member(prog, k1);
    cone_lp::constrain_member(prog, w, k2);
    return w;
  };
  return cone_lp::find_nonzero(build);
}

bool is_strongly_transversal(const Cone& k1, const Cone& k2) {
  return is_transversal(k1, k2) && nonzero_common_element(k1, k2).has_value();
}

bool verify_separation(const SeparationCertificate& cert, const Cone& k1, const Cone& k2,
                       double tol) {
  require_same_dim(k1, k2);
  require_dim(cert.p.size(), k1.dim(), "separation certificate");
  if (cert.p.isZero(0.0)) return false;
  // p . k >= 0 on K1  <=>  -p in polar(K1);  p . k <= 0 on K2  <=>  p in polar(K2).
  auto side = [&](const Cone& k, double sign) {
    if (const ConeV* v = k.as_v()) {
      for (const Vec& g : v->generators()) {
        if (sign * cert.p.dot(g) > tol * std::max(1.0, g.norm())) return false;
      }
      return true;
    }
    double worst = cone_lp::max_over_box(
        [&](lp::Program& prog) { return cone_lp::add_member(prog, k); }, sign * cert.p);
    return worst <= tol;
  };
  return side(k1, -1.0) && side(k2, 1.0);
}

bool is_subspace(const Cone& k) {
  if (const ConeV* v = k.as_v()) {
    for (const Vec& g : v->generators()) {
      if (!membership(k, -g)) return false;
    }
    return true;
  }
  for (const Vec& a : k.as_h()->ineq_normals()) {
    double m = cone_lp::max_over_box(
        [&](lp::Program& prog) { return cone_lp::add_member(prog, k); }, -a);
    if (m > kConeTol) return false;
  }
  return true;
}

bool member_of_sum(const Cone& k1, const Cone& k2, const Vec& x, double tol) {
  require_same_dim(k1, k2);
  require_dim(x.size(), k1.dim(), "member_of_sum");
  lp::Program prog;
  std::vector<int> w1 = cone_lp::add_member(prog, k1);
  std::vector<int> w2 = cone_lp::add_member(prog, k2);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto s = static_cast<std::size_t>(i);
    prog.add_constraint({{w1[s], 1.0}, {w2[s], 1.0}}, lp::Relation::equal, x(i));
  }
  lp::Options opts;
  opts.tolerance = tol;
  return lp::solve(prog, opts).feasible();
}

bool member_of_difference(const Cone& k1, const Cone& k2, const Vec& x, double tol) {
  require_same_dim(k1, k2);
  require_dim(x.size(), k1.dim(), "member_of_difference");
  lp::Program prog;
  std::vector<int> w1 = cone_lp::add_member(prog, k1);
  std::vector<int> w2 = cone_lp::add_member(prog, k2);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto s = static_cast<std::size_t>(i);
    prog.add_constraint({{w1[s], 1.0}, {w2[s], -1.0}}, lp::Relation::equal, x(i));
  }
  lp::Options opts;
  opts.tolerance = tol;
  return lp::solve(prog, opts).feasible();
}

bool member_of_intersection(const Cone& k1, const Cone& k2, const Vec& x, double tol) {
  return membership(k1, x, tol) && membership(k2, x, tol);
}

bool member_of_polar_of_sum(const Cone& k1, const Cone& k2, const Vec& p, double tol) {
  require_same_dim(k1, k2);
  require_dim(p.size(), k1.dim(), "member_of_polar_of_sum");
  const Eigen::Index n = k1.dim();
  auto build = [&](lp::Program& prog) {
    std::vector<int> w1 = cone_lp::add_member(prog, k1);
    std::vector<int> w2 = cone_lp::add_member(prog, k2);
    std::vector<int> w;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto s = static_cast<std::size_t>(i);
      int wi = prog.add_free_variable();
      prog.add_constraint({{wi, 1.0}, {w1[s], -1.0}, {w2[s], -1.0}}, lp::Relation::equal, 0.0);
      w.push_back(wi);
    }
    return w;
  };
  return cone_lp::max_over_box(build, p) <= tol * std::max(1.0, p.norm());
}

bool member_of_polar_of_intersection(const Cone& k1, const Cone& k2, const Vec& p, double tol) {
  require_same_dim(k1, k2);
  require_dim(p.size(), k1.dim(), "member_of_polar_of_intersection");
  auto build = [&](lp::Program& prog) {
    std::vector<int> w = cone_lp::add_member(prog, k1);
    cone_lp::constrain_member(prog, w, k2);
    return w;
  };
  return cone_lp::max_over_box(build, p) <= tol * std::max(1.0, p.norm());
}

ConeV to_generators(const Cone& k) {
  if (const ConeV* v = k.as_v()) return *v;
  const ConeH& h = *k.as_h();
  if (!h.ineq_normals().empty()) {
    throw std::invalid_argument(
        "to_generators: cones with inequality rows need vertex enumeration (unsupported)");
  }
  const Eigen::Index n = h.dim();
  if (h.eq_normals().empty()) return ConeV::full_space(n);
  Mat b(static_cast<Eigen::Index>(h.eq_normals().size()), n);
  for (std::size_t j = 0; j < h.eq_normals().size(); ++j) {
    b.row(static_cast<Eigen::Index>(j)) = h.eq_normals()[j].transpose();
  }
  Eigen::FullPivLU<Mat> lu(b);
  lu.setThreshold(1e-10);
  Mat ker = lu.kernel();
  std::vector<Vec> gens;
  if (lu.rank() < n) {
    for (Eigen::Index c = 0; c < ker.cols(); ++c) {
      gens.push_back(ker.col(c));
      gens.push_back(-ker.col(c));
    }
  }
  return ConeV(n, dedup_directions(gens));
}

namespace {

void print_vec(std::ostream& os, const Vec& v) {
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ')';
}

}  // namespace

std::string describe(const Cone& k) {
  std::ostringstream os;
  if (const ConeV* v = k.as_v()) {
    if (v->generators().empty()) {
      os << "{0} in R^" << v->dim();
      return os.str();
    }
    os << "span+{";
    for (std::size_t j = 0; j < v->generators().size(); ++j) {
      if (j) os << ", ";
      print_vec(os, v->generators()[j]);
    }
    os << "}";
    return os.str();
  }
  const ConeH& h = *k.as_h();
  if (h.ineq_normals().empty() && h.eq_normals().empty()) {
    os << "R^" << h.dim();
    return os.str();
  }
  os << "{w in R^" << h.dim() << " :";
  bool first = true;
  for (const Vec& a : h.ineq_normals()) {
    os << (first ? " " : ", ");
    print_vec(os, a);
    os << ".w <= 0";
    first = false;
  }
  for (const Vec& b : h.eq_normals()) {
    os << (first ? " " : ", ");
    print_vec(os, b);
    os << ".w = 0";
    first = false;
  }
  os << "}";
  return os.str();
}

}  // namespace sepcert
