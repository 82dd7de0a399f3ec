#include "sepcert/approx.hpp"

#include "sepcert/cone_lp.hpp"
#include "sepcert/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace sepcert {

namespace {

Mat gradient_rows(const std::vector<const ScalarFn*>& fns, const Vec& y) {
  Mat g(static_cast<Eigen::Index>(fns.size()), y.size());
  for (std::size_t i = 0; i < fns.size(); ++i) {
    Vec gi = fns[i]->gradient(y);
    require_dim(gi.size(), y.size(), "constraint gradient");
    g.row(static_cast<Eigen::Index>(i)) = gi.transpose();
  }
  return g;
}

void require_independent(const Mat& g) {
  if (g.rows() == 0) return;
  if (numerical_rank(g, kRankTol) < g.rows()) {
    throw PreconditionError("constraint gradients are linearly dependent");
  }
}

std::vector<Vec> rows_of(const Mat& g, Eigen::Index from, Eigen::Index count) {
  std::vector<Vec> out;
  for (Eigen::Index i = from; i < from + count; ++i) out.push_back(g.row(i).transpose());
  return out;
}

Vec gaussian_direction(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec d(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) d(i) = nd(rng);
  } while (d.norm() < 1e-12);
  return d / d.norm();
}

// Uniform point of the ball center + B(radius).
Vec ball_point(const Vec& center, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Vec d = gaussian_direction(center.size(), rng);
  double rr = radius * std::pow(ud(rng), 1.0 / static_cast<double>(center.size()));
  return center + rr * d;
}

// Unit directions of C: each generator, then random nonnegative combinations.
std::vector<Vec> cone_directions(const Cone& c, int count, std::mt19937_64& rng) {
  std::vector<Vec> out;
  std::vector<Vec> gens;
  if (const ConeV* v = c.as_v()) {
    gens = v->generators();
  } else if (c.as_h()->ineq_normals().empty()) {
    gens = to_generators(c).generators();
  } else {
    // Rejection sampling on the sphere.
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < 200 * count; ++tries) {
      Vec d = gaussian_direction(c.dim(), rng);
      if (membership(c, d)) out.push_back(d);
    }
    return out;
  }
  if (gens.empty()) return out;
  for (const Vec& g : gens) {
    if (static_cast<int>(out.size()) >= count) break;
    out.push_back(g / g.norm());
  }
  std::exponential_distribution<double> ed(1.0);
  while (static_cast<int>(out.size()) < count) {
    Vec d = Vec::Zero(c.dim());
    for (const Vec& g : gens) d += ed(rng) * g / g.norm();
    if (d.norm() > 1e-12) out.push_back(d / d.norm());
  }
  return out;
}

}  // namespace

std::vector<std::size_t> active_indices(const std::vector<ScalarFn>& ineq_constraints,
                                        const Vec& y) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < ineq_constraints.size(); ++j) {
    double h = ineq_constraints[j].value(y);
    if (!std::isfinite(h) || h > kActiveTol) {
      throw PreconditionError("inequality constraint " + std::to_string(j + 1) +
                              " is violated at the point");
    }
    if (h >= -kActiveTol) active.push_back(j);
  }
  return active;
}

ConeH tangent_level_set_cone(const std::vector<ScalarFn>& constraints, const Vec& y) {
  return active_set_cone(constraints, {}, y);
}

ConeH active_set_cone(const std::vector<ScalarFn>& eq_constraints,
                      const std::vector<ScalarFn>& ineq_constraints, const Vec& y) {
  for (std::size_t i = 0; i < eq_constraints.size(); ++i) {
    double phi = eq_constraints[i].value(y);
    if (!(std::abs(phi) <= kActiveTol)) {
      throw PreconditionError("equality constraint " + std::to_string(i + 1) +
                              " is not satisfied at the point");
    }
  }
  std::vector<std::size_t> active = active_indices(ineq_constraints, y);
  std::vector<const ScalarFn*> fns;
  for (const ScalarFn& f : eq_constraints) fns.push_back(&f);
  for (std::size_t j : active) fns.push_back(&ineq_constraints[j]);
  Mat g = gradient_rows(fns, y);
  require_independent(g);
  const auto neq = static_cast<Eigen::Index>(eq_constraints.size());
  return ConeH(y.size(), rows_of(g, neq, g.rows() - neq), rows_of(g, 0, neq));
}

DiffReport check_directional_diff(const ConicMap& map, const Mat& l, const DiffOptions& options) {
  require_dim(map.base.size(), map.m, "conic map base");
  require_dim(map.cone.dim(), map.m, "conic map cone");
  require_dim(l.rows(), map.n, "linear map rows");
  require_dim(l.cols(), map.m, "linear map cols");

  DiffReport report;
  report.radii = options.radii;
  if (report.radii.empty()) {
    for (int k = 0; k < 12; ++k) report.radii.push_back(map.radius * std::ldexp(1.0, -k));
  }
  for (std::size_t k = 0; k < report.radii.size(); ++k) {
    if (!(report.radii[k] > 0.0) || report.radii[k] > map.radius * (1.0 + 1e-12)) {
      throw std::invalid_argument("check_directional_diff: radii must lie in (0, map radius]");
    }
    if (k > 0 && !(report.radii[k] < report.radii[k - 1])) {
      throw std::invalid_argument("check_directional_diff: radii must be strictly decreasing");
    }
  }

  std::mt19937_64 rng(options.seed);
  std::vector<Vec> dirs = cone_directions(map.cone, options.samples_per_radius, rng);
  if (dirs.empty()) {
    report.worst_ratio.assign(report.radii.size(), 0.0);
    report.pass = true;
    report.note = "cone is {0}: only the increment c = 0 is admissible";
    return report;
  }

  const Vec f0 = map.eval(map.base);
  const std::size_t nr = report.radii.size();
  const std::size_t nd = dirs.size();
  std::vector<double> ratios(nr * nd, 0.0);
  for_each_index(options.policy, nr * nd, [&](std::size_t idx) {
    const double r = report.radii[idx / nd];
    const Vec c = r * dirs[idx % nd];
    Vec err = map.eval(map.base + c) - f0 - l * c;
    if (!err.allFinite()) throw NumericalError("check_directional_diff: non-finite map value");
    ratios[idx] = err.norm() / c.norm();
  });
  for (std::size_t k = 0; k < nr; ++k) {
    report.worst_ratio.push_back(
        *std::max_element(ratios.begin() + static_cast<long>(k * nd),
                          ratios.begin() + static_cast<long>((k + 1) * nd)));
  }

  bool decays = true;
  for (std::size_t k = 0; k + 1 < nr; ++k) {
    double prev = report.worst_ratio[k];
    double next = report.worst_ratio[k + 1];
    if (next <= options.noise_floor) continue;
    double halvings = std::log2(report.radii[k] / report.radii[k + 1]);
    if (next > prev / std::pow(options.decay_per_halving, halvings)) decays = false;
  }
  bool small = report.worst_ratio.back() <= options.threshold;
  report.pass = decays && small;
  if (!decays) report.note = "worst ratio does not decay with the radius";
  else if (!small) report.note = "final worst ratio exceeds the threshold";
  return report;
}

NormalizedChart normalized_chart(const ConicMap& map, const Mat& l) {
  require_dim(l.rows(), map.n, "linear map rows");
  require_dim(l.cols(), map.m, "linear map cols");
  ConeV c_gens = to_generators(map.cone);
  std::vector<Vec> k_gens;
  for (const Vec& g : c_gens.generators()) k_gens.push_back(l * g);
  ConeV k(map.n, dedup_directions(k_gens));

  Mat m = pseudo_inverse(l);
  std::ostringstream note;
  for (const Vec& g : k.generators()) {
    double res = (l * (m * g) - g).norm();
    if (res > 1e-8) {
      throw NumericalError("normalized_chart: right-inverse residual too large");
    }
    if (!membership(map.cone, m * g, 1e-9)) {
      note << "M maps a generator of L C outside C; ";
    }
  }
  NormalizedChart out{ConicMap{}, m, note.str()};
  out.chart.m = map.n;
  out.chart.n = map.n;
  out.chart.base = Vec::Zero(map.n);
  out.chart.cone = k;
  double mn = operator_norm(m);
  out.chart.radius = mn > 0.0 ? map.radius / mn : map.radius;
  const Vec base = map.base;
  const VecFn f = map.eval;
  out.chart.eval = [f, base, m](const Vec& kk) { return f(base + m * kk); };
  return out;
}

CoveringReport near_identity_covering(const VecFn& phi, const Vec& center, double big_r,
                                      double rho, const CoveringOptions& options) {
  if (!(rho > 0.0) || !(big_r > rho)) {
    throw PreconditionError("near_identity_covering: requires R > rho > 0");
  }
  std::mt19937_64 rng(options.seed);
  const int count = std::max(options.target_samples, 1);

  // Closeness |phi(x) - x| <= rho on sampled points of center + B(R), including
  // boundary points along the axes.
  std::vector<Vec> probes{center};
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    probes.push_back(center + big_r * unit_vec(center.size(), i));
    probes.push_back(center - big_r * unit_vec(center.size(), i));
  }
  for (int i = 0; i < count; ++i) probes.push_back(ball_point(center, big_r, rng));
  std::vector<double> gaps(probes.size());
  for_each_index(options.policy, probes.size(), [&](std::size_t i) {
    gaps[i] = (phi(probes[i]) - probes[i]).norm();
  });
  CoveringReport report;
  report.closeness = *std::max_element(gaps.begin(), gaps.end());
  if (!(report.closeness <= rho)) {
    throw PreconditionError("near_identity_covering: map is not rho-close to the identity");
  }

  std::vector<Vec> targets;
  for (int i = 0; i < count; ++i) targets.push_back(ball_point(center, big_r - rho, rng));
  std::vector<int> used(targets.size(), -1);
  for_each_index(options.policy, targets.size(), [&](std::size_t i) {
    const Vec& y = targets[i];
    Vec x = y;
    for (int it = 1; it <= options.max_iterations; ++it) {
      Vec px = phi(x);
      if ((px - y).norm() <= options.attain_tol) {
        used[i] = it;
        return;
      }
      x = x - px + y;
      if ((x - center).norm() > big_r * (1.0 + 1e-12) || !x.allFinite()) return;
    }
  });
  report.sampled_targets = count;
  for (int u : used) {
    if (u > 0) {
      ++report.attained;
      report.max_iterations_used = std::max(report.max_iterations_used, u);
    }
  }
  report.coverage = static_cast<double>(report.attained) / count;
  report.note = "targets sampled in center + B(R - rho) only";
  return report;
}

std::optional<Vec> preimage_in_cone(const Mat& l, const Cone& c, const Vec& y) {
  require_dim(l.cols(), c.dim(), "preimage_in_cone");
  require_dim(y.size(), l.rows(), "preimage_in_cone");
  lp::Program prog;
  std::vector<int> w = cone_lp::add_member(prog, c);
  for (Eigen::Index r = 0; r < l.rows(); ++r) {
    std::vector<lp::Term> row;
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
      if (l(r, j) != 0.0) row.push_back({w[static_cast<std::size_t>(j)], l(r, j)});
    }
    if (row.empty()) {
      if (std::abs(y(r)) > kConeTol) return std::nullopt;
      continue;
    }
    prog.add_constraint(row, lp::Relation::equal, y(r));
  }
  std::vector<lp::Term> obj;
  for (int var : w) {
    int t = prog.add_variable();
    prog.add_constraint({{t, 1.0}, {var, -1.0}}, lp::Relation::greater_equal, 0.0);
    prog.add_constraint({{t, 1.0}, {var, 1.0}}, lp::Relation::greater_equal, 0.0);
    obj.push_back({t, 1.0});
  }
  prog.minimize(obj);
  lp::Solution sol = lp::solve(prog);
  if (sol.status != lp::Status::optimal) return std::nullopt;
  Vec out(c.dim());
  for (std::size_t i = 0; i < w.size(); ++i) out(static_cast<Eigen::Index>(i)) = sol.x[static_cast<std::size_t>(w[i])];
  return out;
}

namespace {

bool in_image(const Mat& l, const Cone& c, const Vec& y) {
  return preimage_in_cone(l, c, y).has_value();
}

// Orthonormal basis of the orthogonal complement of v by Gram-Schmidt on the
// canonical vectors.
std::vector<Vec> complement_basis(const Vec& v) {
  const Eigen::Index n = v.size();
  std::vector<Vec> basis{v / v.norm()};
  for (Eigen::Index k = 0; k < n && static_cast<Eigen::Index>(basis.size()) < n; ++k) {
    Vec e = unit_vec(n, k);
    for (const Vec& b : basis) e -= e.dot(b) * b;
    if (e.norm() > 1e-8) basis.push_back(e / e.norm());
  }
  basis.erase(basis.begin());
  return basis;
}

}  // namespace

OpenMappingWitness open_mapping_witness(const ConicMap& map, const Mat& l, const Vec& v,
                                        const OpenMapOptions& options) {
  require_dim(v.size(), map.n, "open_mapping_witness direction");
  const Eigen::Index n = map.n;

  for (Eigen::Index i = -1; i < n; ++i) {
    for (double sgn : {1.0, -1.0}) {
      Vec probe = i < 0 ? v : Vec(v + sgn * options.interior_eps * unit_vec(n, i));
      if (!in_image(l, map.cone, probe)) {
        throw PreconditionError("open_mapping_witness: v is not interior to L C");
      }
      if (i < 0) break;
    }
  }
  DiffOptions dopt;
  dopt.seed = options.seed;
  dopt.policy = options.policy;
  DiffReport diff = check_directional_diff(map, l, dopt);
  if (!diff.pass) {
    throw PreconditionError("open_mapping_witness: L is not a directional differential (" +
                            diff.note + ")");
  }

  OpenMappingWitness w;
  w.full_space = v.norm() == 0.0;
  std::vector<Vec> dirs;  // z_i, or e_i when v = 0
  if (w.full_space) {
    for (Eigen::Index i = 0; i < n; ++i) dirs.push_back(unit_vec(n, i));
  } else {
    dirs = complement_basis(v);
    Vec zn = Vec::Zero(n);
    for (const Vec& z : dirs) zn -= z;
    dirs.push_back(zn);
  }
  auto basis_at = [&](double r) {
    std::vector<Vec> b;
    for (const Vec& z : dirs) b.push_back(w.full_space ? Vec(r * z) : Vec(v + r * z));
    return b;
  };

  // Largest r = 2^-k with every basis vector in L C.
  double r = 1.0;
  std::vector<Vec> pre;
  for (int k = 0;; ++k) {
    if (k > 60) throw NumericalError("open_mapping_witness: no admissible basis scale");
    std::vector<Vec> b = basis_at(r);
    pre.clear();
    for (const Vec& bi : b) {
      auto c = preimage_in_cone(l, map.cone, bi);
      if (!c) break;
      pre.push_back(*c);
    }
    if (pre.size() == b.size()) {
      w.basis_vectors = b;
      break;
    }
    r *= 0.5;
  }
  w.alpha = r;

  Mat vb(n, n), cb(map.m, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vb.col(i) = w.basis_vectors[static_cast<std::size_t>(i)];
    cb.col(i) = pre[static_cast<std::size_t>(i)];
  }
  Eigen::FullPivLU<Mat> lu(vb);
  if (!lu.isInvertible()) throw NumericalError("open_mapping_witness: basis is singular");
  Mat vinv = lu.inverse();
  w.pseudo_inverse = cb * vinv;

  if (w.full_space) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec col = w.pseudo_inverse.col(i);
      if (!membership(map.cone, col) || !membership(map.cone, Vec(-col))) {
        throw PreconditionError(
            "open_mapping_witness: v = 0 needs C to contain the range of the right inverse");
      }
    }
    w.beta = w.alpha;
  } else {
    // v = (1/n) sum v_i, so its coordinates in the basis are all 1/n; the
    // distance to facet i of the simplicial cone is (1/n) / |row_i(V^-1)|.
    double beta = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      beta = std::min(beta, (1.0 / static_cast<double>(n)) / vinv.row(i).norm());
    }
    w.beta = beta;
  }

  const double lam_norm = operator_norm(w.pseudo_inverse);
  const double vnorm = v.norm();
  w.s_star = map.radius / (lam_norm * (vnorm + w.beta));

  const Vec f0 = map.eval(map.base);
  const Mat lam = w.pseudo_inverse;
  auto phi_s = [&](double s, const Vec& y) -> Vec {
    return (map.eval(map.base + lam * (s * y)) - f0) / s;
  };

  std::mt19937_64 rng(options.seed);
  std::vector<Vec> probes{v};
  for (Eigen::Index i = 0; i < n; ++i) {
    probes.push_back(v + w.beta * unit_vec(n, i));
    probes.push_back(v - w.beta * unit_vec(n, i));
  }
  if (!w.full_space) probes.push_back(v + w.beta * v / vnorm);
  for (int i = 0; i < options.closeness_samples; ++i) probes.push_back(ball_point(v, w.beta, rng));

  double s = w.s_star;
  std::vector<double> gaps(probes.size());
  for (;;) {
    if (s < options.min_s) {
      throw NumericalError("open_mapping_witness: no s in [min_s, s*] makes Phi_s beta/2-close");
    }
    for_each_index(options.policy, probes.size(), [&](std::size_t i) {
      gaps[i] = (phi_s(s, probes[i]) - probes[i]).norm();
    });
    if (*std::max_element(gaps.begin(), gaps.end()) <= w.beta / 2.0) break;
    s *= 0.5;
  }
  w.s_bar = s;

  // Gamma: cone over v + B(beta/2); generators from sampled boundary points.
  if (w.full_space) {
    w.gamma = ConeV::full_space(n);
    w.r_bar = w.s_bar * w.beta / 2.0;
  } else {
    std::vector<Vec> gens;
    for (Eigen::Index i = 0; i < n; ++i) {
      gens.push_back(v + 0.5 * w.beta * unit_vec(n, i));
      gens.push_back(v - 0.5 * w.beta * unit_vec(n, i));
    }
    for (int i = 0; i < options.gamma_random_directions; ++i) {
      gens.push_back(v + 0.5 * w.beta * gaussian_direction(n, rng));
    }
    w.gamma = ConeV(n, dedup_directions(gens));
    w.r_bar = w.s_bar * (vnorm - w.beta / 2.0);
  }

  // Targets z = s y in Gamma ∩ B(r_bar) with y in v + B(beta/2), s <= s_bar.
  struct Target {
    double s;
    Vec y;
  };
  std::vector<Target> targets;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  while (static_cast<int>(targets.size()) < options.targets) {
    Vec y = ball_point(v, w.beta / 2.0, rng);
    double sy = w.full_space ? w.s_bar : w.s_bar * (1.0 - ud(rng));
    if (sy <= 0.0 || (sy * y).norm() > w.r_bar) continue;
    targets.push_back({sy, y});
  }
  std::vector<char> ok(targets.size(), 0);
  for_each_index(options.policy, targets.size(), [&](std::size_t i) {
    const Target& t = targets[i];
    Vec yt = t.y;
    for (int it = 0; it < options.max_iterations; ++it) {
      Vec py = phi_s(t.s, yt);
      if (!py.allFinite()) return;
      if ((py - t.y).norm() <= options.attain_tol) {
        Vec c = lam * (t.s * yt);
        if (membership(map.cone, c) && c.norm() <= map.radius * (1.0 + 1e-12)) ok[i] = 1;
        return;
      }
      yt = yt - py + t.y;
    }
  });
  w.targets = static_cast<int>(targets.size());
  w.attained = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
  w.coverage_fraction = w.targets ? static_cast<double>(w.attained) / w.targets : 1.0;
  return w;
}

}  // namespace sepcert
