#include "doctest.h"

#include "sepcert/approx.hpp"

#include <cmath>

using namespace sepcert;

namespace {

ScalarFn circle() {
  return {[](const Vec& x) { return x.squaredNorm() - 1.0; },
          [](const Vec& x) { return Vec(2.0 * x); }};
}

ScalarFn linear(const Vec& a, double shift = 0.0) {
  return {[a, shift](const Vec& x) { return a.dot(x) + shift; }, [a](const Vec&) { return a; }};
}

ConicMap quadrant_map(VecFn f) {
  ConicMap m;
  m.m = 2;
  m.n = 2;
  m.base = Vec::Zero(2);
  m.cone = ConeV(2, {make_vec({1, 0}), make_vec({0, 1})});
  m.radius = 1.0;
  m.eval = std::move(f);
  return m;
}

}  // namespace

TEST_CASE("tangent_level_set_cone examples") {
  ConeH k = tangent_level_set_cone({circle()}, make_vec({1, 0}));
  REQUIRE(k.eq_normals().size() == 1);
  CHECK(k.eq_normals()[0].isApprox(make_vec({2, 0})));
  CHECK(k.ineq_normals().empty());
  // The kernel basis (0, +-1) is in the cone; (1, 0) is not.
  CHECK(membership(k, make_vec({0, 1})));
  CHECK(membership(k, make_vec({0, -1})));
  CHECK_FALSE(membership(k, make_vec({1, 0})));

  Vec a = make_vec({1, 2, -1});
  ConeH lin = tangent_level_set_cone({linear(a)}, Vec::Zero(3));
  CHECK(membership(lin, make_vec({2, -1, 0})));
  CHECK(membership(lin, make_vec({1, 0, 1})));

  Vec e1 = make_vec({1, 0});
  CHECK_THROWS_AS(tangent_level_set_cone({linear(e1), linear(e1)}, Vec::Zero(2)),
                  PreconditionError);
  CHECK_THROWS_AS(tangent_level_set_cone({circle()}, make_vec({0.5, 0})), PreconditionError);
}

TEST_CASE("active_set_cone examples") {
  ScalarFn h = linear(make_vec({-1, -1}), 1.0);  // 1 - x - y
  ConeH k = active_set_cone({}, {h}, make_vec({0.5, 0.5}));
  REQUIRE(k.ineq_normals().size() == 1);
  CHECK(k.ineq_normals()[0].isApprox(make_vec({-1, -1})));

  ScalarFn inactive = linear(make_vec({1}), -5.0);  // x - 5
  ConeH full = active_set_cone({}, {inactive}, make_vec({0}));
  CHECK(full.ineq_normals().empty());
  CHECK(full.eq_normals().empty());

  ConeH mixed = active_set_cone({linear(make_vec({1, 0}))}, {linear(make_vec({0, -1}))},
                                Vec::Zero(2));
  CHECK(mixed.eq_normals()[0].isApprox(make_vec({1, 0})));
  CHECK(mixed.ineq_normals()[0].isApprox(make_vec({0, -1})));

  CHECK_THROWS_AS(active_set_cone({}, {linear(make_vec({1}), 1.0)}, make_vec({0})),
                  PreconditionError);
}

TEST_CASE("check_directional_diff: identity, quadratic and square-root maps") {
  Mat id = Mat::Identity(2, 2);
  DiffReport exact = check_directional_diff(quadrant_map([](const Vec& c) { return c; }), id);
  CHECK(exact.pass);
  for (double r : exact.worst_ratio) CHECK(r == 0.0);

  // Oracle: for F(c) = c + |c|^2 e1, |F(c) - c| / |c| = |c| exactly.
  DiffReport quad = check_directional_diff(
      quadrant_map([](const Vec& c) { return Vec(c + c.squaredNorm() * unit_vec(2, 0)); }), id);
  CHECK(quad.pass);
  for (std::size_t k = 0; k < quad.radii.size(); ++k) {
    CHECK(quad.worst_ratio[k] == doctest::Approx(quad.radii[k]).epsilon(1e-9));
  }

  DiffReport root = check_directional_diff(
      quadrant_map([](const Vec& c) { return Vec(c + std::sqrt(c.norm()) * unit_vec(2, 0)); }),
      id);
  CHECK_FALSE(root.pass);
  CHECK(root.worst_ratio.back() > root.worst_ratio.front());

  ConicMap zero = quadrant_map([](const Vec& c) { return c; });
  zero.cone = ConeV::zero(2);
  DiffReport trivial = check_directional_diff(zero, id);
  CHECK(trivial.pass);
  CHECK_FALSE(trivial.note.empty());
}

TEST_CASE("check_directional_diff parallel kernel matches serial reference") {
  ConicMap map = quadrant_map([](const Vec& c) { return Vec(c + c.squaredNorm() * unit_vec(2, 0)); });
  DiffOptions serial, parallel;
  parallel.policy = ExecPolicy::parallel;
  auto a = check_directional_diff(map, Mat::Identity(2, 2), serial);
  auto b = check_directional_diff(map, Mat::Identity(2, 2), parallel);
  CHECK(a.worst_ratio == b.worst_ratio);
}

TEST_CASE("normalized_chart examples") {
  ConicMap id_map = quadrant_map([](const Vec& c) { return Vec(c + c.squaredNorm() * unit_vec(2, 0)); });
  NormalizedChart same = normalized_chart(id_map, Mat::Identity(2, 2));
  CHECK(same.right_inverse.isApprox(Mat::Identity(2, 2)));
  Vec k = make_vec({0.3, 0.1});
  CHECK(same.chart.eval(k).isApprox(id_map.eval(k)));
  CHECK(check_directional_diff(same.chart, Mat::Identity(2, 2)).pass);

  // m = n = 1, F(c) = 2c + c^2, L = 2  ->  G(k) = k + k^2 / 4.
  ConicMap one;
  one.m = one.n = 1;
  one.base = Vec::Zero(1);
  one.cone = ConeV(1, {make_vec({1})});
  one.radius = 1.0;
  one.eval = [](const Vec& c) { return Vec(2.0 * c + c.cwiseProduct(c)); };
  Mat l(1, 1);
  l << 2.0;
  NormalizedChart g = normalized_chart(one, l);
  CHECK(g.right_inverse(0, 0) == doctest::Approx(0.5));
  for (double kk : {0.0, 0.1, 0.7, 1.5}) {
    CHECK(g.chart.eval(make_vec({kk}))(0) == doctest::Approx(kk + kk * kk / 4.0));
  }
  CHECK(check_directional_diff(g.chart, Mat::Identity(1, 1)).pass);

  // m = 2, n = 1, L = (1, 1): least-squares right inverse (1/2, 1/2).
  ConicMap two = quadrant_map([](const Vec& c) { return make_vec({c.sum()}); });
  two.n = 1;
  Mat row(1, 2);
  row << 1.0, 1.0;
  NormalizedChart h = normalized_chart(two, row);
  CHECK(h.right_inverse(0, 0) == doctest::Approx(0.5));
  CHECK(h.right_inverse(1, 0) == doctest::Approx(0.5));
  CHECK((row * h.right_inverse)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("near_identity_covering") {
  CoveringReport ident = near_identity_covering([](const Vec& x) { return x; }, Vec::Zero(2), 1.0, 0.1);
  CHECK(ident.coverage == 1.0);
  CHECK(ident.max_iterations_used == 1);

  VecFn wobble = [](const Vec& x) {
    return Vec(x + 0.05 * make_vec({std::sin(x(0)), std::cos(x(1))}));
  };
  CoveringReport w = near_identity_covering(wobble, Vec::Zero(2), 1.0, 0.1);
  CHECK(w.coverage == 1.0);
  CHECK(w.closeness <= 0.1);
  CHECK_FALSE(w.note.empty());

  CoveringOptions par;
  par.policy = ExecPolicy::parallel;
  CoveringReport wp = near_identity_covering(wobble, Vec::Zero(2), 1.0, 0.1, par);
  CHECK(wp.attained == w.attained);
  CHECK(wp.max_iterations_used == w.max_iterations_used);

  CHECK_THROWS_AS(near_identity_covering(wobble, Vec::Zero(2), 0.1, 0.1), PreconditionError);
  VecFn far = [](const Vec& x) { return Vec(x + make_vec({0.5, 0})); };
  CHECK_THROWS_AS(near_identity_covering(far, Vec::Zero(2), 1.0, 0.1), PreconditionError);
}

TEST_CASE("open_mapping_witness: quadratic map on the quadrant") {
  ConicMap map = quadrant_map([](const Vec& c) { return Vec(c + c.squaredNorm() * unit_vec(2, 0)); });
  Vec v = make_vec({1, 1}) / std::sqrt(2.0);
  OpenMappingWitness w = open_mapping_witness(map, Mat::Identity(2, 2), v);
  CHECK((Mat::Identity(2, 2) * w.pseudo_inverse - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-9);
  Vec mean = Vec::Zero(2);
  for (const Vec& b : w.basis_vectors) mean += b;
  mean /= 2.0;
  CHECK((mean - v).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(w.beta > 0.0);
  CHECK(w.s_bar <= w.s_star);
  CHECK(w.r_bar > 0.0);
  CHECK(membership(w.gamma, v));
  CHECK(w.targets == 200);
  CHECK(w.coverage_fraction >= 0.99);

  OpenMapOptions par;
  par.policy = ExecPolicy::parallel;
  OpenMappingWitness wp = open_mapping_witness(map, Mat::Identity(2, 2), v, par);
  CHECK(wp.attained == w.attained);
  CHECK(wp.s_bar == w.s_bar);
}

TEST_CASE("open_mapping_witness: linear map, classical case, and bad directions") {
  Mat l(2, 2);
  l << 2.0, 1.0, 0.0, 1.0;
  ConicMap lin = quadrant_map([l](const Vec& c) { return Vec(l * c); });
  OpenMappingWitness w = open_mapping_witness(lin, l, make_vec({1.5, 0.5}));
  CHECK(w.coverage_fraction == 1.0);

  ConicMap whole = lin;
  whole.cone = ConeH::full_space(2);
  OpenMappingWitness classical = open_mapping_witness(whole, l, Vec::Zero(2));
  CHECK(classical.full_space);
  CHECK(is_subspace(classical.gamma));
  CHECK(membership(classical.gamma, make_vec({-1, 3})));
  CHECK(classical.coverage_fraction == 1.0);

  // (0, 1) lies on the boundary of L C = span+{(2,0), (1,1)}.
  CHECK_THROWS_AS(open_mapping_witness(lin, l, make_vec({1, 0})), PreconditionError);

  ConicMap rough = quadrant_map([](const Vec& c) { return Vec(c + std::sqrt(c.norm()) * unit_vec(2, 0)); });
  CHECK_THROWS_AS(open_mapping_witness(rough, Mat::Identity(2, 2), make_vec({1, 1})),
                  PreconditionError);
}
