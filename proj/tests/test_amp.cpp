#include "doctest.h"

#include "sepcert/amp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace sepcert;

namespace {

AbstractProblem problem(Cone r, Cone s, Vec g) { return AbstractProblem{std::move(r), std::move(s), std::move(g)}; }

ScalarFn circle() {
  return {[](const Vec& x) { return x.squaredNorm() - 1.0; },
          [](const Vec& x) { return Vec(2.0 * x); }};
}

}  // namespace

TEST_CASE("augment examples") {
  AugmentedCones a = augment(problem(ConeV::full_space(2), ConeV::zero(2), make_vec({5, -1})));
  REQUIRE(a.profitable.as_v());
  REQUIRE(a.profitable.as_v()->generators().size() == 1);
  CHECK(a.profitable.as_v()->generators()[0].isApprox(make_vec({0, 0, -1})));

  AugmentedCones b =
      augment(problem(ConeV(2, {make_vec({1, 0})}), ConeV::zero(2), make_vec({3, 0})));
  REQUIRE(b.augmented_reachable.as_v()->generators().size() == 1);
  CHECK(b.augmented_reachable.as_v()->generators()[0].isApprox(make_vec({1, 0, 3})));

  AugmentedCones c = augment(problem(ConeV::zero(2), ConeH::full_space(2), make_vec({1, 1})));
  CHECK(membership(c.profitable, make_vec({-4, 7, -1})));
  CHECK(membership(c.profitable, make_vec({4, -7, 0})));
  CHECK_FALSE(membership(c.profitable, make_vec({0, 0, 1})));
}

TEST_CASE("solve_amp examples") {
  // R = R^n, S = {0}: lambda + lambda_c grad = 0.
  Vec g = make_vec({0.5, -0.25});
  auto m = solve_amp(problem(ConeV::full_space(2), ConeV::zero(2), g));
  REQUIRE(m);
  CHECK(m->lambda_c == doctest::Approx(-1.0));
  CHECK(m->lambda.isApprox(g));

  Vec big = make_vec({3, 0});
  auto mb = solve_amp(problem(ConeV::full_space(2), ConeV::zero(2), big));
  REQUIRE(mb);
  CHECK(mb->lambda(0) == doctest::Approx(1.0));
  CHECK(mb->lambda_c == doctest::Approx(-1.0 / 3.0));
  CHECK(mb->unit_cost_view().lambda.isApprox(big));

  // Fermat: R = S = R^n -> feasible iff grad = 0.
  auto f0 = solve_amp(problem(ConeV::full_space(2), ConeH::full_space(2), Vec::Zero(2)));
  REQUIRE(f0);
  CHECK(f0->lambda.isZero());
  CHECK(f0->lambda_c == -1.0);
  CHECK_FALSE(solve_amp(problem(ConeV::full_space(2), ConeH::full_space(2), make_vec({1e-3, 0}))));

  // R = span+{(1,0)}, S = {0}, grad = (1,0): ((-1,0), 0) satisfies the conditions.
  AbstractProblem p3 = problem(ConeV(2, {make_vec({1, 0})}), ConeV::zero(2), make_vec({1, 0}));
  Multipliers abn{make_vec({-1, 0}), 0.0};
  CHECK(check_amp(p3, abn).ok());
  auto m3 = solve_amp(p3);
  REQUIRE(m3);
  CHECK(check_amp(p3, *m3).ok());

  CHECK_THROWS_AS(solve_amp(problem(ConeV::full_space(2), ConeV::zero(3), g)), DimensionError);
}

TEST_CASE("degenerate reachable cone gives (0, -1)") {
  auto m = solve_amp(problem(ConeV::zero(3), ConeV::zero(3), make_vec({1, 2, 3})));
  REQUIRE(m);
  CHECK(m->lambda == Vec::Zero(3));
  CHECK(m->lambda_c == -1.0);
}

TEST_CASE("classify_normality examples") {
  CHECK(classify_normality(problem(ConeV::full_space(2), ConeH::full_space(2), Vec::Zero(2))) ==
        Normality::normal);
  CHECK(classify_normality(problem(ConeV(2, {make_vec({1, 0})}), ConeV::zero(2),
                                   make_vec({1, 0}))) == Normality::abnormal);
  CHECK(classify_normality(problem(ConeV::full_space(2), ConeV::zero(2), make_vec({1, 1}))) ==
        Normality::normal);
  CHECK_THROWS_AS(classify_normality(problem(ConeV::full_space(1), ConeH::full_space(1), make_vec({1}))),
                  PreconditionError);
  CHECK(to_string(Normality::undetermined) == "undetermined");
}

TEST_CASE("ConeH targets use the Farkas parametrization") {
  // S = {w : w1 <= 0}, so lambda in -polar(S) means lambda = (-a, 0) with a >= 0.
  ConeH s(2, {make_vec({1, 0})});
  AbstractProblem p = problem(ConeV::full_space(2), s, make_vec({-2, 0}));
  auto m = solve_amp(p);
  REQUIRE(m);
  CHECK(check_amp(p, *m).ok());
  CHECK(m->lambda(0) <= 0.0);
  // A gradient pointing the other way admits no multiplier: lambda = lambda_c grad
  // would need lambda_1 = -lambda_c * 2 > 0, contradicting lambda in -polar(S).
  CHECK_FALSE(solve_amp(problem(ConeV::full_space(2), s, make_vec({2, 0}))));
}

TEST_CASE("property: AMP solver agrees with separation of the augmented cones") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coord(-2, 2);
  int found = 0;
  for (int trial = 0; trial < 80; ++trial) {
    Eigen::Index n = 1 + trial % 3;
    auto random_cone = [&](int max_gens) {
      std::vector<Vec> gens;
      int k = static_cast<int>(rng() % static_cast<unsigned>(max_gens + 1));
      for (int j = 0; j < k; ++j) {
        Vec g(n);
        for (Eigen::Index i = 0; i < n; ++i) g(i) = coord(rng);
        if (!g.isZero(0.0)) gens.push_back(g);
      }
      return ConeV(n, gens);
    };
    Vec grad(n);
    for (Eigen::Index i = 0; i < n; ++i) grad(i) = coord(rng);
    AbstractProblem p = problem(random_cone(4), random_cone(3), grad);
    auto m = solve_amp(p);
    AugmentedCones aug = augment(p);
    auto sep = linear_separation(aug.profitable, aug.augmented_reachable);
    CHECK(m.has_value() == sep.has_value());
    if (m) {
      ++found;
      CHECK(check_amp(p, *m).ok());
      CHECK(std::max(m->lambda.cwiseAbs().maxCoeff(), std::abs(m->lambda_c)) == doctest::Approx(1.0));
      // Positive scaling keeps the conditions.
      Multipliers scaled{m->lambda * 3.5, m->lambda_c * 3.5, false};
      CHECK(check_amp(p, scaled).ok());
    }
    if (sep) {
      Vec z = sep->p;
      Multipliers from_sep{z.head(n), z(n), false};
      CHECK(check_amp(p, from_sep).ok());
    }
  }
  CHECK(found > 10);
}

TEST_CASE("fermat_check") {
  CHECK(fermat_check(Vec::Zero(2), 1e-8));
  CHECK_FALSE(fermat_check(make_vec({1e-3, 0}), 1e-8));
  Vec x = Vec::Zero(3);
  CHECK(fermat_check(Vec(2.0 * x), 1e-8));  // grad |x|^2 at 0
}

TEST_CASE("lagrange_multipliers on the circle, with a grid-search oracle") {
  // Oracle: locate the minimizer of x + y on the unit circle by sampling.
  const int samples = 10000;
  double best = std::numeric_limits<double>::infinity();
  Vec arg(2);
  for (int i = 0; i < samples; ++i) {
    double th = 2.0 * std::numbers::pi * i / samples;
    Vec p = make_vec({std::cos(th), std::sin(th)});
    if (p.sum() < best) {
      best = p.sum();
      arg = p;
    }
  }
  const Vec x_star = make_vec({-1, -1}) / std::sqrt(2.0);
  CHECK((arg - x_star).norm() <= 1e-3);

  LagrangeResult r = lagrange_multipliers({circle()}, make_vec({1, 1}), x_star);
  CHECK(r.alphas(0) == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-10));
  CHECK(r.lambda_c == -1.0);
  CHECK(r.residual <= 1e-8);
  CHECK(r.certified);

  // The maximizer is stationary too: only necessary conditions are certified.
  LagrangeResult mx = lagrange_multipliers({circle()}, make_vec({1, 1}), -x_star);
  CHECK(mx.certified);
  CHECK(mx.alphas(0) == doctest::Approx(std::sqrt(2.0) / 2.0));

  // minimize x s.t. x = 0
  ScalarFn ident{[](const Vec& x) { return x(0); }, [](const Vec&) { return make_vec({1}); }};
  LagrangeResult one = lagrange_multipliers({ident}, make_vec({1}), make_vec({0}));
  CHECK(one.alphas(0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(lagrange_multipliers({ident, ident}, make_vec({1}), make_vec({0})),
                  PreconditionError);
}

TEST_CASE("kkt_multipliers on the half-plane, with a grid-search oracle") {
  ScalarFn h{[](const Vec& x) { return 1.0 - x(0) - x(1); },
             [](const Vec&) { return make_vec({-1, -1}); }};
  // Oracle: minimize x^2 + y^2 over a feasible grid.
  double best = std::numeric_limits<double>::infinity();
  Vec arg(2);
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      Vec p = make_vec({-1.0 + 3.0 * i / 400.0, -1.0 + 3.0 * j / 400.0});
      if (h.value(p) > 0.0) continue;
      if (p.squaredNorm() < best) {
        best = p.squaredNorm();
        arg = p;
      }
    }
  }
  const Vec x_star = make_vec({0.5, 0.5});
  CHECK((arg - x_star).norm() <= 1e-2);

  KktResult r = kkt_multipliers({}, {h}, Vec(2.0 * x_star), x_star);
  CHECK(r.betas(0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(r.betas(0) <= 0.0);
  CHECK(r.residual <= 1e-8);
  CHECK(r.certified);

  ScalarFn inactive{[](const Vec& x) { return x(0) - 5.0; }, [](const Vec&) { return make_vec({1, 0}); }};
  KktResult in = kkt_multipliers({}, {inactive}, Vec::Zero(2), Vec::Zero(2));
  CHECK(in.betas(0) == 0.0);
  CHECK_FALSE(in.active[0]);

  // (1, 0) is feasible and active but not stationary.
  KktResult bad = kkt_multipliers({}, {h}, make_vec({2, 0}), make_vec({1, 0}));
  CHECK(bad.residual > 0.1);
  CHECK_FALSE(bad.certified);

  CHECK_THROWS_AS(kkt_multipliers({}, {h}, Vec::Zero(2), Vec::Zero(2)), PreconditionError);
}

TEST_CASE("bounded_least_squares keeps the sign constraint") {
  Mat a = Mat::Identity(2, 2);
  Vec x = bounded_least_squares(a, make_vec({-1, 2}), 0);
  CHECK(x(0) == 0.0);
  CHECK(x(1) == doctest::Approx(2.0));
  Vec y = bounded_least_squares(a, make_vec({-1, 2}), 1);
  CHECK(y(0) == doctest::Approx(-1.0));
}
