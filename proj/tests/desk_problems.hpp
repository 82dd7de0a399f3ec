#pragma once

#include "sepcert/ocp.hpp"

#include <cmath>

namespace desk {

using sepcert::ControlProblem;
using sepcert::Mat;
using sepcert::Vec;
using sepcert::make_vec;

// x1' = x2, x2' = u on [0, 1] from rest, cost -x1(1), u in {-1, 1}.
inline ControlProblem double_integrator() {
  ControlProblem p;
  p.n = 2;
  p.m = 1;
  p.a = 0.0;
  p.b = 1.0;
  p.x0 = Vec::Zero(2);
  p.dynamics.f = [](double, const Vec& x, const Vec& u) { return make_vec({x(1), u(0)}); };
  p.dynamics.jac_x = [](double, const Vec&, const Vec&) {
    Mat j = Mat::Zero(2, 2);
    j(0, 1) = 1.0;
    return j;
  };
  p.terminal_cost = {[](const Vec& x) { return -x(0); },
                     [](const Vec&) { return make_vec({-1.0, 0.0}); }};
  p.control_samples = {make_vec({-1.0}), make_vec({1.0})};
  return p;
}

// x' = x on [0, 1], x(0) = 1; the control is ignored.
inline ControlProblem exponential_growth() {
  ControlProblem p;
  p.n = 1;
  p.m = 1;
  p.a = 0.0;
  p.b = 1.0;
  p.x0 = make_vec({1.0});
  p.dynamics.f = [](double, const Vec& x, const Vec&) { return x; };
  p.dynamics.jac_x = [](double, const Vec&, const Vec&) { return Mat::Identity(1, 1); };
  p.terminal_cost = {[](const Vec& x) { return x(0); }, [](const Vec&) { return make_vec({1.0}); }};
  p.control_samples = {make_vec({0.0})};
  return p;
}

// Damped pendulum with a control torque scaled by cos(x1).
inline ControlProblem pendulum() {
  ControlProblem p;
  p.n = 2;
  p.m = 1;
  p.a = 0.0;
  p.b = 2.0;
  p.x0 = make_vec({0.3, -0.2});
  p.dynamics.f = [](double, const Vec& x, const Vec& u) {
    return make_vec({x(1), -std::sin(x(0)) - 0.1 * x(1) + u(0) * std::cos(x(0))});
  };
  p.dynamics.jac_x = [](double, const Vec& x, const Vec& u) {
    Mat j(2, 2);
    j << 0.0, 1.0, -std::cos(x(0)) - u(0) * std::sin(x(0)), -0.1;
    return j;
  };
  p.terminal_cost = {[](const Vec& x) { return x.squaredNorm(); },
                     [](const Vec& x) { return Vec(2.0 * x); }};
  p.control_samples = {make_vec({-1.0}), make_vec({0.0}), make_vec({1.0})};
  return p;
}

inline double bang(double s) { return s; }

}  // namespace desk
