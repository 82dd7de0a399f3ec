#pragma once

// LP encodings of cone membership and polar membership shared by the cone,
// AMP and open-mapping modules.

#include "sepcert/cone.hpp"
#include "sepcert/lp.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace sepcert::cone_lp {

/// Adds dim(k) free variables w constrained to w in K; returns their indices.
std::vector<int> add_member(lp::Program& prog, const Cone& k);

/// Constrains the existing variables `w` to lie in K.
void constrain_member(lp::Program& prog, const std::vector<int>& w, const Cone& k);

/// Constrains q := T z (z = existing variables) to lie in polar(K).
void constrain_polar(lp::Program& prog, const Mat& t, const std::vector<int>& z, const Cone& k);

struct Pin {
  int coord;
  double sign;
};

/// Searches for a nonzero point of a conic feasible set. `build` adds the
/// homogeneous constraints on the variables it returns. For each pin (k, s)
/// it solves the program with |z|_inf <= 1 and z_k = s; the first feasible
/// point of least l1 norm is returned, so its inf-norm is exactly 1. Default pins are every
/// coordinate ascending, + before -.
std::optional<Vec> find_nonzero(const std::function<std::vector<int>(lp::Program&)>& build,
                                const std::vector<Pin>& pins = {});

/// max{c . w : w from build, |w|_inf <= 1}.
double max_over_box(const std::function<std::vector<int>(lp::Program&)>& build, const Vec& c);

}  // namespace sepcert::cone_lp
