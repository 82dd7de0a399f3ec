#pragma once

#include "sepcert/cone.hpp"
#include "sepcert/linalg.hpp"
#include "sepcert/parallel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sepcert {

/// Absolute tolerance for "constraint holds / is active at y".
inline constexpr double kActiveTol = 1e-8;
/// Threshold used for the linear-independence (rank) checks on gradients.
inline constexpr double kRankTol = 1e-8;

/// A continuous map F defined on base + (C ∩ B(radius)) with values in R^n.
/// `eval` receives the full point base + c.
struct ConicMap {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Vec base;
  Cone cone = ConeV::zero(1);
  double radius = 1.0;
  VecFn eval;

  Vec anchor_image() const { return eval(base); }
};

/// {w : grad phi_i(y) . w = 0}; the gradients must be independent and
/// phi_i(y) = 0.
ConeH tangent_level_set_cone(const std::vector<ScalarFn>& constraints, const Vec& y);

/// {w : grad phi_i(y) . w = 0, grad h_j(y) . w <= 0 for active j}.
ConeH active_set_cone(const std::vector<ScalarFn>& eq_constraints,
                      const std::vector<ScalarFn>& ineq_constraints, const Vec& y);

/// Indices j with |h_j(y)| <= kActiveTol; throws PreconditionError when
/// some h_j(y) > kActiveTol.
std::vector<std::size_t> active_indices(const std::vector<ScalarFn>& ineq_constraints,
                                        const Vec& y);

struct DiffOptions {
  /// Strictly decreasing; empty means radius * 2^-k for k = 0..11.
  std::vector<double> radii;
  int samples_per_radius = 64;
  double threshold = 1e-3;
  /// Required decrease of the worst ratio per halving of the radius.
  double decay_per_halving = 1.5;
  /// Ratios at or below this are treated as exact.
  double noise_floor = 1e-9;
  std::uint64_t seed = 0;
  ExecPolicy policy = ExecPolicy::serial;
};

struct DiffReport {
  std::vector<double> radii;
  std::vector<double> worst_ratio;
  bool pass = false;
  std::string note;
};

/// Samples c on C ∩ {|c| = r} and measures |F(base + c) - F(base) - L c| / |c|.
DiffReport check_directional_diff(const ConicMap& map, const Mat& l, const DiffOptions& options = {});

struct NormalizedChart {
  ConicMap chart;
  /// M with L M k = k on range(L).
  Mat right_inverse;
  std::string note;
};

/// G(k) = F(base + M k) on K = L C.
NormalizedChart normalized_chart(const ConicMap& map, const Mat& l);

struct CoveringOptions {
  int target_samples = 200;
  int max_iterations = 500;
  double attain_tol = 1e-8;
  std::uint64_t seed = 0;
  ExecPolicy policy = ExecPolicy::serial;
};

struct CoveringReport {
  int sampled_targets = 0;
  int attained = 0;
  double coverage = 0.0;
  /// Most phi evaluations used by an attained target.
  int max_iterations_used = 0;
  /// Largest |phi(x) - x| seen while checking closeness.
  double closeness = 0.0;
  std::string note;
};

/// Targets y in center + B(R - rho) are sought by x <- x - phi(x) + y from
/// x = y. Throws PreconditionError when rho >= R or a sampled point of
/// center + B(R) violates |phi(x) - x| <= rho.
CoveringReport near_identity_covering(const VecFn& phi, const Vec& center, double big_r,
                                      double rho, const CoveringOptions& options = {});

struct OpenMapOptions {
  int closeness_samples = 50;
  int targets = 200;
  int max_iterations = 500;
  double attain_tol = 1e-8;
  double interior_eps = 1e-6;
  double min_s = 1e-8;
  int gamma_random_directions = 8;
  std::uint64_t seed = 0;
  ExecPolicy policy = ExecPolicy::serial;
};

struct OpenMappingWitness {
  /// Inner generator approximation of the cone over v + B(beta/2).
  ConeV gamma = ConeV::zero(1);
  double r_bar = 0.0;
  std::vector<Vec> basis_vectors;
  Mat pseudo_inverse;
  double alpha = 0.0;
  double beta = 0.0;
  double s_star = 0.0;
  double s_bar = 0.0;
  int targets = 0;
  int attained = 0;
  double coverage_fraction = 0.0;
  /// v = 0, so Gamma is the whole space.
  bool full_space = false;
};

/// v must be interior to L C and (map, L) must pass check_directional_diff.
OpenMappingWitness open_mapping_witness(const ConicMap& map, const Mat& l, const Vec& v,
                                        const OpenMapOptions& options = {});

/// Some c in C with L c = y (least l1 norm), if y is in L C.
std::optional<Vec> preimage_in_cone(const Mat& l, const Cone& c, const Vec& y);

}  // namespace sepcert
