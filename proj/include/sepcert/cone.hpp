#pragma once

#include "sepcert/linalg.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sepcert {

/// Finitely generated cone span+{g_1, ..., g_k}. An empty generator list is
/// the zero cone {0}.
class ConeV {
 public:
  ConeV(Eigen::Index dim, std::vector<Vec> generators);

  static ConeV zero(Eigen::Index dim) { return ConeV(dim, {}); }
  /// R^n as span+{+-e_i}.
  static ConeV full_space(Eigen::Index dim);

  Eigen::Index dim() const { return dim_; }
  const std::vector<Vec>& generators() const { return generators_; }

 private:
  Eigen::Index dim_;
  std::vector<Vec> generators_;
};

/// Polyhedral cone {w : a_i . w <= 0, b_j . w = 0}.
class ConeH {
 public:
  ConeH(Eigen::Index dim, std::vector<Vec> ineq_normals, std::vector<Vec> eq_normals = {});

  static ConeH full_space(Eigen::Index dim) { return ConeH(dim, {}, {}); }

  Eigen::Index dim() const { return dim_; }
  const std::vector<Vec>& ineq_normals() const { return ineq_; }
  const std::vector<Vec>& eq_normals() const { return eq_; }

 private:
  Eigen::Index dim_;
  std::vector<Vec> ineq_;
  std::vector<Vec> eq_;
};

/// A closed convex cone in either representation.
class Cone {
 public:
  Cone(ConeV v) : rep_(std::move(v)) {}
  Cone(ConeH h) : rep_(std::move(h)) {}

  Eigen::Index dim() const;
  bool is_generated() const { return std::holds_alternative<ConeV>(rep_); }
  const ConeV* as_v() const { return std::get_if<ConeV>(&rep_); }
  const ConeH* as_h() const { return std::get_if<ConeH>(&rep_); }
  const std::variant<ConeV, ConeH>& rep() const { return rep_; }

 private:
  std::variant<ConeV, ConeH> rep_;
};

/// A nonzero linear form p with p.k1 >= 0 on K1 and p.k2 <= 0 on K2.
struct SeparationCertificate {
  Vec p;
  std::string scale_note = "determined up to positive scaling";
};

inline constexpr double kConeTol = 1e-9;

bool membership(const Cone& k, const Vec& x, double tol = kConeTol);

/// {p : p.w <= 0 for all w in K} by representation swap.
Cone polar(const Cone& k);

/// K1 - K2 as a generator list; both inputs must be ConeV.
ConeV cone_difference(const Cone& k1, const Cone& k2);

/// K1 - K2 == R^n, decided through linear separability.
bool is_transversal(const Cone& k1, const Cone& k2);

/// Transversal and K1 ∩ K2 != {0}.
bool is_strongly_transversal(const Cone& k1, const Cone& k2);

/// Some separating form, or nullopt exactly when the cones are transversal.
std::optional<SeparationCertificate> linear_separation(const Cone& k1, const Cone& k2);

/// Re-checks p.k1 >= -tol on K1 and p.k2 <= tol on K2 (by generators for
/// ConeV, by LP for ConeH) and p != 0.
bool verify_separation(const SeparationCertificate& cert, const Cone& k1, const Cone& k2,
                       double tol = kConeTol);

/// Some x in K1 ∩ K2 with ||x||_inf = 1, if one exists.
std::optional<Vec> nonzero_common_element(const Cone& k1, const Cone& k2);

/// K == -K.
bool is_subspace(const Cone& k);

/// Minkowski sum of generator cones.
ConeV cone_sum(const ConeV& k1, const ConeV& k2);

// Set-level membership queries answered by LP. Each works on either
// representation and never enumerates generators.
bool member_of_sum(const Cone& k1, const Cone& k2, const Vec& x, double tol = kConeTol);
bool member_of_difference(const Cone& k1, const Cone& k2, const Vec& x, double tol = kConeTol);
bool member_of_intersection(const Cone& k1, const Cone& k2, const Vec& x, double tol = kConeTol);
/// p in (K1 + K2)^polar, via max{p.w : w in K1 + K2, |w|_inf <= 1} <= tol.
bool member_of_polar_of_sum(const Cone& k1, const Cone& k2, const Vec& p, double tol = kConeTol);
/// p in (K1 ∩ K2)^polar, via max{p.w : w in K1 ∩ K2, |w|_inf <= 1} <= tol.
bool member_of_polar_of_intersection(const Cone& k1, const Cone& k2, const Vec& p,
                                     double tol = kConeTol);

/// Drops (near-)zero vectors, then removes duplicates by comparing unit
/// directions at 1e-12. Order of first occurrence is kept.
std::vector<Vec> dedup_directions(const std::vector<Vec>& vs, double zero_tol = 1e-12);

/// Generator form when available without vertex enumeration: ConeV as is,
/// ConeH with no inequality rows as +-(kernel basis). Throws otherwise.
ConeV to_generators(const Cone& k);

std::string describe(const Cone& k);

}  // namespace sepcert
