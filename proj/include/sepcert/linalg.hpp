#pragma once

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace sepcert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Vector-valued map on R^m.
using VecFn = std::function<Vec(const Vec&)>;

/// Smooth scalar function with a gradient oracle.
struct ScalarFn {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

/// Thrown when operands disagree on dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an operation's stated precondition does not hold (rank
/// deficiency, infeasible point, non-interior direction, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure produces non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec unit_vec(Eigen::Index n, Eigen::Index k) {
  Vec e = Vec::Zero(n);
  e(k) = 1.0;
  return e;
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) +
                         " does not match " + std::to_string(want));
  }
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// Numerical rank of `a` by column-pivoted QR at absolute threshold `tol`.
inline Eigen::Index numerical_rank(const Mat& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(a);
  qr.setThreshold(tol / std::max(1.0, qr.maxPivot()));
  return qr.rank();
}

/// Moore-Penrose pseudo-inverse via complete orthogonal decomposition.
inline Mat pseudo_inverse(const Mat& a) {
  if (a.size() == 0) return Mat::Zero(a.cols(), a.rows());
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  return cod.pseudoInverse();
}

/// Spectral norm.
inline double operator_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

}  // namespace sepcert
