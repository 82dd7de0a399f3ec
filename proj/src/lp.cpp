#include "sepcert/lp.hpp"

#include "sepcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sepcert::lp {

int Program::add_variable(double lower, double upper) {
  if (lower > upper || std::isnan(lower) || std::isnan(upper)) {
    throw std::invalid_argument("lp: empty variable bounds");
  }
  lower_.push_back(lower);
  upper_.push_back(upper);
  return static_cast<int>(lower_.size()) - 1;
}

void Program::add_constraint(const std::vector<Term>& terms, Relation rel, double rhs) {
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw std::out_of_range("lp: constraint references unknown variable");
    }
  }
  rows_.push_back(Row{terms, rel, rhs});
}

void Program::minimize(const std::vector<Term>& terms) {
  objective_ = terms;
  maximize_ = false;
}

void Program::maximize(const std::vector<Term>& terms) {
  objective_ = terms;
  maximize_ = true;
}

struct Access {
  static const auto& lower(const Program& p) { return p.lower_; }
  static const auto& upper(const Program& p) { return p.upper_; }
  static const auto& rows(const Program& p) { return p.rows_; }
  static const auto& objective(const Program& p) { return p.objective_; }
  static bool maximizing(const Program& p) { return p.maximize_; }
};

namespace {

// Each user variable becomes offset + sign * column (+ optionally minus a
// second column for free variables).
struct ColumnMap {
  double offset = 0.0;
  int pos = -1;
  int neg = -1;
  double sign = 1.0;
};

class Tableau {
 public:
  Tableau(Mat a, Vec b, double tol) : tol_(tol), m_(a.rows()), n_(a.cols()) {
    // Columns: [structural n_ | artificial m_ | rhs]
    t_ = Mat::Zero(m_ + 1, n_ + m_ + 1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      double s = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = s * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, n_ + m_) = s * b(i);
    }
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
    active_rows_.assign(static_cast<std::size_t>(m_), true);
  }

  // Phase 1; returns the minimal sum of artificials.
  double phase_one(int max_iter) {
    Vec cost = Vec::Zero(n_ + m_);
    cost.tail(m_).setOnes();
    load_objective(cost);
    iterate(n_ + m_, max_iter);
    return -t_(m_, n_ + m_);
  }

  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > tol_) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        active_rows_[static_cast<std::size_t>(i)] = false;  // redundant row
      }
    }
  }

  // Phase 2 over structural columns only; false when unbounded.
  bool phase_two(const Vec& cost, int max_iter) {
    Vec full = Vec::Zero(n_ + m_);
    full.head(n_) = cost;
    load_objective(full);
    return iterate(n_, max_iter);
  }

  Vec structural_values() const {
    Vec x = Vec::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      Eigen::Index bv = basis_[static_cast<std::size_t>(i)];
      if (bv < n_ && active_rows_[static_cast<std::size_t>(i)]) x(bv) = t_(i, n_ + m_);
    }
    return x;
  }

 private:
  void load_objective(const Vec& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_ + m_) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active_rows_[static_cast<std::size_t>(i)]) continue;
      double cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Bland's rule: smallest eligible entering index, smallest basic index
  // among ratio ties.
  bool iterate(Eigen::Index allowed_cols, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (t_(m_, j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      double best = kInf;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active_rows_[static_cast<std::size_t>(i)] || t_(i, enter) <= tol_) continue;
        best = std::min(best, t_(i, n_ + m_) / t_(i, enter));
      }
      Eigen::Index leave = -1;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active_rows_[static_cast<std::size_t>(i)] || t_(i, enter) <= tol_) continue;
        if (t_(i, n_ + m_) / t_(i, enter) > best + tol_) continue;
        if (leave < 0 ||
            basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw NumericalError("lp: simplex iteration limit reached");
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  double tol_;
  Eigen::Index m_;
  Eigen::Index n_;
  Mat t_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_rows_;
};

}  // namespace

Solution solve(const Program& program, const Options& options) {
  const auto& lower = Access::lower(program);
  const auto& upper = Access::upper(program);
  const auto& rows = Access::rows(program);
  const int nvar = program.num_variables();

  std::vector<ColumnMap> cmap(static_cast<std::size_t>(nvar));
  int ncols = 0;
  struct BoundRow {
    int col;
    double limit;
  };
  std::vector<BoundRow> bound_rows;
  for (int j = 0; j < nvar; ++j) {
    ColumnMap& cm = cmap[static_cast<std::size_t>(j)];
    double lo = lower[static_cast<std::size_t>(j)];
    double hi = upper[static_cast<std::size_t>(j)];
    if (std::isfinite(lo)) {
      cm.offset = lo;
      cm.pos = ncols++;
      if (std::isfinite(hi)) bound_rows.push_back({cm.pos, hi - lo});
    } else if (std::isfinite(hi)) {
      cm.offset = hi;
      cm.sign = -1.0;
      cm.pos = ncols++;
    } else {
      cm.pos = ncols++;
      cm.neg = ncols++;
    }
  }
  // Slack columns follow the structural ones.
  int nslack = 0;
  for (const auto& r : rows) {
    if (r.rel != Relation::equal) ++nslack;
  }
  nslack += static_cast<int>(bound_rows.size());
  const int nrows = static_cast<int>(rows.size() + bound_rows.size());
  const int ntotal = ncols + nslack;

  Mat a = Mat::Zero(nrows, ntotal);
  Vec b = Vec::Zero(nrows);
  int slack = ncols;
  int ri = 0;
  for (const auto& r : rows) {
    double rhs = r.rhs;
    for (const Term& t : r.terms) {
      const ColumnMap& cm = cmap[static_cast<std::size_t>(t.var)];
      rhs -= t.coef * cm.offset;
      a(ri, cm.pos) += t.coef * cm.sign;
      if (cm.neg >= 0) a(ri, cm.neg) -= t.coef;
    }
    if (r.rel == Relation::less_equal) a(ri, slack++) = 1.0;
    if (r.rel == Relation::greater_equal) a(ri, slack++) = -1.0;
    b(ri) = rhs;
    ++ri;
  }
  for (const auto& br : bound_rows) {
    a(ri, br.col) = 1.0;
    a(ri, slack++) = 1.0;
    b(ri) = br.limit;
    ++ri;
  }

  Solution sol;
  Vec cost = Vec::Zero(ntotal);
  double sense = Access::maximizing(program) ? -1.0 : 1.0;
  for (const Term& t : Access::objective(program)) {
    const ColumnMap& cm = cmap[static_cast<std::size_t>(t.var)];
    cost(cm.pos) += sense * t.coef * cm.sign;
    if (cm.neg >= 0) cost(cm.neg) -= sense * t.coef;
  }

  Vec z;
  if (nrows == 0) {
    z = Vec::Zero(ntotal);
    for (Eigen::Index j = 0; j < ntotal; ++j) {
      if (cost(j) < -options.tolerance) {
        sol.status = Status::unbounded;
        break;
      }
    }
    if (sol.status != Status::unbounded) sol.status = Status::optimal;
  } else {
    Tableau tab(a, b, options.tolerance);
    double infeas = tab.phase_one(options.max_iterations);
    double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (infeas > options.tolerance * scale) {
      sol.status = Status::infeasible;
      return sol;
    }
    tab.drive_out_artificials();
    bool bounded = tab.phase_two(cost, options.max_iterations);
    sol.status = bounded ? Status::optimal : Status::unbounded;
    z = tab.structural_values();
  }

  sol.x.resize(static_cast<std::size_t>(nvar));
  double obj = 0.0;
  for (int j = 0; j < nvar; ++j) {
    const ColumnMap& cm = cmap[static_cast<std::size_t>(j)];
    double v = cm.offset + cm.sign * z(cm.pos);
    if (cm.neg >= 0) v -= z(cm.neg);
    sol.x[static_cast<std::size_t>(j)] = v;
  }
  for (const Term& t : Access::objective(program)) obj += t.coef * sol.x[static_cast<std::size_t>(t.var)];
  sol.objective = obj;
  return sol;
}

}  // namespace sepcert::lp
