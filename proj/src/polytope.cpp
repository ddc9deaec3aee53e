#include "rulehead/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rulehead {

Eigen::MatrixXd InequalitySystem::dense_clause_matrix() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(clause_count(), width);
  for (int r = 0; r < clause_count(); ++r) {
    for (int idx : clause_rows[r]) a(r, idx) = 1.0;
  }
  return a;
}

InequalitySystem clauses_to_inequalities(const Cnf& cnf,
                                         const ConceptSchema& schema) {
  InequalitySystem sys;
  sys.width = schema.total_width();
  for (int i = 0; i < schema.concept_count(); ++i) {
    sys.block_offsets.push_back(schema.block_offset(i));
    sys.block_sizes.push_back(schema.outcome_count(i));
  }
  for (const Clause& clause : cnf.clauses) {
    std::vector<int> row;
    row.reserve(clause.literals.size());
    for (const auto& [concept_index, outcome] : clause.literals) {
      row.push_back(schema.flat_index(concept_index, outcome));
    }
    std::sort(row.begin(), row.end());
    sys.clause_rows.push_back(std::move(row));
  }
  return sys;
}

bool contains(const InequalitySystem& sys, const MarginalVector& p,
              double tol) {
  if (p.size() != sys.width) {
    throw DimensionError("marginal width does not match system");
  }
  for (int i = 0; i < sys.width; ++i) {
    if (p[i] < -tol) return false;
  }
  for (size_t b = 0; b < sys.block_offsets.size(); ++b) {
    double sum = 0.0;
    for (int j = 0; j < sys.block_sizes[b]; ++j) {
      sum += p[sys.block_offsets[b] + j];
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  for (const std::vector<int>& row : sys.clause_rows) {
    double sum = 0.0;
    for (int idx : row) sum += p[idx];
    if (sum < 1.0 - tol) return false;
  }
  return true;
}

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kFeasEps = 1e-7;

// Dense two-phase tableau simplex, minimization form, Bland's rule for both
// the entering column and ratio-test ties. Small verification-grade solver;
// rows = clauses + concept blocks, columns = s + surplus + artificials.
class SimplexTableau {
 public:
  SimplexTableau(const InequalitySystem& sys) : sys_(sys) {
    rows_ = sys.clause_count() + static_cast<int>(sys.block_offsets.size());
    structural_ = sys.width + sys.clause_count();
    cols_ = structural_ + rows_ + 1;  // + artificials + rhs
    t_ = Eigen::MatrixXd::Zero(rows_, cols_);
    basis_.resize(rows_);

    for (int r = 0; r < sys.clause_count(); ++r) {
      for (int idx : sys.clause_rows[r]) t_(r, idx) = 1.0;
      t_(r, sys.width + r) = -1.0;  // surplus
      t_(r, cols_ - 1) = 1.0;
    }
    const int base = sys.clause_count();
    for (size_t b = 0; b < sys.block_offsets.size(); ++b) {
      const int r = base + static_cast<int>(b);
      for (int j = 0; j < sys.block_sizes[b]; ++j) {
        t_(r, sys.block_offsets[b] + j) = 1.0;
      }
      t_(r, cols_ - 1) = 1.0;
    }
    for (int r = 0; r < rows_; ++r) {
      t_(r, structural_ + r) = 1.0;
      basis_[r] = structural_ + r;
    }
  }

  // Returns the optimal point maximizing objective over the system.
  LpResult solve(const Eigen::VectorXd& objective) {
    // Phase 1: minimize the sum of artificials.
    Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(cols_ - 1);
    cost1.segment(structural_, rows_).setOnes();
    run(cost1, /*allow_artificials=*/true);
    if (objective_value(cost1) > kFeasEps) {
      throw InfeasibleLp("no feasible marginal vector satisfies the system");
    }
    drive_out_artificials();

    // Phase 2: minimize -objective.
    Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(cols_ - 1);
    cost2.head(sys_.width) = -objective;
    run(cost2, /*allow_artificials=*/false);

    LpResult result;
    result.point = Eigen::VectorXd::Zero(sys_.width);
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < sys_.width) {
        result.point[basis_[r]] = t_(r, cols_ - 1);
      }
    }
    result.value = objective.dot(result.point);
    return result;
  }

 private:
  double objective_value(const Eigen::VectorXd& cost) const {
    double v = 0.0;
    for (int r = 0; r < rows_; ++r) v += cost[basis_[r]] * t_(r, cols_ - 1);
    return v;
  }

  void run(const Eigen::VectorXd& cost, bool allow_artificials) {
    const int limit = allow_artificials ? cols_ - 1 : structural_;
    // A generous cap; Bland's rule terminates well before it.
    const long max_iters = 2000L * (rows_ + cols_);
    for (long iter = 0; iter < max_iters; ++iter) {
      Eigen::VectorXd reduced = cost.head(limit);
      for (int r = 0; r < rows_; ++r) {
        reduced -= cost[basis_[r]] * t_.row(r).head(limit);
      }
      int entering = -1;
      for (int j = 0; j < limit; ++j) {
        if (reduced[j] < -kPivotEps) {
          entering = j;
          break;  // Bland: smallest index
        }
      }
      if (entering < 0) return;  // optimal

      int leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double a = t_(r, entering);
        if (a > kPivotEps) {
          const double ratio = t_(r, cols_ - 1) / a;
          if (ratio < best_ratio - kPivotEps ||
              (std::abs(ratio - best_ratio) <= kPivotEps &&
               (leaving < 0 || basis_[r] < basis_[leaving]))) {
            best_ratio = ratio;
            leaving = r;
          }
        }
      }
      if (leaving < 0) {
        throw NumericError("LP unbounded; the marginal polytope is compact, "
                           "so the system construction is broken");
      }
      pivot(leaving, entering);
    }
    throw NumericError("simplex iteration cap exceeded");
  }

  void pivot(int prow, int pcol) {
    t_.row(prow) /= t_(prow, pcol);
    for (int r = 0; r < rows_; ++r) {
      if (r == prow) continue;
      const double factor = t_(r, pcol);
      if (factor != 0.0) t_.row(r) -= factor * t_.row(prow);
    }
    basis_[prow] = pcol;
  }

  // After phase 1 an artificial can linger in the basis at value zero; pivot
  // it out on any structural column, or leave the row inert if it is all
  // zeros (redundant constraint).
  void drive_out_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < structural_) continue;
      for (int j = 0; j < structural_; ++j) {
        if (std::abs(t_(r, j)) > kFeasEps) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  const InequalitySystem& sys_;
  int rows_ = 0;
  int structural_ = 0;
  int cols_ = 0;
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
};

}  // namespace

LpResult lp_max(const InequalitySystem& sys,
                const Eigen::VectorXd& objective) {
  if (objective.size() != sys.width) {
    throw DimensionError("objective width does not match system");
  }
  SimplexTableau tableau(sys);
  return tableau.solve(objective);
}

InteriorPoint interior_point(const Eigen::MatrixXd& vertices) {
  if (vertices.cols() < 1) {
    throw DimensionError("vertex matrix needs at least one column");
  }
  InteriorPoint x0;
  x0.point = vertices.rowwise().mean();
  x0.frozen.resize(vertices.rows());
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    const double first = vertices(i, 0);
    const double spread =
        (vertices.row(i).array() - first).abs().maxCoeff();
    x0.frozen[i] = spread < 1e-12 ? 1 : 0;
  }
  return x0;
}

Eigen::VectorXd project_feasible_direction(const Eigen::VectorXd& v,
                                           const InteriorPoint& x0,
                                           const InequalitySystem& sys) {
  if (v.size() != sys.width || x0.point.size() != sys.width) {
    throw DimensionError("direction or interior point width mismatch");
  }
  // The block mean is taken over the non-frozen coordinates only, otherwise
  // centering would push frozen entries off their pinned values.
  Eigen::VectorXd dir = v;
  for (int i = 0; i < sys.width; ++i) {
    if (x0.is_frozen(i)) dir[i] = 0.0;
  }
  for (size_t b = 0; b < sys.block_offsets.size(); ++b) {
    const int off = sys.block_offsets[b];
    const int n = sys.block_sizes[b];
    int free_count = 0;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!x0.is_frozen(off + j)) {
        sum += dir[off + j];
        ++free_count;
      }
    }
    if (free_count == 0) continue;
    const double mean = sum / free_count;
    for (int j = 0; j < n; ++j) {
      if (!x0.is_frozen(off + j)) dir[off + j] -= mean;
    }
  }
  return dir;
}

RayCast cast_ray(const Eigen::VectorXd& direction, const InteriorPoint& x0,
                 const InequalitySystem& sys) {
  RayCast ray;
  Eigen::VectorXd dir = project_feasible_direction(direction, x0, sys);
  ray.norm = dir.norm();
  if (ray.norm < 1e-12) {
    ray.degenerate = true;
    ray.unit_direction = Eigen::VectorXd::Zero(sys.width);
    return ray;
  }
  dir /= ray.norm;

  // First wall hit walking from x0, across clause rows and nonnegativity
  // rows. Block-sum equalities cannot limit the step: the projection keeps
  // them invariant.
  double alpha_max = std::numeric_limits<double>::infinity();
  for (int r = 0; r < sys.clause_count(); ++r) {
    double rate = 0.0;
    double value = 0.0;
    for (int idx : sys.clause_rows[r]) {
      rate += dir[idx];
      value += x0.point[idx];
    }
    if (rate < -1e-12) {
      const double candidate = std::max(value - 1.0, 0.0) / -rate;
      if (candidate < alpha_max) {
        alpha_max = candidate;
        ray.active_clause = r;
        ray.active_coordinate = -1;
      }
    }
  }
  for (int i = 0; i < sys.width; ++i) {
    if (dir[i] < -1e-12) {
      const double candidate = std::max(x0.point[i], 0.0) / -dir[i];
      if (candidate < alpha_max) {
        alpha_max = candidate;
        ray.active_clause = -1;
        ray.active_coordinate = i;
      }
    }
  }
  ray.alpha_max = std::isfinite(alpha_max) ? alpha_max : 0.0;
  ray.unit_direction = std::move(dir);
  return ray;
}

MarginalVector map_to_polytope(const Eigen::VectorXd& direction, double gate,
                               const InteriorPoint& x0,
                               const InequalitySystem& sys) {
  const RayCast ray = cast_ray(direction, x0, sys);
  if (ray.degenerate) return x0.point;
  const double step = gate * (1.0 - 1e-6) * ray.alpha_max;
  return x0.point + step * ray.unit_direction;
}

}  // namespace rulehead
