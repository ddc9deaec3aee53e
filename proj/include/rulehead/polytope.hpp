#ifndef RULEHEAD_POLYTOPE_HPP
#define RULEHEAD_POLYTOPE_HPP

#include <vector>

#include <Eigen/Core>

#include "rulehead/logic.hpp"

namespace rulehead {

// H-representation of the feasible marginal set: one inequality
// sum_{(i,j) in K} p_j^(i) >= 1 per CNF clause, plus p >= 0 and unit block
// sums. Clause rows are kept sparse as flat-index lists.
struct InequalitySystem {
  int width = 0;                   // s
  std::vector<int> block_offsets;  // size m+1
  std::vector<int> block_sizes;    // size m+1
  std::vector<std::vector<int>> clause_rows;  // sorted flat indices per row

  int clause_count() const { return static_cast<int>(clause_rows.size()); }

  // Dense b-by-s clause matrix (the rows above the identity block).
  Eigen::MatrixXd dense_clause_matrix() const;
};

InequalitySystem clauses_to_inequalities(const Cnf& cnf,
                                         const ConceptSchema& schema);

// Membership test: clause rows >= 1 - tol, entries >= -tol, block sums
// within tol of 1.
bool contains(const InequalitySystem& sys, const MarginalVector& p,
              double tol);

struct LpResult {
  double value = 0.0;
  Eigen::VectorXd point;
};

// Maximizes objective^T p over the system with a dense two-phase simplex
// using Bland's rule. Verification-grade: small instances only, never on
// the training path. Throws InfeasibleLp when the system has no feasible
// point.
LpResult lp_max(const InequalitySystem& sys, const Eigen::VectorXd& objective);

// A point strictly inside the polytope on every non-frozen coordinate,
// plus the coordinates that are provably constant over the whole polytope.
struct InteriorPoint {
  MarginalVector point;
  std::vector<std::uint8_t> frozen;  // size s

  bool is_frozen(int i) const { return frozen[i] != 0; }
};

// Vertex centroid; frozen marks coordinates on which all vertex columns
// agree (implicit equalities).
InteriorPoint interior_point(const Eigen::MatrixXd& vertices);

// Zeroes frozen coordinates and centers every block over its non-frozen
// coordinates, so the result is a feasible movement direction (block sums
// zero, frozen entries fixed). Symmetric as a linear operator.
Eigen::VectorXd project_feasible_direction(const Eigen::VectorXd& v,
                                           const InteriorPoint& x0,
                                           const InequalitySystem& sys);

// Projected unit direction from x0 together with the first wall it hits.
struct RayCast {
  bool degenerate = false;        // projected direction vanished
  double norm = 0.0;              // length of the projected direction
  Eigen::VectorXd unit_direction;
  double alpha_max = 0.0;
  int active_clause = -1;      // limiting clause row, or
  int active_coordinate = -1;  // limiting p >= 0 row; both -1 if unbounded
};

RayCast cast_ray(const Eigen::VectorXd& direction, const InteriorPoint& x0,
                 const InequalitySystem& sys);

// Maps an arbitrary direction to a polytope point: project the direction so
// frozen coordinates stay put and every block sums to zero, walk from x0
// toward the boundary, stop at gate * (1 - eps) of the maximal feasible
// step. Total function; gate in (0,1).
MarginalVector map_to_polytope(const Eigen::VectorXd& direction, double gate,
                               const InteriorPoint& x0,
                               const InequalitySystem& sys);

}  // namespace rulehead

#endif  // RULEHEAD_POLYTOPE_HPP
