#ifndef RULEHEAD_HEADS_HPP
#define RULEHEAD_HEADS_HPP

#include <memory>
#include <string>

#include "rulehead/compile.hpp"

namespace rulehead {

// The differentiable layers mapping network outputs to marginal vectors.
// The first four guarantee the output satisfies the compiled rules;
// Independent is the uncoupled per-concept softmax baseline.
enum class HeadKind {
  Base,             // softmax over all t joint states, masked and renormalized
  AdmissibleState,  // softmax over the d admissible states
  Vertex,           // convex combination of polytope vertices
  Constraints,      // interior ray walk in the H-representation
  Independent,      // one softmax per concept block, no rule coupling
};

std::string head_kind_name(HeadKind kind);
HeadKind head_kind_from_name(const std::string& name);

// Binds a head to one compilation. If the compilation was reduced, the
// rule head runs on the reduced schema and the input grows extra blocks in
// original concept order: one softmax block per untouched concept and one
// per compressed concept with at least two replaced outcomes. Outputs are
// always over the original schema.
struct HeadSpec {
  HeadKind kind = HeadKind::Independent;
  std::shared_ptr<const CompiledRules> compiled;  // null for Independent
  std::shared_ptr<const ConceptSchema> schema;    // original schema

  int input_width() const;
  int output_width() const;

  const ConceptSchema& original_schema() const;
};

HeadSpec make_head(HeadKind kind, std::shared_ptr<const CompiledRules> compiled);
HeadSpec make_independent_head(std::shared_ptr<const ConceptSchema> schema);

// Width of the rule-head input alone, ignoring reduction extras.
int core_input_width(HeadKind kind, const CompiledRules& compiled);

// --- The four forward maps -------------------------------------------------

// softmax over joint states, masked by u, renormalized, marginalized.
MarginalVector base_head_forward(const Eigen::VectorXd& logits,
                                 const AdmissibleMask& mask,
                                 const ConceptSchema& schema);

// softmax over admissible states, scattered by W, marginalized.
MarginalVector as_head_forward(const Eigen::VectorXd& logits,
                               const PlacementMatrix& placement,
                               const ConceptSchema& schema);

// V * softmax(logits).
MarginalVector vertex_head_forward(const Eigen::VectorXd& logits,
                                   const Eigen::MatrixXd& vertices);

// map_to_polytope(raw, sigmoid(gate_raw), x0, sys).
MarginalVector constraints_head_forward(const Eigen::VectorXd& raw,
                                        double gate_raw,
                                        const InequalitySystem& sys,
                                        const InteriorPoint& x0);

// --- Dispatch over a HeadSpec ----------------------------------------------

MarginalVector head_forward(const HeadSpec& head, const Eigen::VectorXd& input);

// Exact vector-Jacobian product of head_forward at `input`. The constraints
// head treats the active wall of the ray walk as locally constant (a
// subgradient at ties).
Eigen::VectorXd head_backward(const HeadSpec& head,
                              const Eigen::VectorXd& input,
                              const Eigen::VectorXd& cotangent);

// Numerically stable softmax; exposed for the trainer and tests.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
// VJP of softmax: s .* (u - dot(u, s)).
Eigen::VectorXd softmax_vjp(const Eigen::VectorXd& softmax_value,
                            const Eigen::VectorXd& upstream);

}  // namespace rulehead

#endif  // RULEHEAD_HEADS_HPP
