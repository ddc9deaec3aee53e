#ifndef RULEHEAD_STATE_SPACE_HPP
#define RULEHEAD_STATE_SPACE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rulehead/rule_ast.hpp"

namespace rulehead {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1ull << 24;

// Joint states are numbered 1..t in mixed-radix order with concept 0 most
// significant. This order is fixed and never configurable.
std::uint64_t encode_state(const ConceptVector& c, const ConceptSchema& schema);
ConceptVector decode_state(std::uint64_t k, const ConceptSchema& schema);

// Bit k-1 set iff joint state k satisfies the rule.
struct AdmissibleMask {
  std::vector<std::uint8_t> bits;  // size t
  std::uint64_t admissible_count = 0;  // d

  bool admissible(std::uint64_t k) const { return bits[k - 1] != 0; }
};

// Evaluates the rule on every joint state. Throws UnsatisfiableRule when no
// state is admissible and EnumerationBudgetExceeded when t exceeds the
// budget (reduce the schema or use the constraints head).
AdmissibleMask admissible_mask(
    const RuleAst& ast, const ConceptSchema& schema,
    std::uint64_t enumeration_budget = kDefaultEnumerationBudget);

// Sparse column map of the t-by-d placement matrix W: column k holds the
// 1-based joint state index of the k-th admissible state, ascending.
struct PlacementMatrix {
  std::vector<std::uint64_t> state_index;

  std::uint64_t admissible_count() const { return state_index.size(); }
};

PlacementMatrix placement_matrix(const AdmissibleMask& mask);

// Applies W: scatters a d-vector of admissible-state probabilities into the
// full t-vector (zeros on inadmissible states).
Eigen::VectorXd apply_placement(const PlacementMatrix& placement,
                                const Eigen::VectorXd& reduced,
                                std::uint64_t joint_count);

// Sums a joint distribution into concatenated per-concept marginals.
// Expects pi >= 0 with entries summing to 1.
MarginalVector marginalize(const Eigen::VectorXd& pi,
                           const ConceptSchema& schema);

// s-by-d matrix whose k-th column is the concatenated one-hot encoding of
// the k-th admissible state; the feasible marginals are exactly the convex
// hull of its columns.
Eigen::MatrixXd vertex_matrix(const AdmissibleMask& mask,
                              const ConceptSchema& schema,
                              std::uint64_t entry_budget = 1ull << 24);

// How one original concept maps into the reduced schema.
struct ReducedConcept {
  bool untouched = false;  // not mentioned by the rule; gets its own head
  int reduced_index = -1;  // position in the reduced schema, -1 if untouched
  bool has_zero = false;   // reduced outcome 1 is the artificial 0-outcome
  std::vector<int> kept;      // original outcomes mentioned by the rule
  std::vector<int> replaced;  // original outcomes folded into the 0-outcome

  // Reduced outcome index for an original outcome (1-based both sides).
  int reduced_outcome(int original) const;
};

struct ReducedSchemaMap {
  std::vector<ReducedConcept> concepts;  // one per original concept
};

struct SchemaReduction {
  ConceptSchema reduced_schema;
  ReducedSchemaMap map;
  AstPtr rewritten_ast;  // negation-free, over reduced outcome indices
};

// Compresses outcomes not mentioned by the rule into an artificial
// 0-outcome per concept and drops unmentioned concepts from the joint
// enumeration entirely. Mentions are collected from the negation-free form
// of the rule. Throws Error if the rule mentions no concept at all.
SchemaReduction reduce_schema(const RuleAst& ast, const ConceptSchema& schema);

// Maps an original joint state index to the reduced joint state index.
std::uint64_t reduce_state_index(std::uint64_t k,
                                 const ConceptSchema& original,
                                 const ConceptSchema& reduced,
                                 const ReducedSchemaMap& map);

// Recovers original-schema marginals from reduced ones. For a compressed
// concept, Pr(v) = Pr_comp(0) * Pr_repl(v) for replaced outcomes and
// Pr_comp(v) otherwise; untouched concepts take their whole block from
// `replacement_probs`. `replacement_probs[i]` is indexed by original
// concept: a distribution over `replaced` outcomes for compressed concepts
// (empty allowed when fewer than two outcomes were replaced, meaning the
// single replaced outcome has probability 1), or over all outcomes for
// untouched ones.
MarginalVector expand_compressed_marginals(
    const MarginalVector& compressed, const ConceptSchema& original,
    const ConceptSchema& reduced, const ReducedSchemaMap& map,
    const std::vector<Eigen::VectorXd>& replacement_probs);

}  // namespace rulehead

#endif  // RULEHEAD_STATE_SPACE_HPP
