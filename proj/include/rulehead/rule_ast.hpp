#ifndef RULEHEAD_RULE_AST_HPP
#define RULEHEAD_RULE_AST_HPP

#include <memory>
#include <vector>

#include "rulehead/schema.hpp"

namespace rulehead {

struct RuleAst;
using AstPtr = std::shared_ptr<const RuleAst>;

// A literal is an indicator that concept `concept_index` takes one of the
// listed outcomes; a multi-outcome set abbreviates the disjunction of the
// single-outcome indicators.
struct AstLiteral {
  int concept_index = -1;
  std::vector<int> outcomes;  // sorted, unique, 1-based, non-empty
};

// Immutable expression tree for one rule set. Nodes are shared freely; all
// rewrites build new trees.
struct RuleAst {
  enum class Kind {
    Literal,
    Not,      // 1 child
    And,      // >= 2 children
    Or,       // >= 2 children
    Implies,  // 2 children
    Iff,      // 2 children
    ConstTrue,
    ConstFalse,
  };

  Kind kind;
  AstLiteral literal;            // Kind::Literal only
  std::vector<AstPtr> children;  // empty for Literal / constants
};

namespace ast {

AstPtr lit(int concept_index, std::vector<int> outcomes);
AstPtr not_(AstPtr x);
AstPtr and_(std::vector<AstPtr> xs);
AstPtr or_(std::vector<AstPtr> xs);
AstPtr implies(AstPtr a, AstPtr b);
AstPtr iff(AstPtr a, AstPtr b);
AstPtr const_true();
AstPtr const_false();

// Total order used for canonical child ordering of commutative nodes.
int compare(const RuleAst& a, const RuleAst& b);
bool structural_equal(const RuleAst& a, const RuleAst& b);

// Throws SchemaError unless every literal references a valid concept and a
// non-empty subset of its outcomes.
void validate(const RuleAst& node, const ConceptSchema& schema);

}  // namespace ast

}  // namespace rulehead

#endif  // RULEHEAD_RULE_AST_HPP
