#include "rulehead/rule_ast.hpp"

#include <algorithm>

namespace rulehead::ast {

namespace {

AstPtr make(RuleAst::Kind kind, AstLiteral literal,
            std::vector<AstPtr> children) {
  auto node = std::make_shared<RuleAst>();
  node->kind = kind;
  node->literal = std::move(literal);
  node->children = std::move(children);
  return node;
}

}  // namespace

AstPtr lit(int concept_index, std::vector<int> outcomes) {
  std::sort(outcomes.begin(), outcomes.end());
  outcomes.erase(std::unique(outcomes.begin(), outcomes.end()),
                 outcomes.end());
  AstLiteral l;
  l.concept_index = concept_index;
  l.outcomes = std::move(outcomes);
  return make(RuleAst::Kind::Literal, std::move(l), {});
}

AstPtr not_(AstPtr x) { return make(RuleAst::Kind::Not, {}, {std::move(x)}); }

AstPtr and_(std::vector<AstPtr> xs) {
  return make(RuleAst::Kind::And, {}, std::move(xs));
}

AstPtr or_(std::vector<AstPtr> xs) {
  return make(RuleAst::Kind::Or, {}, std::move(xs));
}

AstPtr implies(AstPtr a, AstPtr b) {
  return make(RuleAst::Kind::Implies, {}, {std::move(a), std::move(b)});
}

AstPtr iff(AstPtr a, AstPtr b) {
  return make(RuleAst::Kind::Iff, {}, {std::move(a), std::move(b)});
}

AstPtr const_true() { return make(RuleAst::Kind::ConstTrue, {}, {}); }

AstPtr const_false() { return make(RuleAst::Kind::ConstFalse, {}, {}); }

int compare(const RuleAst& a, const RuleAst& b) {
  if (a.kind != b.kind) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  }
  if (a.kind == RuleAst::Kind::Literal) {
    if (a.literal.concept_index != b.literal.concept_index) {
      return a.literal.concept_index < b.literal.concept_index ? -1 : 1;
    }
    if (a.literal.outcomes != b.literal.outcomes) {
      return a.literal.outcomes < b.literal.outcomes ? -1 : 1;
    }
    return 0;
  }
  const size_t n = std::min(a.children.size(), b.children.size());
  for (size_t i = 0; i < n; ++i) {
    const int c = compare(*a.children[i], *b.children[i]);
    if (c != 0) return c;
  }
  if (a.children.size() != b.children.size()) {
    return a.children.size() < b.children.size() ? -1 : 1;
  }
  return 0;
}

bool structural_equal(const RuleAst& a, const RuleAst& b) {
  return compare(a, b) == 0;
}

void validate(const RuleAst& node, const ConceptSchema& schema) {
  if (node.kind == RuleAst::Kind::Literal) {
    const AstLiteral& l = node.literal;
    if (l.concept_index < 0 || l.concept_index >= schema.concept_count()) {
      throw SchemaError("literal references concept " +
                        std::to_string(l.concept_index) + " out of range");
    }
    if (l.outcomes.empty()) {
      throw SchemaError("literal has an empty outcome set");
    }
    for (int v : l.outcomes) {
      if (v < 1 || v > schema.outcome_count(l.concept_index)) {
        throw SchemaError("literal outcome " + std::to_string(v) +
                          " out of range for concept '" +
                          schema.concept_at(l.concept_index).name + "'");
      }
    }
  }
  for (const AstPtr& child : node.children) validate(*child, schema);
}

}  // namespace rulehead::ast
