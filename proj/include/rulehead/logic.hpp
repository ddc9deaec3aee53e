#ifndef RULEHEAD_LOGIC_HPP
#define RULEHEAD_LOGIC_HPP

#include <utility>
#include <vector>

#include "rulehead/rule_ast.hpp"

namespace rulehead {

// Disjunction of positive literals, stored as sorted unique
// (concept, outcome) pairs. Never empty.
struct Clause {
  std::vector<std::pair<int, int>> literals;

  bool operator==(const Clause& other) const {
    return literals == other.literals;
  }
};

// Conjunction of clauses. An empty clause list means TRUE.
struct Cnf {
  std::vector<Clause> clauses;
};

inline constexpr int kDefaultClauseBudget = 10000;

// Truth value of the rule at a concept vector, standard propositional
// semantics; Literal(i, S) holds iff c[i] is in S.
bool evaluate(const RuleAst& ast, const ConceptVector& c);

// Rewrites to an equivalent And/Or/Literal tree (or a constant): Implies
// and Iff are expanded, negation of a literal becomes the disjunction of
// the remaining outcomes of the same concept. Nested same-kind nodes are
// flattened and children are put in canonical order. Throws
// UnsatisfiableRule if the rule folds to FALSE.
AstPtr eliminate_negations(const RuleAst& ast, const ConceptSchema& schema);

// CNF by recursive distribution of OR over AND with on-the-fly
// simplification. Input must be negation-free (eliminate_negations output).
// Throws CnfExplosion when an intermediate clause list exceeds the budget;
// the AS and vertex heads do not need a CNF.
Cnf to_cnf(const RuleAst& nnf, const ConceptSchema& schema,
           int clause_budget = kDefaultClauseBudget);

// Merges duplicate literals, drops tautological clauses (covering every
// outcome of one concept) and subsumed clauses.
Cnf simplify_cnf(const Cnf& cnf, const ConceptSchema& schema);

// True iff every clause contains a literal matched by c.
bool cnf_satisfied(const Cnf& cnf, const ConceptVector& c);

}  // namespace rulehead

#endif  // RULEHEAD_LOGIC_HPP
