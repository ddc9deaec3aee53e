#include "rulehead/logic.hpp"

#include <algorithm>
#include <map>

namespace rulehead {

namespace {

using Kind = RuleAst::Kind;

bool literal_matches(const AstLiteral& l, const ConceptVector& c) {
  return std::binary_search(l.outcomes.begin(), l.outcomes.end(),
                            c[l.concept_index]);
}

std::vector<int> complement_outcomes(const std::vector<int>& outcomes, int n) {
  std::vector<int> rest;
  rest.reserve(n - outcomes.size());
  size_t pos = 0;
  for (int v = 1; v <= n; ++v) {
    if (pos < outcomes.size() && outcomes[pos] == v) {
      ++pos;
    } else {
      rest.push_back(v);
    }
  }
  return rest;
}

// Literal constructor that folds the empty and the full outcome set into
// constants.
AstPtr fold_lit(int concept_index, std::vector<int> outcomes,
                const ConceptSchema& schema) {
  if (outcomes.empty()) return ast::const_false();
  if (static_cast<int>(outcomes.size()) ==
      schema.outcome_count(concept_index)) {
    return ast::const_true();
  }
  return ast::lit(concept_index, std::move(outcomes));
}

void sort_and_dedupe(std::vector<AstPtr>& xs) {
  std::sort(xs.begin(), xs.end(), [](const AstPtr& a, const AstPtr& b) {
    return ast::compare(*a, *b) < 0;
  });
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](const AstPtr& a, const AstPtr& b) {
                         return ast::structural_equal(*a, *b);
                       }),
           xs.end());
}

// Builds a conjunction: flattens nested Ands, folds constants, intersects
// same-concept literals, orders children canonically.
AstPtr make_and(std::vector<AstPtr> parts, const ConceptSchema& schema);
AstPtr make_or(std::vector<AstPtr> parts, const ConceptSchema& schema);

AstPtr make_and(std::vector<AstPtr> parts, const ConceptSchema& schema) {
  std::vector<AstPtr> flat;
  std::map<int, std::vector<int>> literal_sets;  // concept -> intersection
  for (AstPtr& p : parts) {
    if (p->kind == Kind::ConstFalse) return ast::const_false();
    if (p->kind == Kind::ConstTrue) continue;
    if (p->kind == Kind::And) {
      for (const AstPtr& c : p->children) {
        if (c->kind == Kind::Literal) {
          auto [it, fresh] = literal_sets.try_emplace(
              c->literal.concept_index, c->literal.outcomes);
          if (!fresh) {
            std::vector<int> merged;
            std::set_intersection(it->second.begin(), it->second.end(),
                                  c->literal.outcomes.begin(),
                                  c->literal.outcomes.end(),
                                  std::back_inserter(merged));
            it->second = std::move(merged);
          }
        } else {
          flat.push_back(c);
        }
      }
    } else if (p->kind == Kind::Literal) {
      auto [it, fresh] = literal_sets.try_emplace(p->literal.concept_index,
                                                  p->literal.outcomes);
      if (!fresh) {
        std::vector<int> merged;
        std::set_intersection(it->second.begin(), it->second.end(),
                              p->literal.outcomes.begin(),
                              p->literal.outcomes.end(),
                              std::back_inserter(merged));
        it->second = std::move(merged);
      }
    } else {
      flat.push_back(std::move(p));
    }
  }
  for (auto& [concept_index, outcomes] : literal_sets) {
    AstPtr l = fold_lit(concept_index, std::move(outcomes), schema);
    if (l->kind == Kind::ConstFalse) return ast::const_false();
    if (l->kind == Kind::ConstTrue) continue;
    flat.push_back(std::move(l));
  }
  sort_and_dedupe(flat);
  if (flat.empty()) return ast::const_true();
  if (flat.size() == 1) return flat.front();
  return ast::and_(std::move(flat));
}

AstPtr make_or(std::vector<AstPtr> parts, const ConceptSchema& schema) {
  std::vector<AstPtr> flat;
  std::map<int, std::vector<int>> literal_sets;  // concept -> union
  for (AstPtr& p : parts) {
    if (p->kind == Kind::ConstTrue) return ast::const_true();
    if (p->kind == Kind::ConstFalse) continue;
    if (p->kind == Kind::Or) {
      for (const AstPtr& c : p->children) {
        if (c->kind == Kind::Literal) {
          auto& s = literal_sets[c->literal.concept_index];
          std::vector<int> merged;
          std::set_union(s.begin(), s.end(), c->literal.outcomes.begin(),
                         c->literal.outcomes.end(),
                         std::back_inserter(merged));
          s = std::move(merged);
        } else {
          flat.push_back(c);
        }
      }
    } else if (p->kind == Kind::Literal) {
      auto& s = literal_sets[p->literal.concept_index];
      std::vector<int> merged;
      std::set_union(s.begin(), s.end(), p->literal.outcomes.begin(),
                     p->literal.outcomes.end(), std::back_inserter(merged));
      s = std::move(merged);
    } else {
      flat.push_back(std::move(p));
    }
  }
  for (auto& [concept_index, outcomes] : literal_sets) {
    AstPtr l = fold_lit(concept_index, std::move(outcomes), schema);
    if (l->kind == Kind::ConstTrue) return ast::const_true();
    if (l->kind == Kind::ConstFalse) continue;
    flat.push_back(std::move(l));
  }
  sort_and_dedupe(flat);
  if (flat.empty()) return ast::const_false();
  if (flat.size() == 1) return flat.front();
  return ast::or_(std::move(flat));
}

AstPtr to_nnf(const RuleAst& node, bool positive,
              const ConceptSchema& schema) {
  switch (node.kind) {
    case Kind::Literal: {
      std::vector<int> outcomes =
          positive ? node.literal.outcomes
                   : complement_outcomes(
                         node.literal.outcomes,
                         schema.outcome_count(node.literal.concept_index));
      return fold_lit(node.literal.concept_index, std::move(outcomes),
                      schema);
    }
    case Kind::Not:
      return to_nnf(*node.children[0], !positive, schema);
    case Kind::And:
    case Kind::Or: {
      const bool conjunctive = (node.kind == Kind::And) == positive;
      std::vector<AstPtr> parts;
      parts.reserve(node.children.size());
      for (const AstPtr& c : node.children) {
        parts.push_back(to_nnf(*c, positive, schema));
      }
      return conjunctive ? make_and(std::move(parts), schema)
                         : make_or(std::move(parts), schema);
    }
    case Kind::Implies: {
      const RuleAst& a = *node.children[0];
      const RuleAst& b = *node.children[1];
      if (positive) {
        return make_or({to_nnf(a, false, schema), to_nnf(b, true, schema)},
                       schema);
      }
      return make_and({to_nnf(a, true, schema), to_nnf(b, false, schema)},
                      schema);
    }
    case Kind::Iff: {
      const RuleAst& a = *node.children[0];
      const RuleAst& b = *node.children[1];
      if (positive) {
        return make_and(
            {make_or({to_nnf(a, false, schema), to_nnf(b, true, schema)},
                     schema),
             make_or({to_nnf(b, false, schema), to_nnf(a, true, schema)},
                     schema)},
            schema);
      }
      return make_or(
          {make_and({to_nnf(a, true, schema), to_nnf(b, false, schema)},
                    schema),
           make_and({to_nnf(a, false, schema), to_nnf(b, true, schema)},
                    schema)},
          schema);
    }
    case Kind::ConstTrue:
      return positive ? ast::const_true() : ast::const_false();
    case Kind::ConstFalse:
      return positive ? ast::const_false() : ast::const_true();
  }
  throw Error("Internal", "unreachable AST kind");
}

Clause clause_union(const Clause& a, const Clause& b) {
  Clause out;
  out.literals.reserve(a.literals.size() + b.literals.size());
  std::set_union(a.literals.begin(), a.literals.end(), b.literals.begin(),
                 b.literals.end(), std::back_inserter(out.literals));
  return out;
}

bool clause_tautological(const Clause& clause, const ConceptSchema& schema) {
  size_t i = 0;
  while (i < clause.literals.size()) {
    const int concept_index = clause.literals[i].first;
    size_t j = i;
    while (j < clause.literals.size() &&
           clause.literals[j].first == concept_index) {
      ++j;
    }
    if (static_cast<int>(j - i) == schema.outcome_count(concept_index)) {
      return true;
    }
    i = j;
  }
  return false;
}

bool is_subset(const Clause& a, const Clause& b) {
  return std::includes(b.literals.begin(), b.literals.end(),
                       a.literals.begin(), a.literals.end());
}

// Duplicate removal plus tautology drop; subsumption only while the list is
// small enough that the quadratic pass stays cheap.
void tidy_clause_list(std::vector<Clause>& clauses,
                      const ConceptSchema& schema) {
  clauses.erase(std::remove_if(clauses.begin(), clauses.end(),
                               [&](const Clause& c) {
                                 return clause_tautological(c, schema);
                               }),
                clauses.end());
  std::sort(clauses.begin(), clauses.end(),
            [](const Clause& a, const Clause& b) {
              if (a.literals.size() != b.literals.size()) {
                return a.literals.size() < b.literals.size();
              }
              return a.literals < b.literals;
            });
  clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
  if (clauses.size() > 512) return;
  std::vector<Clause> kept;
  for (Clause& candidate : clauses) {
    bool subsumed = false;
    for (const Clause& k : kept) {
      if (is_subset(k, candidate)) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) kept.push_back(std::move(candidate));
  }
  clauses = std::move(kept);
}

std::vector<Clause> distribute(const RuleAst& node,
                               const ConceptSchema& schema, int budget) {
  switch (node.kind) {
    case Kind::ConstTrue:
      return {};
    case Kind::ConstFalse:
      throw UnsatisfiableRule("rule reduces to FALSE");
    case Kind::Literal: {
      Clause c;
      for (int v : node.literal.outcomes) {
        c.literals.emplace_back(node.literal.concept_index, v);
      }
      return {std::move(c)};
    }
    case Kind::And: {
      std::vector<Clause> all;
      for (const AstPtr& child : node.children) {
        std::vector<Clause> part = distribute(*child, schema, budget);
        all.insert(all.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
        tidy_clause_list(all, schema);
        if (static_cast<int>(all.size()) > budget) {
          throw CnfExplosion("clause count " + std::to_string(all.size()) +
                             " exceeds budget " + std::to_string(budget));
        }
      }
      return all;
    }
    case Kind::Or: {
      std::vector<Clause> acc = {Clause{}};
      for (const AstPtr& child : node.children) {
        const std::vector<Clause> part = distribute(*child, schema, budget);
        std::vector<Clause> next;
        next.reserve(acc.size() * part.size());
        for (const Clause& a : acc) {
          for (const Clause& p : part) {
            Clause merged = clause_union(a, p);
            if (!clause_tautological(merged, schema)) {
              next.push_back(std::move(merged));
            }
          }
        }
        tidy_clause_list(next, schema);
        if (static_cast<int>(next.size()) > budget) {
          throw CnfExplosion("clause count " + std::to_string(next.size()) +
                             " exceeds budget " + std::to_string(budget));
        }
        acc = std::move(next);
        if (acc.empty()) return {};  // the disjunction is a tautology
      }
      return acc;
    }
    default:
      throw Error("Internal",
                  "to_cnf expects a negation-free AST "
                  "(run eliminate_negations first)");
  }
}

}  // namespace

bool evaluate(const RuleAst& node, const ConceptVector& c) {
  switch (node.kind) {
    case Kind::Literal:
      return literal_matches(node.literal, c);
    case Kind::Not:
      return !evaluate(*node.children[0], c);
    case Kind::And:
      for (const AstPtr& child : node.children) {
        if (!evaluate(*child, c)) return false;
      }
      return true;
    case Kind::Or:
      for (const AstPtr& child : node.children) {
        if (evaluate(*child, c)) return true;
      }
      return false;
    case Kind::Implies:
      return !evaluate(*node.children[0], c) || evaluate(*node.children[1], c);
    case Kind::Iff:
      return evaluate(*node.children[0], c) == evaluate(*node.children[1], c);
    case Kind::ConstTrue:
      return true;
    case Kind::ConstFalse:
      return false;
  }
  return false;
}

AstPtr eliminate_negations(const RuleAst& node, const ConceptSchema& schema) {
  AstPtr nnf = to_nnf(node, true, schema);
  if (nnf->kind == Kind::ConstFalse) {
    throw UnsatisfiableRule("rule reduces to FALSE");
  }
  return nnf;
}

Cnf to_cnf(const RuleAst& nnf, const ConceptSchema& schema,
           int clause_budget) {
  Cnf out;
  out.clauses = distribute(nnf, schema, clause_budget);
  tidy_clause_list(out.clauses, schema);
  return out;
}

Cnf simplify_cnf(const Cnf& cnf, const ConceptSchema& schema) {
  Cnf out;
  out.clauses.reserve(cnf.clauses.size());
  for (const Clause& c : cnf.clauses) {
    Clause sorted = c;
    std::sort(sorted.literals.begin(), sorted.literals.end());
    sorted.literals.erase(
        std::unique(sorted.literals.begin(), sorted.literals.end()),
        sorted.literals.end());
    out.clauses.push_back(std::move(sorted));
  }
  tidy_clause_list(out.clauses, schema);
  return out;
}

bool cnf_satisfied(const Cnf& cnf, const ConceptVector& c) {
  for (const Clause& clause : cnf.clauses) {
    bool hit = false;
    for (const auto& [concept_index, outcome] : clause.literals) {
      if (c[concept_index] == outcome) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

}  // namespace rulehead
