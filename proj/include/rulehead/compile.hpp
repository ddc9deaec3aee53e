#ifndef RULEHEAD_COMPILE_HPP
#define RULEHEAD_COMPILE_HPP

#include <optional>
#include <string>

#include "rulehead/polytope.hpp"
#include "rulehead/state_space.hpp"

namespace rulehead {

struct CompileOptions {
  std::uint64_t enumeration_budget = kDefaultEnumerationBudget;
  int clause_budget = kDefaultClauseBudget;
  std::uint64_t vertex_entry_budget = 1ull << 24;
  bool reduce = false;
};

// Everything the heads need, compiled once per (schema, rule) pair and
// immutable afterwards. When `reduction` is set, `schema`, the mask, the
// matrices and the system all live on the reduced schema; `original_schema`
// keeps the user's view.
struct CompiledRules {
  ConceptSchema original_schema;
  ConceptSchema schema;
  std::optional<ReducedSchemaMap> reduction;
  AstPtr rule;  // negation-free, over `schema`

  AdmissibleMask mask;
  PlacementMatrix placement;
  Eigen::MatrixXd vertices;
  InteriorPoint interior;

  // Absent when CNF conversion blew the clause budget; the base, AS and
  // vertex heads still work, the constraints head does not.
  std::optional<Cnf> cnf;
  std::optional<InequalitySystem> system;
  std::optional<std::string> cnf_error;

  std::uint64_t t() const { return schema.joint_count(); }
  std::uint64_t d() const { return mask.admissible_count; }
  int s() const { return schema.total_width(); }
};

CompiledRules compile_rules(const ConceptSchema& schema, const AstPtr& rule,
                            const CompileOptions& options = {});

// Parses the rule text first; convenience for the CLI path.
CompiledRules compile_rule_text(const ConceptSchema& schema,
                                const std::string& rule_text,
                                const CompileOptions& options = {});

}  // namespace rulehead

#endif  // RULEHEAD_COMPILE_HPP
