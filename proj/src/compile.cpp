#include "rulehead/compile.hpp"

#include "rulehead/log.hpp"
#include "rulehead/parser.hpp"

namespace rulehead {

CompiledRules compile_rules(const ConceptSchema& schema, const AstPtr& rule,
                            const CompileOptions& options) {
  ast::validate(*rule, schema);

  ConceptSchema work_schema = schema;
  std::optional<ReducedSchemaMap> reduction;
  AstPtr nnf;
  if (options.reduce) {
    SchemaReduction red = reduce_schema(*rule, schema);
    work_schema = std::move(red.reduced_schema);
    reduction = std::move(red.map);
    nnf = std::move(red.rewritten_ast);
    log::info("reduced joint states from %llu to %llu",
              static_cast<unsigned long long>(schema.joint_count()),
              static_cast<unsigned long long>(work_schema.joint_count()));
  } else {
    nnf = eliminate_negations(*rule, schema);
  }

  CompiledRules out{.original_schema = schema,
                    .schema = std::move(work_schema),
                    .reduction = std::move(reduction),
                    .rule = nnf,
                    .mask = {},
                    .placement = {},
                    .vertices = {},
                    .interior = {},
                    .cnf = {},
                    .system = {},
                    .cnf_error = {}};

  out.mask = admissible_mask(*nnf, out.schema, options.enumeration_budget);
  out.placement = placement_matrix(out.mask);
  out.vertices =
      vertex_matrix(out.mask, out.schema, options.vertex_entry_budget);
  out.interior = interior_point(out.vertices);

  try {
    Cnf cnf = simplify_cnf(to_cnf(*nnf, out.schema, options.clause_budget),
                           out.schema);
    out.system = clauses_to_inequalities(cnf, out.schema);
    out.cnf = std::move(cnf);
  } catch (const CnfExplosion& e) {
    out.cnf_error = e.what();
    log::info("CNF unavailable: %s", e.what());
  }
  return out;
}

CompiledRules compile_rule_text(const ConceptSchema& schema,
                                const std::string& rule_text,
                                const CompileOptions& options) {
  return compile_rules(schema, parse_rules(rule_text, schema), options);
}

}  // namespace rulehead
