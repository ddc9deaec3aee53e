#ifndef RULEHEAD_PARSER_HPP
#define RULEHEAD_PARSER_HPP

#include <string>
#include <string_view>

#include "rulehead/rule_ast.hpp"

namespace rulehead {

// Parses a rule file against a schema. Rules are separated by newlines or
// ';' and are conjoined into a single AST; '#' starts a line comment.
// Newlines inside parentheses do not terminate a rule.
//
// Grammar (keywords case-insensitive):
//   expr    := iff
//   iff     := impl ("<->" impl)*                  left-associative
//   impl    := "IF" or "THEN" impl
//            | or ("->" impl)?                     right-associative
//   or      := and (("OR" | "|") and)*
//   and     := unary (("AND" | "&") unary)*
//   unary   := ("NOT" | "!") unary | atom
//   atom    := "TRUE" | "FALSE" | literal | "(" expr ")"
//   literal := IDENT ("=" | "IN") (IDENT | "{" IDENT ("," IDENT)* "}")
//
// Throws ParseError with 1-based line/column on any syntax error, unknown
// concept or value name, or empty value set.
AstPtr parse_rules(std::string_view text, const ConceptSchema& schema);

// Canonical text form; parse_rules(format_ast(a)) is structurally equal
// to a.
std::string format_ast(const RuleAst& ast, const ConceptSchema& schema);

}  // namespace rulehead

#endif  // RULEHEAD_PARSER_HPP
