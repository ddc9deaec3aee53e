#include "rulehead/parser.hpp"

#include <cctype>
#include <sstream>
#include <vector>

namespace rulehead {

namespace {

enum class Tok {
  Ident,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Equals,
  Arrow,    // ->
  DArrow,   // <->
  Pipe,
  Amp,
  Bang,
  Separator,  // ';' or a rule-terminating newline
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    int paren_depth = 0;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      if (c == '\n') {
        // Newlines separate rules only at the top level.
        if (paren_depth == 0) push(out, Tok::Separator, "\n");
        advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (ident_char(c)) {
        const int line = line_, col = col_;
        std::string word;
        while (pos_ < text_.size() && ident_char(text_[pos_])) {
          word.push_back(text_[pos_]);
          advance();
        }
        out.push_back({Tok::Ident, std::move(word), line, col});
        continue;
      }
      switch (c) {
        case '(':
          ++paren_depth;
          push(out, Tok::LParen, "(");
          advance();
          break;
        case ')':
          if (paren_depth > 0) --paren_depth;
          push(out, Tok::RParen, ")");
          advance();
          break;
        case '{':
          push(out, Tok::LBrace, "{");
          advance();
          break;
        case '}':
          push(out, Tok::RBrace, "}");
          advance();
          break;
        case ',':
          push(out, Tok::Comma, ",");
          advance();
          break;
        case '=':
          push(out, Tok::Equals, "=");
          advance();
          break;
        case ';':
          push(out, Tok::Separator, ";");
          advance();
          break;
        case '|':
          push(out, Tok::Pipe, "|");
          advance();
          break;
        case '&':
          push(out, Tok::Amp, "&");
          advance();
          break;
        case '!':
          push(out, Tok::Bang, "!");
          advance();
          break;
        case '-': {
          const int line = line_, col = col_;
          advance();
          if (pos_ < text_.size() && text_[pos_] == '>') {
            advance();
            out.push_back({Tok::Arrow, "->", line, col});
          } else {
            throw ParseError(line, col, "expected '->' after '-'");
          }
          break;
        }
        case '<': {
          const int line = line_, col = col_;
          advance();
          if (pos_ + 1 < text_.size() && text_[pos_] == '-' &&
              text_[pos_ + 1] == '>') {
            advance();
            advance();
            out.push_back({Tok::DArrow, "<->", line, col});
          } else {
            throw ParseError(line, col, "expected '<->' after '<'");
          }
          break;
        }
        default:
          throw ParseError(line_, col_,
                           std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({Tok::End, "", line_, col_});
    return out;
  }

 private:
  void push(std::vector<Token>& out, Tok kind, const char* text) {
    out.push_back({kind, text, line_, col_});
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

std::string upper(std::string_view s) {
  std::string r(s);
  for (char& c : r) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return r;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const ConceptSchema& schema)
      : tokens_(std::move(tokens)), schema_(schema) {}

  AstPtr parse_file() {
    std::vector<AstPtr> rules;
    skip_separators();
    while (peek().kind != Tok::End) {
      rules.push_back(parse_expr());
      if (peek().kind != Tok::End) expect_separator();
      skip_separators();
    }
    if (rules.empty()) {
      throw ParseError(1, 1, "no rules found");
    }
    if (rules.size() == 1) return rules.front();
    return ast::and_(std::move(rules));
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  Token take() { return tokens_[pos_++]; }

  bool is_keyword(const Token& t, const char* kw) const {
    return t.kind == Tok::Ident && upper(t.text) == kw;
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.line, t.col, msg);
  }

  void skip_separators() {
    while (peek().kind == Tok::Separator) take();
  }

  void expect_separator() {
    if (peek().kind != Tok::Separator) {
      fail(peek(), "expected end of rule, got '" + describe(peek()) + "'");
    }
  }

  static std::string describe(const Token& t) {
    return t.kind == Tok::End ? "end of input" : t.text;
  }

  AstPtr parse_expr() { return parse_iff(); }

  AstPtr parse_iff() {
    AstPtr left = parse_impl();
    while (peek().kind == Tok::DArrow) {
      take();
      left = ast::iff(std::move(left), parse_impl());
    }
    return left;
  }

  AstPtr parse_impl() {
    if (is_keyword(peek(), "IF")) {
      take();
      AstPtr antecedent = parse_or();
      if (!is_keyword(peek(), "THEN")) {
        fail(peek(), "expected THEN");
      }
      take();
      return ast::implies(std::move(antecedent), parse_impl());
    }
    AstPtr left = parse_or();
    if (peek().kind == Tok::Arrow) {
      take();
      return ast::implies(std::move(left), parse_impl());
    }
    return left;
  }

  AstPtr parse_or() {
    std::vector<AstPtr> parts;
    parts.push_back(parse_and());
    while (peek().kind == Tok::Pipe || is_keyword(peek(), "OR")) {
      take();
      parts.push_back(parse_and());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return ast::or_(std::move(parts));
  }

  AstPtr parse_and() {
    std::vector<AstPtr> parts;
    parts.push_back(parse_unary());
    while (peek().kind == Tok::Amp || is_keyword(peek(), "AND")) {
      take();
      parts.push_back(parse_unary());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return ast::and_(std::move(parts));
  }

  AstPtr parse_unary() {
    if (peek().kind == Tok::Bang || is_keyword(peek(), "NOT")) {
      take();
      return ast::not_(parse_unary());
    }
    return parse_atom();
  }

  AstPtr parse_atom() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      take();
      AstPtr inner = parse_expr();
      if (peek().kind != Tok::RParen) fail(peek(), "expected ')'");
      take();
      return inner;
    }
    if (t.kind == Tok::Ident) {
      const std::string kw = upper(t.text);
      if (kw == "TRUE") {
        take();
        return ast::const_true();
      }
      if (kw == "FALSE") {
        take();
        return ast::const_false();
      }
      return parse_literal();
    }
    fail(t, "expected a literal, TRUE, FALSE, or '('; got '" + describe(t) +
               "'");
  }

  AstPtr parse_literal() {
    const Token name = take();
    const auto concept_index = schema_.find_concept(name.text);
    if (!concept_index) {
      fail(name, "unknown concept '" + name.text + "'");
    }
    bool multi = false;
    if (peek().kind == Tok::Equals) {
      take();
    } else if (is_keyword(peek(), "IN")) {
      take();
      multi = true;
    } else {
      fail(peek(), "expected '=' or IN after concept '" + name.text + "'");
    }
    std::vector<int> outcomes;
    if (multi && peek().kind == Tok::LBrace) {
      const Token open = take();
      if (peek().kind == Tok::RBrace) {
        fail(open, "empty value set for concept '" + name.text + "'");
      }
      outcomes.push_back(parse_value(*concept_index, name.text));
      while (peek().kind == Tok::Comma) {
        take();
        outcomes.push_back(parse_value(*concept_index, name.text));
      }
      if (peek().kind != Tok::RBrace) fail(peek(), "expected '}' or ','");
      take();
    } else {
      outcomes.push_back(parse_value(*concept_index, name.text));
    }
    return ast::lit(*concept_index, std::move(outcomes));
  }

  int parse_value(int concept_index, const std::string& concept_name) {
    if (peek().kind != Tok::Ident) {
      fail(peek(), "expected a value name for concept '" + concept_name +
                       "'");
    }
    const Token val = take();
    const auto idx = schema_.find_value(concept_index, val.text);
    if (!idx) {
      fail(val, "unknown value '" + val.text + "' for concept '" +
                    concept_name + "'");
    }
    return *idx;
  }

  std::vector<Token> tokens_;
  const ConceptSchema& schema_;
  size_t pos_ = 0;
};

void format_node(const RuleAst& node, const ConceptSchema& schema,
                 std::ostringstream& out) {
  using Kind = RuleAst::Kind;
  const auto wrap = [&](const RuleAst& child) {
    out << '(';
    format_node(child, schema, out);
    out << ')';
  };
  switch (node.kind) {
    case Kind::Literal: {
      const AstLiteral& l = node.literal;
      const Concept& c = schema.concept_at(l.concept_index);
      if (l.outcomes.size() == 1) {
        out << c.name << " = " << c.values[l.outcomes[0] - 1];
      } else {
        out << c.name << " IN {";
        for (size_t i = 0; i < l.outcomes.size(); ++i) {
          if (i > 0) out << ", ";
          out << c.values[l.outcomes[i] - 1];
        }
        out << '}';
      }
      break;
    }
    case Kind::Not:
      out << "NOT ";
      wrap(*node.children[0]);
      break;
    case Kind::And:
    case Kind::Or: {
      const char* op = node.kind == Kind::And ? " AND " : " OR ";
      for (size_t i = 0; i < node.children.size(); ++i) {
        if (i > 0) out << op;
        wrap(*node.children[i]);
      }
      break;
    }
    case Kind::Implies:
      wrap(*node.children[0]);
      out << " -> ";
      wrap(*node.children[1]);
      break;
    case Kind::Iff:
      wrap(*node.children[0]);
      out << " <-> ";
      wrap(*node.children[1]);
      break;
    case Kind::ConstTrue:
      out << "TRUE";
      break;
    case Kind::ConstFalse:
      out << "FALSE";
      break;
  }
}

}  // namespace

AstPtr parse_rules(std::string_view text, const ConceptSchema& schema) {
  if (text.empty()) throw ParseError(1, 1, "empty rule text");
  Lexer lexer(text);
  Parser parser(lexer.run(), schema);
  AstPtr root = parser.parse_file();
  ast::validate(*root, schema);
  return root;
}

std::string format_ast(const RuleAst& node, const ConceptSchema& schema) {
  std::ostringstream out;
  format_node(node, schema, out);
  return out.str();
}

}  // namespace rulehead
