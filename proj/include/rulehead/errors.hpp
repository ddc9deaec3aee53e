#ifndef RULEHEAD_ERRORS_HPP
#define RULEHEAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rulehead {

// Base of all typed errors thrown by this library. The CLI maps these to
// exit code 2 (compile/config) or 3 (numeric failure, see NumericError).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error("SchemaError", m) {}
};

// Syntax or name-resolution failure in the rule DSL, with 1-based position.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& m)
      : Error("ParseError",
              "line " + std::to_string(line) + ", col " +
                  std::to_string(column) + ": " + m),
        line(line),
        column(column) {}

  int line;
  int column;
};

// The rule set admits no joint concept state.
class UnsatisfiableRule : public Error {
 public:
  explicit UnsatisfiableRule(const std::string& m)
      : Error("UnsatisfiableRule", m) {}
};

// CNF distribution exceeded the clause budget; the AS/vertex heads do not
// need a CNF and remain usable.
class CnfExplosion : public Error {
 public:
  explicit CnfExplosion(const std::string& m) : Error("CnfExplosion", m) {}
};

// Joint state enumeration (or the vertex matrix) would exceed the configured
// budget; reduce the schema or use the constraints head.
class EnumerationBudgetExceeded : public Error {
 public:
  explicit EnumerationBudgetExceeded(const std::string& m)
      : Error("EnumerationBudgetExceeded", m) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error("DimensionError", m) {}
};

// LP has no feasible point. Contradictory rules should have surfaced earlier
// as UnsatisfiableRule; seeing this means the caller skipped compilation.
class InfeasibleLp : public Error {
 public:
  explicit InfeasibleLp(const std::string& m) : Error("InfeasibleLp", m) {}
};

// Runtime numeric failure (NaN loss and the like); CLI exit code 3.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error("NumericError", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("IoError", m) {}
};

}  // namespace rulehead

#endif  // RULEHEAD_ERRORS_HPP
