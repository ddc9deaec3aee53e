#ifndef RULEHEAD_TEST_SUPPORT_HPP
#define RULEHEAD_TEST_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rulehead/compile.hpp"
#include "rulehead/logic.hpp"
#include "rulehead/parser.hpp"
#include "rulehead/schema.hpp"
#include "rulehead/state_space.hpp"

namespace rulehead::testing {

// --- Fixtures ---------------------------------------------------------------

// bird in {rhw, egw}; head in {red, green}; bill in {chisel, dagger,
// allpurpose}. t = 12, s = 7.
inline ConceptSchema woodpecker_schema() {
  return ConceptSchema({{"bird", {"rhw", "egw"}},
                        {"head", {"red", "green"}},
                        {"bill", {"chisel", "dagger", "allpurpose"}}});
}

inline const char* woodpecker_rule_text() {
  return "IF head = red AND bill IN {dagger, allpurpose} THEN bird = rhw";
}

// y in {1,2}; c1 in {1,2}; c2, c3 in {1,2,3}. t = 36, s = 10.
inline ConceptSchema toy_schema() {
  return ConceptSchema({{"y", {"1", "2"}},
                        {"c1", {"1", "2"}},
                        {"c2", {"1", "2", "3"}},
                        {"c3", {"1", "2", "3"}}});
}

inline const char* toy_iff_rule_text() {
  return "y = 2 <-> (c1 = 2 AND c2 = 2)";
}

inline const char* toy_implication_rule_text() {
  return "IF c1 = 2 AND c2 = 2 THEN y = 2";
}

// --- Deterministic randomness ------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  int range(int lo, int hi) { return lo + below(hi - lo + 1); }

  double uniform() { return std::ldexp(static_cast<double>(next() >> 11), -53); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; keeps results identical across standard libraries.
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// --- Random instances ---------------------------------------------------------

inline ConceptSchema random_schema(Rng& rng, int max_concepts = 4,
                                   int max_outcomes = 4) {
  const int count = rng.range(2, max_concepts);
  std::vector<Concept> concepts;
  for (int i = 0; i < count; ++i) {
    Concept c;
    c.name = "k" + std::to_string(i);
    const int n = rng.range(2, max_outcomes);
    for (int v = 1; v <= n; ++v) c.values.push_back(std::to_string(v));
    concepts.push_back(std::move(c));
  }
  return ConceptSchema(std::move(concepts));
}

inline AstPtr random_ast(Rng& rng, const ConceptSchema& schema, int depth) {
  const auto random_literal = [&]() {
    const int i = rng.below(schema.concept_count());
    const int n = schema.outcome_count(i);
    std::vector<int> outcomes;
    for (int v = 1; v <= n; ++v) {
      if (rng.chance(0.45)) outcomes.push_back(v);
    }
    if (outcomes.empty()) outcomes.push_back(rng.range(1, n));
    return ast::lit(i, std::move(outcomes));
  };
  if (depth <= 0 || rng.chance(0.3)) {
    if (rng.chance(0.04)) {
      return rng.chance(0.5) ? ast::const_true() : ast::const_false();
    }
    return random_literal();
  }
  switch (rng.below(5)) {
    case 0:
      return ast::not_(random_ast(rng, schema, depth - 1));
    case 1: {
      std::vector<AstPtr> xs;
      const int n = rng.range(2, 3);
      for (int i = 0; i < n; ++i) xs.push_back(random_ast(rng, schema, depth - 1));
      return ast::and_(std::move(xs));
    }
    case 2: {
      std::vector<AstPtr> xs;
      const int n = rng.range(2, 3);
      for (int i = 0; i < n; ++i) xs.push_back(random_ast(rng, schema, depth - 1));
      return ast::or_(std::move(xs));
    }
    case 3:
      return ast::implies(random_ast(rng, schema, depth - 1),
                          random_ast(rng, schema, depth - 1));
    default:
      return ast::iff(random_ast(rng, schema, depth - 1),
                      random_ast(rng, schema, depth - 1));
  }
}

// Resamples until at least one joint state satisfies the rule.
inline AstPtr random_satisfiable_ast(Rng& rng, const ConceptSchema& schema,
                                     int depth, bool require_mention = false) {
  for (;;) {
    AstPtr candidate = random_ast(rng, schema, depth);
    bool any = false;
    bool all = true;
    const std::uint64_t t = schema.joint_count();
    for (std::uint64_t k = 1; k <= t; ++k) {
      if (evaluate(*candidate, decode_state(k, schema))) {
        any = true;
      } else {
        all = false;
      }
    }
    if (!any) continue;
    if (require_mention && all) continue;  // constant-true rules mention nothing
    return candidate;
  }
}

// --- Oracles -----------------------------------------------------------------

// Brute-force admissible bits straight from the evaluator; the independent
// route against which mask construction and CNF satisfaction are checked.
inline std::vector<std::uint8_t> truth_table_bits(const RuleAst& ast,
                                                  const ConceptSchema& schema) {
  const std::uint64_t t = schema.joint_count();
  std::vector<std::uint8_t> bits(t);
  for (std::uint64_t k = 1; k <= t; ++k) {
    bits[k - 1] = evaluate(ast, decode_state(k, schema)) ? 1 : 0;
  }
  return bits;
}

inline std::vector<std::uint8_t> cnf_bits(const Cnf& cnf,
                                          const ConceptSchema& schema) {
  const std::uint64_t t = schema.joint_count();
  std::vector<std::uint8_t> bits(t);
  for (std::uint64_t k = 1; k <= t; ++k) {
    bits[k - 1] = cnf_satisfied(cnf, decode_state(k, schema)) ? 1 : 0;
  }
  return bits;
}

// True when the projected ray has two near-tying walls or nearly vanishes;
// the constraints-head subgradient is undefined there and finite
// differences straddle the kink.
inline bool constraints_point_degenerate(const CompiledRules& c,
                                         const Eigen::VectorXd& raw) {
  const InequalitySystem& sys = *c.system;
  const RayCast ray = cast_ray(raw, c.interior, sys);
  if (ray.degenerate || ray.norm < 1e-6) return true;
  std::vector<double> ratios;
  for (const std::vector<int>& row : sys.clause_rows) {
    double rate = 0.0, value = 0.0;
    for (int idx : row) {
      rate += ray.unit_direction[idx];
      value += c.interior.point[idx];
    }
    if (rate < -1e-12) ratios.push_back((value - 1.0) / -rate);
  }
  for (int i = 0; i < sys.width; ++i) {
    if (ray.unit_direction[i] < -1e-12) {
      ratios.push_back(c.interior.point[i] / -ray.unit_direction[i]);
    }
  }
  std::sort(ratios.begin(), ratios.end());
  return ratios.size() >= 2 &&
         ratios[1] - ratios[0] < 1e-4 * std::max(1.0, ratios[0]);
}

// Central finite differences against an analytic gradient. Returns the
// worst relative error over all coordinates, with an absolute floor so
// near-zero entries do not explode the ratio.
inline double gradient_check(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, const Eigen::VectorXd& analytic,
    double h = 1e-5) {
  double worst = 0.0;
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace rulehead::testing

#endif  // RULEHEAD_TEST_SUPPORT_HPP
