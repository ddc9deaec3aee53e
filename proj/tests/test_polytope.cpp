#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rulehead/compile.hpp"
#include "test_support.hpp"

using namespace rulehead;
using namespace rulehead::testing;

namespace {

CompiledRules compile_woodpecker() {
  const ConceptSchema wood = woodpecker_schema();
  return compile_rule_text(wood, woodpecker_rule_text());
}

MarginalVector woodpecker_centroid() {
  MarginalVector p(7);
  p << 0.6, 0.4, 0.4, 0.6, 0.4, 0.3, 0.3;
  return p;
}

}  // namespace

TEST_CASE("the woodpecker clause becomes the expected row") {
  const CompiledRules compiled = compile_woodpecker();
  REQUIRE(compiled.system.has_value());
  const InequalitySystem& sys = *compiled.system;
  REQUIRE(sys.clause_count() == 1);
  CHECK(sys.clause_rows[0] == std::vector<int>{0, 3, 4});

  const Eigen::MatrixXd dense = sys.dense_clause_matrix();
  Eigen::VectorXd expected(7);
  expected << 1, 0, 0, 1, 1, 0, 0;
  CHECK((dense.row(0).transpose() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a single-literal clause pins its block") {
  const ConceptSchema wood = woodpecker_schema();
  Cnf cnf;
  cnf.clauses.push_back(Clause{{{0, 1}}});
  const InequalitySystem sys = clauses_to_inequalities(cnf, wood);

  MarginalVector p = woodpecker_centroid();
  CHECK(!contains(sys, p, 1e-9));
  p[0] = 1.0;
  p[1] = 0.0;
  CHECK(contains(sys, p, 1e-9));
}

TEST_CASE("membership agrees with the running example") {
  const CompiledRules compiled = compile_woodpecker();
  const InequalitySystem& sys = *compiled.system;

  CHECK(contains(sys, woodpecker_centroid(), 1e-9));

  MarginalVector state8(7);  // one-hot of (2,1,2), inadmissible
  state8 << 0, 1, 1, 0, 0, 1, 0;
  CHECK(!contains(sys, state8, 1e-9));

  for (int col = 0; col < compiled.vertices.cols(); ++col) {
    CHECK(contains(sys, compiled.vertices.col(col), 1e-9));
  }
}

TEST_CASE("clause rows hold for marginals of admissible joint distributions") {
  const CompiledRules compiled = compile_woodpecker();
  const InequalitySystem& sys = *compiled.system;
  Rng rng(41);
  for (int trial = 0; trial < 10000; ++trial) {
    Eigen::VectorXd tilde(10);
    for (int i = 0; i < 10; ++i) tilde[i] = rng.uniform() + 1e-12;
    tilde /= tilde.sum();
    const MarginalVector p = marginalize(
        apply_placement(compiled.placement, tilde, 12), compiled.schema);
    for (const std::vector<int>& row : sys.clause_rows) {
      double sum = 0.0;
      for (int idx : row) sum += p[idx];
      CHECK(sum >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("lp_max on the woodpecker system") {
  const CompiledRules compiled = compile_woodpecker();
  const InequalitySystem& sys = *compiled.system;

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(7);
  e1[0] = 1.0;
  CHECK(lp_max(sys, e1).value == doctest::Approx(1.0).epsilon(1e-9));

  const LpResult zero = lp_max(sys, Eigen::VectorXd::Zero(7));
  CHECK(zero.value == doctest::Approx(0.0));
  CHECK(contains(sys, zero.point, 1e-7));
}

TEST_CASE("H- and V-representations agree on random instances") {
  Rng rng(43);
  int done = 0;
  while (done < 15) {
    const ConceptSchema schema = random_schema(rng);
    const AstPtr rule = random_satisfiable_ast(rng, schema, 4);
    std::optional<CompiledRules> compiled;
    try {
      compiled = compile_rules(schema, rule);
    } catch (const UnsatisfiableRule&) {
      continue;
    }
    if (!compiled->system) continue;
    const InequalitySystem& sys = *compiled->system;

    for (int col = 0; col < compiled->vertices.cols(); ++col) {
      CHECK(contains(sys, compiled->vertices.col(col), 1e-9));
    }
    for (int obj_trial = 0; obj_trial < 10; ++obj_trial) {
      Eigen::VectorXd objective(schema.total_width());
      for (Eigen::Index i = 0; i < objective.size(); ++i) {
        objective[i] = rng.uniform(-1.0, 1.0);
      }
      const double lp_value = lp_max(sys, objective).value;
      const double vertex_value =
          (compiled->vertices.transpose() * objective).maxCoeff();
      CHECK(lp_value == doctest::Approx(vertex_value).epsilon(1e-6));
    }
    ++done;
  }
}

TEST_CASE("contradictory clauses are infeasible") {
  const ConceptSchema wood = woodpecker_schema();
  Cnf cnf;
  cnf.clauses.push_back(Clause{{{0, 1}}});
  cnf.clauses.push_back(Clause{{{0, 2}}});
  const InequalitySystem sys = clauses_to_inequalities(cnf, wood);
  CHECK_THROWS_AS(lp_max(sys, Eigen::VectorXd::Zero(7)), InfeasibleLp);
}

TEST_CASE("interior point is the vertex centroid with frozen detection") {
  const CompiledRules compiled = compile_woodpecker();
  const InteriorPoint& x0 = compiled.interior;
  CHECK((x0.point - woodpecker_centroid()).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 7; ++i) CHECK(!x0.is_frozen(i));

  // A rule that pins concept 0 freezes its whole block.
  const ConceptSchema wood = woodpecker_schema();
  const CompiledRules pinned = compile_rule_text(wood, "bird = rhw");
  CHECK(pinned.interior.is_frozen(0));
  CHECK(pinned.interior.is_frozen(1));
  CHECK(pinned.interior.point[0] == doctest::Approx(1.0));
  CHECK(pinned.interior.point[1] == doctest::Approx(0.0));
  CHECK(!pinned.interior.is_frozen(2));

  // A fully determined rule freezes everything.
  const CompiledRules fixed = compile_rule_text(
      wood, "bird = rhw AND head = red AND bill = chisel");
  CHECK(fixed.mask.admissible_count == 1);
  for (int i = 0; i < 7; ++i) CHECK(fixed.interior.is_frozen(i));
}

TEST_CASE("map_to_polytope stays inside for random rays") {
  const CompiledRules compiled = compile_woodpecker();
  const InequalitySystem& sys = *compiled.system;
  const InteriorPoint& x0 = compiled.interior;

  CHECK((map_to_polytope(Eigen::VectorXd::Zero(7), 0.5, x0, sys) - x0.point)
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  Rng rng(47);
  Eigen::VectorXd small_dir(7);
  for (int i = 0; i < 7; ++i) small_dir[i] = rng.uniform(-1.0, 1.0);
  CHECK((map_to_polytope(small_dir, 1e-9, x0, sys) - x0.point)
            .cwiseAbs()
            .maxCoeff() < 1e-6);

  for (int trial = 0; trial < 10000; ++trial) {
    Eigen::VectorXd dir(7);
    for (int i = 0; i < 7; ++i) dir[i] = rng.uniform(-1.0, 1.0);
    const double gate = rng.uniform(1e-6, 1.0 - 1e-6);
    const MarginalVector p = map_to_polytope(dir, gate, x0, sys);
    CHECK(contains(sys, p, 1e-9));
    CHECK(is_valid_marginal(compiled.schema, p, 1e-9));
  }
}

TEST_CASE("map_to_polytope respects frozen coordinates") {
  const ConceptSchema wood = woodpecker_schema();
  const CompiledRules pinned = compile_rule_text(wood, "bird = rhw");
  const InequalitySystem& sys = *pinned.system;
  Rng rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd dir(7);
    for (int i = 0; i < 7; ++i) dir[i] = rng.uniform(-1.0, 1.0);
    const MarginalVector p = map_to_polytope(dir, 0.9, pinned.interior, sys);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(contains(sys, p, 1e-9));
  }
}
