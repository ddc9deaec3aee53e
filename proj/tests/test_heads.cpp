#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rulehead/heads.hpp"
#include "test_support.hpp"

using namespace rulehead;
using namespace rulehead::testing;

namespace {

std::shared_ptr<const CompiledRules> compiled_woodpecker() {
  static auto compiled = std::make_shared<CompiledRules>(
      compile_rule_text(woodpecker_schema(), woodpecker_rule_text()));
  return compiled;
}

MarginalVector woodpecker_centroid() {
  MarginalVector p(7);
  p << 0.6, 0.4, 0.4, 0.6, 0.4, 0.3, 0.3;
  return p;
}

Eigen::VectorXd random_vector(Rng& rng, int n, double lo = -2.0,
                              double hi = 2.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("base head: uniform logits give the admissible-uniform marginals") {
  const auto c = compiled_woodpecker();
  const MarginalVector p =
      base_head_forward(Eigen::VectorXd::Zero(12), c->mask, c->schema);
  CHECK((p - woodpecker_centroid()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("base head with an all-ones mask is plain softmax marginalization") {
  const ConceptSchema wood = woodpecker_schema();
  AdmissibleMask ones;
  ones.bits.assign(12, 1);
  ones.admissible_count = 12;
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(12);
  logits[0] = std::log(2.0);
  const MarginalVector p = base_head_forward(logits, ones, wood);
  const MarginalVector expected = marginalize(softmax(logits), wood);
  CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inadmissible logits cannot influence the base head") {
  const auto c = compiled_woodpecker();
  Rng rng(59);
  Eigen::VectorXd logits = random_vector(rng, 12);
  Eigen::VectorXd loud = logits, quiet = logits;
  loud[7] = 20.0;   // state 8 is inadmissible
  quiet[7] = -20.0;
  const MarginalVector a = base_head_forward(loud, c->mask, c->schema);
  const MarginalVector b = base_head_forward(quiet, c->mask, c->schema);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("AS head equals the base head with masked-out logits") {
  const auto c = compiled_woodpecker();
  Rng rng(61);
  const Eigen::VectorXd as_logits = random_vector(rng, 10);

  Eigen::VectorXd base_logits = Eigen::VectorXd::Constant(12, -1e6);
  for (Eigen::Index k = 0; k < 10; ++k) {
    base_logits[static_cast<Eigen::Index>(c->placement.state_index[k] - 1)] =
        as_logits[k];
  }
  const MarginalVector via_as =
      as_head_forward(as_logits, c->placement, c->schema);
  const MarginalVector via_base =
      base_head_forward(base_logits, c->mask, c->schema);
  CHECK((via_as - via_base).cwiseAbs().maxCoeff() < 1e-12);

  const MarginalVector uniform =
      as_head_forward(Eigen::VectorXd::Zero(10), c->placement, c->schema);
  CHECK((uniform - woodpecker_centroid()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("AS head with a single admissible state ignores its logit") {
  const ConceptSchema wood = woodpecker_schema();
  const auto fixed = std::make_shared<CompiledRules>(compile_rule_text(
      wood, "bird = rhw AND head = red AND bill = chisel"));
  Eigen::VectorXd logit(1);
  logit << 3.7;
  const MarginalVector p = as_head_forward(logit, fixed->placement, wood);
  MarginalVector expected(7);
  expected << 1, 0, 1, 0, 1, 0, 0;
  CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vertex head matches the AS head everywhere") {
  const auto c = compiled_woodpecker();
  Rng rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd logits = random_vector(rng, 10, -5.0, 5.0);
    const MarginalVector via_vertex = vertex_head_forward(logits, c->vertices);
    const MarginalVector via_as =
        as_head_forward(logits, c->placement, c->schema);
    CHECK((via_vertex - via_as).cwiseAbs().maxCoeff() < 1e-12);
  }

  // Saturated softmax selects a single vertex column.
  Eigen::VectorXd saturated = Eigen::VectorXd::Zero(10);
  saturated[3] = 40.0;
  const MarginalVector p = vertex_head_forward(saturated, c->vertices);
  CHECK((p - c->vertices.col(3)).cwiseAbs().maxCoeff() < 1e-12);

  // Uniform logits give the interior point.
  const MarginalVector centroid =
      vertex_head_forward(Eigen::VectorXd::Zero(10), c->vertices);
  CHECK((centroid - c->interior.point).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constraints head output is always a member") {
  const auto c = compiled_woodpecker();
  const InequalitySystem& sys = *c->system;

  Eigen::VectorXd input = Eigen::VectorXd::Zero(8);
  input[7] = -40.0;  // gate ~ 0
  const MarginalVector at_gate0 =
      constraints_head_forward(input.head(7), input[7], sys, c->interior);
  CHECK((at_gate0 - c->interior.point).cwiseAbs().maxCoeff() < 1e-12);

  Rng rng(71);
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::VectorXd raw = random_vector(rng, 7, -3.0, 3.0);
    const double gate_raw = rng.uniform(-6.0, 6.0);
    const MarginalVector p =
        constraints_head_forward(raw, gate_raw, sys, c->interior);
    CHECK(contains(sys, p, 1e-9));
  }
}

TEST_CASE("constraints head keeps frozen coordinates at x0") {
  const ConceptSchema wood = woodpecker_schema();
  const auto pinned =
      std::make_shared<CompiledRules>(compile_rule_text(wood, "bird = rhw"));
  const HeadSpec head = make_head(HeadKind::Constraints, pinned);
  Rng rng(73);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd input = random_vector(rng, 8, -3.0, 3.0);
    const MarginalVector p = head_forward(head, input);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("head_forward outputs are valid marginals for every head") {
  const auto c = compiled_woodpecker();
  Rng rng(79);
  for (const HeadKind kind : {HeadKind::Base, HeadKind::AdmissibleState,
                              HeadKind::Vertex, HeadKind::Constraints}) {
    const HeadSpec head = make_head(kind, c);
    for (int trial = 0; trial < 500; ++trial) {
      const Eigen::VectorXd input =
          random_vector(rng, head.input_width(), -4.0, 4.0);
      const MarginalVector p = head_forward(head, input);
      CHECK(is_valid_marginal(c->schema, p, 1e-9));
      CHECK(contains(*c->system, p, 1e-6));
    }
  }
}

TEST_CASE("head VJPs match central finite differences") {
  const auto c = compiled_woodpecker();
  Rng rng(83);
  for (const HeadKind kind : {HeadKind::Base, HeadKind::AdmissibleState,
                              HeadKind::Vertex, HeadKind::Constraints}) {
    CAPTURE(head_kind_name(kind));
    const HeadSpec head = make_head(kind, c);
    int done = 0;
    while (done < 20) {
      const Eigen::VectorXd input =
          random_vector(rng, head.input_width(), -2.0, 2.0);
      if (kind == HeadKind::Constraints &&
          constraints_point_degenerate(*c, input.head(7))) {
        continue;
      }
      const Eigen::VectorXd cotangent = random_vector(rng, 7, -1.0, 1.0);
      const Eigen::VectorXd analytic = head_backward(head, input, cotangent);
      const auto scalar = [&](const Eigen::VectorXd& x) {
        return cotangent.dot(head_forward(head, x));
      };
      const double err = gradient_check(scalar, input, analytic);
      CHECK(err < 1e-4);
      ++done;
    }
  }
}

TEST_CASE("zero cotangent gives zero gradient") {
  const auto c = compiled_woodpecker();
  Rng rng(89);
  for (const HeadKind kind : {HeadKind::Base, HeadKind::AdmissibleState,
                              HeadKind::Vertex, HeadKind::Constraints}) {
    const HeadSpec head = make_head(kind, c);
    const Eigen::VectorXd input =
        random_vector(rng, head.input_width(), -2.0, 2.0);
    const Eigen::VectorXd grad =
        head_backward(head, input, Eigen::VectorXd::Zero(7));
    CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("independent head is per-block softmax") {
  const auto schema = std::make_shared<ConceptSchema>(woodpecker_schema());
  const HeadSpec head = make_independent_head(schema);
  CHECK(head.input_width() == 7);
  Rng rng(97);
  const Eigen::VectorXd input = random_vector(rng, 7);
  const MarginalVector p = head_forward(head, input);
  CHECK(is_valid_marginal(*schema, p, 1e-12));
  CHECK((p.segment(0, 2) - softmax(input.segment(0, 2))).cwiseAbs().maxCoeff() <
        1e-15);

  const Eigen::VectorXd cotangent = random_vector(rng, 7);
  const Eigen::VectorXd analytic = head_backward(head, input, cotangent);
  const auto scalar = [&](const Eigen::VectorXd& x) {
    return cotangent.dot(head_forward(head, x));
  };
  CHECK(gradient_check(scalar, input, analytic) < 1e-4);
}

TEST_CASE("reduced heads expand to the original schema and stay feasible") {
  // Partial mentions: concept 0 untouched, c1 compressed (1 replaced),
  // c3 compressed (2 replaced).
  ConceptSchema schema({{"c0", {"a", "b"}},
                        {"c1", {"v1", "v2", "v3"}},
                        {"c3", {"w1", "w2", "w3", "w4"}}});
  const std::string rule = "c1 = v1 OR c3 IN {w2, w4}";

  CompileOptions reduce_opts;
  reduce_opts.reduce = true;
  const auto reduced = std::make_shared<CompiledRules>(
      compile_rule_text(schema, rule, reduce_opts));
  const auto plain =
      std::make_shared<CompiledRules>(compile_rule_text(schema, rule));

  REQUIRE(reduced->reduction.has_value());
  Rng rng(101);
  for (const HeadKind kind : {HeadKind::Base, HeadKind::AdmissibleState,
                              HeadKind::Vertex, HeadKind::Constraints}) {
    CAPTURE(head_kind_name(kind));
    const HeadSpec head = make_head(kind, reduced);
    CHECK(head.output_width() == schema.total_width());
    int done = 0;
    while (done < 10) {
      const Eigen::VectorXd input =
          random_vector(rng, head.input_width(), -2.0, 2.0);
      if (kind == HeadKind::Constraints) {
        const int core = core_input_width(kind, *reduced);
        if (constraints_point_degenerate(*reduced,
                                         input.head(core - 1))) {
          continue;
        }
      }
      const MarginalVector p = head_forward(head, input);
      CHECK(is_valid_marginal(schema, p, 1e-9));
      CHECK(contains(*plain->system, p, 1e-6));

      const Eigen::VectorXd cotangent =
          random_vector(rng, schema.total_width(), -1.0, 1.0);
      const Eigen::VectorXd analytic = head_backward(head, input, cotangent);
      const auto scalar = [&](const Eigen::VectorXd& x) {
        return cotangent.dot(head_forward(head, x));
      };
      CHECK(gradient_check(scalar, input, analytic) < 1e-4);
      ++done;
    }
  }
}
