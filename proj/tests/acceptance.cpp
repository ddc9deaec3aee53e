// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one pass/fail line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "rulehead/compile.hpp"
#include "rulehead/experiments.hpp"
#include "rulehead/heads.hpp"
#include "rulehead/metrics.hpp"
#include "test_support.hpp"

using namespace rulehead;
using namespace rulehead::testing;

namespace {

namespace fs = std::filesystem;

struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw CheckFailed(message);
}

std::string fmt(double v) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

Eigen::VectorXd random_vector(Rng& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

// --- 1. logic/enumeration oracle equivalence --------------------------------

std::string criterion_logic_equivalence() {
  Rng rng(1001);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ConceptSchema schema = random_schema(rng, 4, 4);
    const AstPtr rule = random_ast(rng, schema, 5);
    const auto expected = truth_table_bits(*rule, schema);
    AstPtr nnf;
    try {
      nnf = eliminate_negations(*rule, schema);
    } catch (const UnsatisfiableRule&) {
      for (std::uint64_t k = 1; k <= schema.joint_count(); ++k) {
        require(expected[k - 1] == 0,
                "rule flagged unsatisfiable but some state satisfies it");
      }
      ++checked;
      continue;
    }
    const Cnf cnf = simplify_cnf(to_cnf(*nnf, schema), schema);
    require(cnf_bits(cnf, schema) == expected,
            "CNF satisfaction disagrees with direct evaluation");
    if (std::count(expected.begin(), expected.end(), 1) > 0) {
      const AdmissibleMask mask = admissible_mask(*rule, schema);
      require(mask.bits == expected, "admissible mask disagrees");
    }
    ++checked;
  }
  return std::to_string(checked) + " random instances, state-by-state equal";
}

// --- 2. woodpecker ground truth ----------------------------------------------

std::string criterion_woodpecker() {
  const CompiledRules compiled =
      compile_rule_text(woodpecker_schema(), woodpecker_rule_text());
  require(compiled.t() == 12, "t != 12");
  require(compiled.d() == 10, "d != 10");
  require(compiled.s() == 7, "s != 7");
  for (std::uint64_t k = 1; k <= 12; ++k) {
    require(compiled.mask.admissible(k) == (k != 8 && k != 9),
            "inadmissible set is not exactly {8, 9}");
  }
  require(compiled.cnf.has_value() && compiled.cnf->clauses.size() == 1,
          "CNF is not a single clause");
  const std::vector<std::pair<int, int>> clause{{0, 1}, {1, 2}, {2, 1}};
  require(compiled.cnf->clauses[0].literals == clause,
          "clause differs from {(0,1),(1,2),(2,1)}");
  require(compiled.system->clause_rows[0] == std::vector<int>{0, 3, 4},
          "inequality row is not (1,0,0,1,1,0,0)");
  return "t=12 d=10, inadmissible {8,9}, clause row (1,0,0,1,1,0,0)";
}

// --- 3. H/V equivalence ------------------------------------------------------

std::string criterion_h_v_equivalence() {
  Rng rng(3003);
  int done = 0;
  double worst_gap = 0.0;
  while (done < 50) {
    const ConceptSchema schema = random_schema(rng, 4, 4);
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
      require(contains(sys, compiled->vertices.col(col), 1e-9),
              "a vertex violates the inequality system");
    }
    for (int objective_trial = 0; objective_trial < 50; ++objective_trial) {
      const Eigen::VectorXd objective =
          random_vector(rng, schema.total_width(), -1.0, 1.0);
      const double via_lp = lp_max(sys, objective).value;
      const double via_vertices =
          (compiled->vertices.transpose() * objective).maxCoeff();
      worst_gap = std::max(worst_gap, std::abs(via_lp - via_vertices));
      require(std::abs(via_lp - via_vertices) <= 1e-6,
              "lp_max and vertex max differ by " +
                  fmt(std::abs(via_lp - via_vertices)));
    }
    ++done;
  }
  return "50 instances x 50 objectives, worst |lp - vertex| = " +
         fmt(worst_gap);
}

// --- 4. head feasibility ------------------------------------------------------

std::string criterion_head_feasibility() {
  const auto compiled = std::make_shared<CompiledRules>(
      compile_rule_text(woodpecker_schema(), woodpecker_rule_text()));
  const InequalitySystem& sys = *compiled->system;
  Rng rng(4004);
  for (const HeadKind kind : {HeadKind::Base, HeadKind::AdmissibleState,
                              HeadKind::Vertex, HeadKind::Constraints}) {
    const HeadSpec head = make_head(kind, compiled);
    for (int trial = 0; trial < 10000; ++trial) {
      const Eigen::VectorXd input =
          random_vector(rng, head.input_width(), -6.0, 6.0);
      const MarginalVector p = head_forward(head, input);
      require(p.minCoeff() >= -1e-12,
              head_kind_name(kind) + ": negative entry " + fmt(p.minCoeff()));
      for (int i = 0; i < compiled->schema.concept_count(); ++i) {
        const int off = compiled->schema.block_offset(i);
        const int n = compiled->schema.outcome_count(i);
        require(std::abs(p.segment(off, n).sum() - 1.0) <= 1e-9,
                head_kind_name(kind) + ": block sum off by " +
                    fmt(p.segment(off, n).sum() - 1.0));
      }
      require(contains(sys, p, 1e-6),
              head_kind_name(kind) + ": output outside the polytope");
    }
  }
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::VectorXd logits = random_vector(
        rng, static_cast<int>(compiled->d()), -6.0, 6.0);
    const MarginalVector via_as =
        as_head_forward(logits, compiled->placement, compiled->schema);
    const MarginalVector via_vertex =
        vertex_head_forward(logits, compiled->vertices);
    worst = std::max(worst, (via_as - via_vertex).cwiseAbs().maxCoeff());
  }
  require(worst <= 1e-12, "AS and vertex heads differ by " + fmt(worst));
  return "4 heads x 10000 inputs feasible; AS~vertex gap " + fmt(worst);
}

// --- 5. gradient correctness ---------------------------------------------------

std::string criterion_gradients() {
  const auto compiled = std::make_shared<CompiledRules>(
      compile_rule_text(woodpecker_schema(), woodpecker_rule_text()));
  Rng rng(5005);
  double worst = 0.0;
  for (const HeadKind kind : {HeadKind::Base, HeadKind::AdmissibleState,
                              HeadKind::Vertex, HeadKind::Constraints}) {
    const HeadSpec head = make_head(kind, compiled);
    int done = 0;
    while (done < 20) {
      const Eigen::VectorXd input =
          random_vector(rng, head.input_width(), -2.0, 2.0);
      if (kind == HeadKind::Constraints &&
          constraints_point_degenerate(*compiled, input.head(compiled->s()))) {
        continue;
      }
      const Eigen::VectorXd cotangent =
          random_vector(rng, compiled->s(), -1.0, 1.0);
      const Eigen::VectorXd analytic = head_backward(head, input, cotangent);
      const double err = gradient_check(
          [&](const Eigen::VectorXd& x) {
            return cotangent.dot(head_forward(head, x));
          },
          input, analytic);
      worst = std::max(worst, err);
      require(err < 1e-4, head_kind_name(kind) +
                              ": finite-difference mismatch " + fmt(err));
      ++done;
    }
  }
  return "4 heads x 20 points, worst relative error " + fmt(worst);
}

// --- 6. toy reproduction --------------------------------------------------------

std::string criterion_toy() {
  const ToyData train_data = gen_toy(2000, 101);
  const ToyData test_data = gen_toy(2000, 909);

  TrainConfig config;
  config.hidden = {64, 64};
  config.epochs = 200;
  config.batch_size = 64;
  config.learning_rate = 1e-3;
  config.seed = 1;
  config.head = HeadKind::AdmissibleState;

  // No y labels at all; the rules have to reconstruct the target.
  const Dataset masked =
      mask_labels(train_data.data, {0.0, 1.0, 1.0, 1.0}, 55);

  const auto compiled_iff = std::make_shared<CompiledRules>(
      compile_rule_text(train_data.schema, train_data.iff_rule));
  const TrainResult iff_run =
      train(config, masked, make_head(HeadKind::AdmissibleState, compiled_iff));
  const auto metrics =
      evaluate_metrics(iff_run.model, test_data.data, test_data.schema);
  const double y_accuracy = metrics[0].accuracy;
  require(y_accuracy >= 0.90,
          "iff rule: y accuracy " + fmt(y_accuracy) + " < 0.90");

  const auto compiled_imp = std::make_shared<CompiledRules>(
      compile_rule_text(train_data.schema, train_data.implication_rule));
  const TrainResult imp_run =
      train(config, masked, make_head(HeadKind::AdmissibleState, compiled_imp));

  const Eigen::MatrixXd marginals =
      imp_run.model.predict(test_data.data.features);
  const int y2 = test_data.schema.flat_index(0, 2);
  int in_region = 0, confident = 0;
  for (int r = 0; r < test_data.data.sample_count(); ++r) {
    const double x1 = test_data.data.features(r, 0);
    const double x2 = test_data.data.features(r, 1);
    if (x1 > 0.55 && x2 > 0.3 && x2 < 0.7) {
      ++in_region;
      if (marginals(r, y2) >= 0.5) ++confident;
    }
  }
  require(in_region > 0, "no test points in the target region");
  const double region_rate = static_cast<double>(confident) / in_region;
  require(region_rate >= 0.95, "implication rule: Pr(y=2) >= 0.5 on only " +
                                   fmt(region_rate) + " of the region");
  return "iff y-accuracy " + fmt(y_accuracy) + "; implication region rate " +
         fmt(region_rate) + " (" + std::to_string(in_region) + " points)";
}

// --- 7. sweep reproduction -------------------------------------------------------

std::string criterion_sweep() {
  const fs::path dir = fs::temp_directory_path() / "rulehead_acceptance";
  fs::create_directories(dir);
  write_synthetic_digit_idx(dir / "digits.idx", dir / "digit_labels.idx",
                            6000, 17);
  const DigitsData digits = gen_colored_digits(
      dir / "digits.idx", dir / "digit_labels.idx", 5000, 23);

  SweepOptions options;
  options.fractions = {0.01, 0.5};
  options.seeds = {1, 2, 3, 4, 5};
  options.test_fraction = 0.2;
  options.jobs = 2;
  options.config.hidden = {64};
  options.config.epochs = 20;
  options.config.batch_size = 100;
  options.config.learning_rate = 1e-3;

  const std::vector<SweepRow> rows =
      run_sweep(digits.data, digits.schema, digits.rule, options);
  require(rows.size() == 2 * 5 * 3, "unexpected sweep row count");
  save_sweep_csv(dir / "sweep.csv", rows);

  std::map<std::pair<std::string, double>, std::pair<double, int>> means;
  for (const SweepRow& row : rows) {
    auto& slot = means[{row.head, row.fraction}];
    slot.first += row.f1;
    slot.second += 1;
  }
  const auto mean_of = [&](const char* head, double fraction) {
    const auto& slot = means.at({head, fraction});
    return slot.first / slot.second;
  };

  const double as_low = mean_of("as", 0.01);
  const double ind_low = mean_of("independent", 0.01);
  require(as_low >= ind_low, "mean F1(AS) " + fmt(as_low) +
                                 " < F1(independent) " + fmt(ind_low) +
                                 " at fraction 0.01");

  const double as_high = mean_of("as", 0.5);
  const double joint_high = mean_of("joint", 0.5);
  const double ind_high = mean_of("independent", 0.5);
  const double spread = std::max({as_high, joint_high, ind_high}) -
                        std::min({as_high, joint_high, ind_high});
  require(spread <= 0.05,
          "heads differ by " + fmt(spread) + " at fraction 0.5");

  return "fraction 0.01: AS " + fmt(as_low) + " vs independent " +
         fmt(ind_low) + "; fraction 0.5 spread " + fmt(spread);
}

// --- 8. state-space reduction consistency ----------------------------------------

std::string criterion_reduction() {
  Rng rng(8008);
  int done = 0;
  double worst = 0.0;
  while (done < 50) {
    const ConceptSchema schema = random_schema(rng, 4, 4);
    const AstPtr rule = random_satisfiable_ast(rng, schema, 4, true);
    std::optional<SchemaReduction> red;
    try {
      red = reduce_schema(*rule, schema);
    } catch (const Error&) {
      continue;
    }

    const AdmissibleMask original_mask = admissible_mask(*rule, schema);
    const AdmissibleMask reduced_mask =
        admissible_mask(*red->rewritten_ast, red->reduced_schema);
    for (std::uint64_t k = 1; k <= schema.joint_count(); ++k) {
      const std::uint64_t rk =
          reduce_state_index(k, schema, red->reduced_schema, red->map);
      require(original_mask.admissible(k) == reduced_mask.admissible(rk),
              "mask pullback mismatch at state " + std::to_string(k));
    }

    // Random joint distribution; compress, marginalize, expand, compare.
    const std::uint64_t t = schema.joint_count();
    Eigen::VectorXd pi(static_cast<Eigen::Index>(t));
    for (Eigen::Index k = 0; k < pi.size(); ++k) pi[k] = rng.uniform() + 1e-9;
    pi /= pi.sum();

    Eigen::VectorXd reduced_pi = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(red->reduced_schema.joint_count()));
    for (std::uint64_t k = 1; k <= t; ++k) {
      reduced_pi[static_cast<Eigen::Index>(
          reduce_state_index(k, schema, red->reduced_schema, red->map) - 1)] +=
          pi[static_cast<Eigen::Index>(k - 1)];
    }

    const MarginalVector original_marginal = marginalize(pi, schema);
    const MarginalVector compressed =
        marginalize(reduced_pi, red->reduced_schema);

    std::vector<Eigen::VectorXd> replacement(schema.concept_count());
    for (int i = 0; i < schema.concept_count(); ++i) {
      const ReducedConcept& rc = red->map.concepts[i];
      if (rc.untouched) {
        replacement[i] = Eigen::VectorXd(schema.outcome_count(i));
        for (int v = 1; v <= schema.outcome_count(i); ++v) {
          replacement[i][v - 1] = original_marginal[schema.flat_index(i, v)];
        }
      } else if (rc.replaced.size() >= 2) {
        replacement[i] = Eigen::VectorXd(rc.replaced.size());
        double total = 0.0;
        for (size_t v = 0; v < rc.replaced.size(); ++v) {
          replacement[i][static_cast<Eigen::Index>(v)] =
              original_marginal[schema.flat_index(i, rc.replaced[v])];
          total += replacement[i][static_cast<Eigen::Index>(v)];
        }
        if (total > 0) {
          replacement[i] /= total;
        } else {
          replacement[i].setConstant(1.0 / rc.replaced.size());
        }
      } else {
        replacement[i] = Eigen::VectorXd(0);
      }
    }

    const MarginalVector expanded = expand_compressed_marginals(
        compressed, schema, red->reduced_schema, red->map, replacement);
    const double gap = (expanded - original_marginal).cwiseAbs().maxCoeff();
    worst = std::max(worst, gap);
    require(gap <= 1e-9, "expanded marginals off by " + fmt(gap));
    ++done;
  }
  return "50 instances; worst marginal gap " + fmt(worst);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<std::string()> body;
  };
  const std::vector<Criterion> criteria{
      {1, "logic/enumeration oracle equivalence", criterion_logic_equivalence},
      {2, "woodpecker ground truth", criterion_woodpecker},
      {3, "H- and V-representation equivalence", criterion_h_v_equivalence},
      {4, "head feasibility", criterion_head_feasibility},
      {5, "head gradient correctness", criterion_gradients},
      {6, "toy reproduction", criterion_toy},
      {7, "colored-digit sweep reproduction", criterion_sweep},
      {8, "state-space reduction consistency", criterion_reduction},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string verdict;
    bool ok = true;
    try {
      verdict = criterion.body();
    } catch (const std::exception& e) {
      ok = false;
      verdict = e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %d: %s (%.1fs) — %s\n", ok ? "PASS" : "FAIL",
                criterion.id, criterion.name, seconds, verdict.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
  } else {
    std::printf("all %zu criteria passed\n", criteria.size());
  }
  return failures;
}
