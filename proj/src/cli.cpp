#include "rulehead/cli.hpp"

#include <cstdio>
#include <filesystem>

#include <CLI11.hpp>
#include <json.hpp>

#include "rulehead/artifact_io.hpp"
#include "rulehead/compile.hpp"
#include "rulehead/experiments.hpp"
#include "rulehead/log.hpp"
#include "rulehead/metrics.hpp"

namespace rulehead {

namespace {

namespace fs = std::filesystem;

struct CompileArgs {
  std::string schema_path;
  std::string rules_path;
  std::string out_dir;
  std::string head = "as";
  bool reduce = false;
  std::uint64_t budget = kDefaultEnumerationBudget;
  int clause_budget = kDefaultClauseBudget;
};

int cmd_compile(const CompileArgs& args) {
  const ConceptSchema schema = load_schema(args.schema_path);
  const std::string rules = read_text_file(args.rules_path);
  CompileOptions options;
  options.reduce = args.reduce;
  options.enumeration_budget = args.budget;
  options.clause_budget = args.clause_budget;
  const HeadKind head = head_kind_from_name(args.head);

  const CompiledRules compiled = compile_rule_text(schema, rules, options);
  if (head == HeadKind::Constraints && !compiled.system) {
    throw CnfExplosion(compiled.cnf_error.value_or(
        "constraints head needs a CNF-backed inequality system"));
  }
  save_artifacts(args.out_dir, compiled, head);

  std::printf("t=%llu d=%llu s=%d clauses=%s head=%s reduced=%s\n",
              static_cast<unsigned long long>(compiled.t()),
              static_cast<unsigned long long>(compiled.d()), compiled.s(),
              compiled.system
                  ? std::to_string(compiled.system->clause_count()).c_str()
                  : "n/a",
              head_kind_name(head).c_str(),
              compiled.reduction ? "yes" : "no");
  std::printf("artifacts written to %s\n", args.out_dir.c_str());
  return 0;
}

struct TrainArgs {
  std::string artifacts_dir;
  std::string data_path;
  std::string config_path;
  std::string out_dir = ".";
};

int cmd_train(const TrainArgs& args) {
  const LoadedArtifacts artifacts = load_artifacts(args.artifacts_dir);
  const ConceptSchema& schema = artifacts.compiled->original_schema;

  TrainConfig config;
  HeadKind head_kind = artifacts.head;
  if (!args.config_path.empty()) {
    const std::string text = read_text_file(args.config_path);
    config = train_config_from_json_text(text);
    if (nlohmann::json::parse(text).contains("head")) {
      head_kind = config.head;
    }
  }
  config.head = head_kind;

  const HeadSpec head =
      head_kind == HeadKind::Independent
          ? make_independent_head(std::make_shared<ConceptSchema>(schema))
          : make_head(head_kind, artifacts.compiled);

  const Dataset data = load_dataset_csv(args.data_path, schema);
  const TrainResult result = train(config, data, head);

  fs::create_directories(args.out_dir);
  save_checkpoint(fs::path(args.out_dir) / "checkpoint.json", result.model);
  save_train_log_csv(fs::path(args.out_dir) / "train_log.csv", result.log,
                     schema);
  std::printf("final loss %.6f after %d epochs; checkpoint in %s\n",
              result.log.back().total, config.epochs, args.out_dir.c_str());
  return 0;
}

struct EvalArgs {
  std::string artifacts_dir;
  std::string checkpoint_path;
  std::string data_path;
  std::string out_csv;
};

int cmd_eval(const EvalArgs& args) {
  const LoadedArtifacts artifacts = load_artifacts(args.artifacts_dir);
  const ConceptSchema& schema = artifacts.compiled->original_schema;
  const HeadSpec head =
      artifacts.head == HeadKind::Independent
          ? make_independent_head(std::make_shared<ConceptSchema>(schema))
          : make_head(artifacts.head, artifacts.compiled);
  const Model model = load_checkpoint(args.checkpoint_path, head);
  const Dataset data = load_dataset_csv(args.data_path, schema);

  const std::vector<ConceptMetrics> metrics =
      evaluate_metrics(model, data, schema);
  std::printf("%-12s %8s %10s %10s\n", "concept", "labeled", "accuracy", "f1");
  for (const ConceptMetrics& m : metrics) {
    std::printf("%-12s %8d %10.4f %10.4f\n", m.concept_name.c_str(), m.labeled,
                m.accuracy, m.macro_f1);
  }
  if (!args.out_csv.empty()) {
    std::ofstream out(args.out_csv);
    if (!out) throw IoError("cannot write " + args.out_csv);
    out << "concept,labeled,accuracy,f1\n";
    for (const ConceptMetrics& m : metrics) {
      out << m.concept_name << ',' << m.labeled << ',' << m.accuracy << ','
          << m.macro_f1 << '\n';
    }
  }
  return 0;
}

struct SweepArgs {
  std::string schema_path;
  std::string rules_path;
  std::string data_path;
  std::string out_csv;
  std::vector<double> fractions{0.01, 0.05, 0.1, 0.5};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<int> hidden{64};
  int epochs = 20;
  int batch_size = 100;
  double learning_rate = 1e-3;
  double test_fraction = 0.2;
  int jobs = 1;
};

int cmd_sweep(const SweepArgs& args) {
  const ConceptSchema schema = load_schema(args.schema_path);
  const std::string rules = read_text_file(args.rules_path);
  const Dataset data = load_dataset_csv(args.data_path, schema);

  SweepOptions options;
  options.fractions = args.fractions;
  options.seeds = args.seeds;
  options.test_fraction = args.test_fraction;
  options.jobs = args.jobs;
  options.config.hidden = args.hidden;
  options.config.epochs = args.epochs;
  options.config.batch_size = args.batch_size;
  options.config.learning_rate = args.learning_rate;

  const std::vector<SweepRow> rows = run_sweep(data, schema, rules, options);
  save_sweep_csv(args.out_csv, rows);
  std::printf("%zu rows written to %s\n", rows.size(), args.out_csv.c_str());
  return 0;
}

struct GenToyArgs {
  int n = 2000;
  std::uint64_t seed = 1;
  std::string out_dir;
};

int cmd_gen_toy(const GenToyArgs& args) {
  const ToyData toy = gen_toy(args.n, args.seed);
  fs::create_directories(args.out_dir);
  write_text_file(fs::path(args.out_dir) / "schema.json",
                  schema_to_json_text(toy.schema));
  save_dataset_csv(fs::path(args.out_dir) / "data.csv", toy.data, toy.schema);
  write_text_file(fs::path(args.out_dir) / "rules_implication.txt",
                  toy.implication_rule + "\n");
  write_text_file(fs::path(args.out_dir) / "rules_iff.txt",
                  toy.iff_rule + "\n");
  std::printf("toy dataset (%d samples) written to %s\n", args.n,
              args.out_dir.c_str());
  return 0;
}

struct GenGlyphArgs {
  int count = 6000;
  std::uint64_t seed = 1;
  std::string images_path;
  std::string labels_path;
};

int cmd_gen_glyphs(const GenGlyphArgs& args) {
  write_synthetic_digit_idx(args.images_path, args.labels_path, args.count,
                            args.seed);
  std::printf("wrote %d glyph images to %s / %s\n", args.count,
              args.images_path.c_str(), args.labels_path.c_str());
  return 0;
}

struct GenDigitsArgs {
  std::string images_path;
  std::string labels_path;
  int n = 5000;
  std::uint64_t seed = 1;
  std::string out_dir;
};

int cmd_gen_digits(const GenDigitsArgs& args) {
  const DigitsData digits =
      gen_colored_digits(args.images_path, args.labels_path, args.n, args.seed);
  fs::create_directories(args.out_dir);
  write_text_file(fs::path(args.out_dir) / "schema.json",
                  schema_to_json_text(digits.schema));
  save_dataset_csv(fs::path(args.out_dir) / "data.csv", digits.data,
                   digits.schema);
  write_text_file(fs::path(args.out_dir) / "rules.txt", digits.rule + "\n");
  std::printf("colored-digit dataset (%d samples) written to %s\n", args.n,
              args.out_dir.c_str());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"rulehead: expert rules as constrained concept heads"};
  app.require_subcommand(1);

  CompileArgs compile_args;
  CLI::App* compile = app.add_subcommand(
      "compile", "compile a schema and rule file into head artifacts");
  compile->add_option("--schema", compile_args.schema_path)->required();
  compile->add_option("--rules", compile_args.rules_path)->required();
  compile->add_option("--out", compile_args.out_dir)->required();
  compile->add_option("--head", compile_args.head)
      ->check(CLI::IsMember({"base", "as", "vertex", "constraints"}));
  compile->add_flag("--reduce", compile_args.reduce,
                    "compress outcomes unmentioned by the rules");
  compile->add_option("--budget", compile_args.budget,
                      "joint state enumeration budget");
  compile->add_option("--clause-budget", compile_args.clause_budget);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train a model on artifacts");
  train->add_option("--artifacts", train_args.artifacts_dir)->required();
  train->add_option("--data", train_args.data_path)->required();
  train->add_option("--config", train_args.config_path);
  train->add_option("--out", train_args.out_dir);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--artifacts", eval_args.artifacts_dir)->required();
  eval->add_option("--checkpoint", eval_args.checkpoint_path)->required();
  eval->add_option("--data", eval_args.data_path)->required();
  eval->add_option("--out", eval_args.out_csv);

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "labeled-fraction sweep over as/joint/independent heads");
  sweep->add_option("--schema", sweep_args.schema_path)->required();
  sweep->add_option("--rules", sweep_args.rules_path)->required();
  sweep->add_option("--data", sweep_args.data_path)->required();
  sweep->add_option("--out", sweep_args.out_csv)->required();
  sweep->add_option("--fractions", sweep_args.fractions)->delimiter(',');
  sweep->add_option("--seeds", sweep_args.seeds)->delimiter(',');
  sweep->add_option("--hidden", sweep_args.hidden)->delimiter(',');
  sweep->add_option("--epochs", sweep_args.epochs);
  sweep->add_option("--batch", sweep_args.batch_size);
  sweep->add_option("--lr", sweep_args.learning_rate);
  sweep->add_option("--test-fraction", sweep_args.test_fraction);
  sweep->add_option("--jobs", sweep_args.jobs);

  CLI::App* gen = app.add_subcommand("gen", "generate datasets");
  gen->require_subcommand(1);

  GenToyArgs toy_args;
  CLI::App* gen_toy_cmd = gen->add_subcommand("toy", "2D synthetic dataset");
  gen_toy_cmd->add_option("--n", toy_args.n);
  gen_toy_cmd->add_option("--seed", toy_args.seed);
  gen_toy_cmd->add_option("--out", toy_args.out_dir)->required();

  GenGlyphArgs glyph_args;
  CLI::App* gen_glyphs_cmd = gen->add_subcommand(
      "glyphs", "synthetic digit glyphs in MNIST IDX format");
  gen_glyphs_cmd->add_option("--count", glyph_args.count);
  gen_glyphs_cmd->add_option("--seed", glyph_args.seed);
  gen_glyphs_cmd->add_option("--out-images", glyph_args.images_path)
      ->required();
  gen_glyphs_cmd->add_option("--out-labels", glyph_args.labels_path)
      ->required();

  GenDigitsArgs digits_args;
  CLI::App* gen_digits_cmd =
      gen->add_subcommand("digits", "colored-digit dataset from IDX files");
  gen_digits_cmd->add_option("--images", digits_args.images_path)->required();
  gen_digits_cmd->add_option("--labels", digits_args.labels_path)->required();
  gen_digits_cmd->add_option("--n", digits_args.n);
  gen_digits_cmd->add_option("--seed", digits_args.seed);
  gen_digits_cmd->add_option("--out", digits_args.out_dir)->required();

  std::vector<const char*> argv;
  argv.push_back("rulehead");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (compile->parsed()) return cmd_compile(compile_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (gen->parsed()) {
      if (gen_toy_cmd->parsed()) return cmd_gen_toy(toy_args);
      if (gen_glyphs_cmd->parsed()) return cmd_gen_glyphs(glyph_args);
      if (gen_digits_cmd->parsed()) return cmd_gen_digits(digits_args);
    }
    std::fprintf(stderr, "no subcommand\n");
    return 1;
  } catch (const NumericError& e) {
    log::error("%s", e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace rulehead
