#include "rulehead/artifact_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rulehead/parser.hpp"

namespace rulehead {

namespace {

using nlohmann::json;

json schema_to_json(const ConceptSchema& schema) {
  json concepts = json::array();
  for (int i = 0; i < schema.concept_count(); ++i) {
    const Concept& c = schema.concept_at(i);
    concepts.push_back({{"name", c.name}, {"values", c.values}});
  }
  return json{{"concepts", concepts}};
}

ConceptSchema schema_from_json(const json& j) {
  if (!j.contains("concepts") || !j["concepts"].is_array()) {
    throw IoError("schema file needs a top-level 'concepts' array");
  }
  std::vector<Concept> concepts;
  for (const json& cj : j["concepts"]) {
    Concept c;
    c.name = cj.at("name").get<std::string>();
    c.values = cj.at("values").get<std::vector<std::string>>();
    concepts.push_back(std::move(c));
  }
  return ConceptSchema(std::move(concepts));
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_matrix_csv(const std::filesystem::path& path,
                     const Eigen::MatrixXd& m, bool transpose) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buffer[64];
  const Eigen::Index rows = transpose ? m.cols() : m.rows();
  const Eigen::Index cols = transpose ? m.rows() : m.cols();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = transpose ? m(c, r) : m(r, c);
      std::snprintf(buffer, sizeof(buffer), "%.17g", v);
      out << buffer << (c + 1 < cols ? "," : "");
    }
    out << '\n';
  }
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged CSV in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty CSV " + path.string());
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows.front().size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return m;
}

json reduction_to_json(const ReducedSchemaMap& map) {
  json entries = json::array();
  for (const ReducedConcept& rc : map.concepts) {
    entries.push_back({{"untouched", rc.untouched},
                       {"reduced_index", rc.reduced_index},
                       {"has_zero", rc.has_zero},
                       {"kept", rc.kept},
                       {"replaced", rc.replaced}});
  }
  return json{{"concepts", entries}};
}

ReducedSchemaMap reduction_from_json(const json& j) {
  ReducedSchemaMap map;
  for (const json& e : j.at("concepts")) {
    ReducedConcept rc;
    rc.untouched = e.at("untouched").get<bool>();
    rc.reduced_index = e.at("reduced_index").get<int>();
    rc.has_zero = e.at("has_zero").get<bool>();
    rc.kept = e.at("kept").get<std::vector<int>>();
    rc.replaced = e.at("replaced").get<std::vector<int>>();
    map.concepts.push_back(std::move(rc));
  }
  return map;
}

}  // namespace

ConceptSchema schema_from_json_text(const std::string& text) {
  try {
    return schema_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed schema JSON: ") + e.what());
  }
}

std::string schema_to_json_text(const ConceptSchema& schema) {
  return schema_to_json(schema).dump(2) + "\n";
}

ConceptSchema load_schema(const std::filesystem::path& path) {
  return schema_from_json(load_json(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

void save_artifacts(const std::filesystem::path& dir,
                    const CompiledRules& compiled, HeadKind head) {
  std::filesystem::create_directories(dir);

  json report{
      {"t", compiled.t()},
      {"d", compiled.d()},
      {"s", compiled.s()},
      {"head", head_kind_name(head)},
      {"reduced", compiled.reduction.has_value()},
      {"original_t", compiled.original_schema.joint_count()},
      {"original_s", compiled.original_schema.total_width()},
  };
  if (compiled.system) {
    report["clauses"] = compiled.system->clause_count();
  } else {
    report["clauses"] = nullptr;
    report["cnf_error"] = compiled.cnf_error.value_or("unavailable");
  }
  json widths;
  for (const HeadKind k : {HeadKind::Base, HeadKind::AdmissibleState,
                           HeadKind::Vertex, HeadKind::Constraints}) {
    if (k == HeadKind::Constraints && !compiled.system) continue;
    HeadSpec spec;
    spec.kind = k;
    spec.compiled = std::shared_ptr<const CompiledRules>(
        &compiled, [](const CompiledRules*) {});
    widths[head_kind_name(k)] = spec.input_width();
  }
  widths[head_kind_name(HeadKind::Independent)] =
      compiled.original_schema.total_width();
  report["input_widths"] = widths;

  save_json(dir / "report.json", report);
  write_text_file(dir / "schema.json",
                  schema_to_json_text(compiled.original_schema));
  write_text_file(dir / "rules.txt",
                  format_ast(*compiled.rule, compiled.schema) + "\n");

  if (compiled.reduction) {
    write_text_file(dir / "schema_reduced.json",
                    schema_to_json_text(compiled.schema));
    save_json(dir / "reduced_map.json", reduction_to_json(*compiled.reduction));
  }

  save_json(dir / "mask.json",
            json{{"t", compiled.t()},
                 {"admissible", compiled.placement.state_index}});
  save_json(dir / "placement.json",
            json{{"states", compiled.placement.state_index}});
  save_matrix_csv(dir / "vertices.csv", compiled.vertices, /*transpose=*/true);

  std::vector<int> frozen(compiled.interior.frozen.begin(),
                          compiled.interior.frozen.end());
  std::vector<double> point(compiled.interior.point.data(),
                            compiled.interior.point.data() +
                                compiled.interior.point.size());
  save_json(dir / "interior.json", json{{"point", point}, {"frozen", frozen}});

  if (compiled.system) {
    save_json(dir / "system.json",
              json{{"width", compiled.system->width},
                   {"block_offsets", compiled.system->block_offsets},
                   {"block_sizes", compiled.system->block_sizes},
                   {"clause_rows", compiled.system->clause_rows}});
  }
}

LoadedArtifacts load_artifacts(const std::filesystem::path& dir) {
  const json report = load_json(dir / "report.json");
  auto compiled = std::make_shared<CompiledRules>(CompiledRules{
      .original_schema = load_schema(dir / "schema.json"),
      .schema = load_schema(dir / "schema.json"),
      .reduction = {},
      .rule = nullptr,
      .mask = {},
      .placement = {},
      .vertices = {},
      .interior = {},
      .cnf = {},
      .system = {},
      .cnf_error = {}});

  if (report.at("reduced").get<bool>()) {
    compiled->schema = load_schema(dir / "schema_reduced.json");
    compiled->reduction =
        reduction_from_json(load_json(dir / "reduced_map.json"));
  }
  compiled->rule =
      parse_rules(read_text_file(dir / "rules.txt"), compiled->schema);

  const json mask_json = load_json(dir / "mask.json");
  const auto t = mask_json.at("t").get<std::uint64_t>();
  if (t != compiled->schema.joint_count()) {
    throw IoError("mask.json t does not match the schema");
  }
  compiled->mask.bits.assign(t, 0);
  for (const std::uint64_t k :
       mask_json.at("admissible").get<std::vector<std::uint64_t>>()) {
    if (k < 1 || k > t) throw IoError("admissible state index out of range");
    compiled->mask.bits[k - 1] = 1;
  }
  compiled->mask.admissible_count = mask_json.at("admissible").size();
  if (compiled->mask.admissible_count == 0) {
    throw IoError("artifact mask has no admissible states");
  }
  compiled->placement = placement_matrix(compiled->mask);

  compiled->vertices = load_matrix_csv(dir / "vertices.csv").transpose();
  if (compiled->vertices.rows() != compiled->schema.total_width() ||
      compiled->vertices.cols() !=
          static_cast<Eigen::Index>(compiled->mask.admissible_count)) {
    throw IoError("vertices.csv shape does not match mask/schema");
  }

  const json interior = load_json(dir / "interior.json");
  const auto point = interior.at("point").get<std::vector<double>>();
  compiled->interior.point =
      Eigen::Map<const Eigen::VectorXd>(point.data(), point.size());
  const auto frozen = interior.at("frozen").get<std::vector<int>>();
  compiled->interior.frozen.assign(frozen.begin(), frozen.end());
  if (compiled->interior.point.size() != compiled->schema.total_width()) {
    throw IoError("interior.json width mismatch");
  }

  if (std::filesystem::exists(dir / "system.json")) {
    const json sj = load_json(dir / "system.json");
    InequalitySystem sys;
    sys.width = sj.at("width").get<int>();
    sys.block_offsets = sj.at("block_offsets").get<std::vector<int>>();
    sys.block_sizes = sj.at("block_sizes").get<std::vector<int>>();
    sys.clause_rows =
        sj.at("clause_rows").get<std::vector<std::vector<int>>>();
    if (sys.width != compiled->schema.total_width()) {
      throw IoError("system.json width mismatch");
    }
    compiled->system = std::move(sys);
  } else if (report.contains("cnf_error")) {
    compiled->cnf_error = report["cnf_error"].get<std::string>();
  }

  LoadedArtifacts out;
  out.head = head_kind_from_name(report.at("head").get<std::string>());
  out.compiled = std::move(compiled);
  return out;
}

}  // namespace rulehead
