#ifndef RULEHEAD_ARTIFACT_IO_HPP
#define RULEHEAD_ARTIFACT_IO_HPP

#include <filesystem>
#include <memory>
#include <string>

#include "rulehead/heads.hpp"

namespace rulehead {

// Schema file format: {"concepts":[{"name":..., "values":[...]}, ...]};
// concept 0 is the target.
ConceptSchema schema_from_json_text(const std::string& text);
std::string schema_to_json_text(const ConceptSchema& schema);
ConceptSchema load_schema(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

// Writes the compiled artifacts as plain JSON/CSV so other tooling can
// consume them: report.json, schema.json, rules.txt, mask.json,
// placement.json, vertices.csv, interior.json, system.json (when the CNF
// fit the budget) and the reduction files when reduction was applied.
void save_artifacts(const std::filesystem::path& dir,
                    const CompiledRules& compiled, HeadKind head);

struct LoadedArtifacts {
  std::shared_ptr<const CompiledRules> compiled;
  HeadKind head;
};

LoadedArtifacts load_artifacts(const std::filesystem::path& dir);

}  // namespace rulehead

#endif  // RULEHEAD_ARTIFACT_IO_HPP
