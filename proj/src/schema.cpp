#include "rulehead/schema.hpp"

#include <limits>
#include <unordered_set>

namespace rulehead {

ConceptSchema::ConceptSchema(std::vector<Concept> concepts)
    : concepts_(std::move(concepts)) {
  if (concepts_.empty()) {
    throw SchemaError("schema needs at least one concept");
  }
  std::unordered_set<std::string_view> names;
  offsets_.reserve(concepts_.size() + 1);
  offsets_.push_back(0);
  joint_count_ = 1;
  for (const Concept& c : concepts_) {
    if (c.name.empty()) throw SchemaError("concept name must be non-empty");
    if (!names.insert(c.name).second) {
      throw SchemaError("duplicate concept name '" + c.name + "'");
    }
    if (c.values.size() < 2) {
      throw SchemaError("concept '" + c.name + "' needs at least 2 outcomes");
    }
    std::unordered_set<std::string_view> value_names;
    for (const std::string& v : c.values) {
      if (v.empty()) {
        throw SchemaError("concept '" + c.name + "' has an empty value name");
      }
      if (!value_names.insert(v).second) {
        throw SchemaError("concept '" + c.name + "' has duplicate value '" +
                          v + "'");
      }
    }
    offsets_.push_back(offsets_.back() + static_cast<int>(c.values.size()));
    const auto n = static_cast<std::uint64_t>(c.values.size());
    if (joint_count_ > std::numeric_limits<std::uint64_t>::max() / n) {
      throw SchemaError("joint state count overflows 64 bits");
    }
    joint_count_ *= n;
  }
}

int ConceptSchema::block_offset(int i) const {
  if (i < 0 || i >= concept_count()) {
    throw SchemaError("concept index " + std::to_string(i) + " out of range");
  }
  return offsets_[i];
}

int ConceptSchema::flat_index(int i, int j) const {
  if (j < 1 || j > outcome_count(i)) {
    throw SchemaError("outcome " + std::to_string(j) +
                      " out of range for concept " + std::to_string(i));
  }
  return offsets_[i] + j - 1;
}

const Concept& ConceptSchema::concept_at(int i) const {
  if (i < 0 || i >= concept_count()) {
    throw SchemaError("concept index " + std::to_string(i) + " out of range");
  }
  return concepts_[i];
}

std::optional<int> ConceptSchema::find_concept(std::string_view name) const {
  for (int i = 0; i < concept_count(); ++i) {
    if (concepts_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<int> ConceptSchema::find_value(int i,
                                             std::string_view name) const {
  const Concept& c = concept_at(i);
  for (int j = 0; j < static_cast<int>(c.values.size()); ++j) {
    if (c.values[j] == name) return j + 1;
  }
  return std::nullopt;
}

bool ConceptSchema::operator==(const ConceptSchema& other) const {
  if (concept_count() != other.concept_count()) return false;
  for (int i = 0; i < concept_count(); ++i) {
    if (concepts_[i].name != other.concepts_[i].name ||
        concepts_[i].values != other.concepts_[i].values) {
      return false;
    }
  }
  return true;
}

bool is_valid_concept_vector(const ConceptSchema& schema,
                             const ConceptVector& c) {
  if (static_cast<int>(c.size()) != schema.concept_count()) return false;
  for (int i = 0; i < schema.concept_count(); ++i) {
    if (c[i] < 1 || c[i] > schema.outcome_count(i)) return false;
  }
  return true;
}

bool is_valid_marginal(const ConceptSchema& schema, const MarginalVector& p,
                       double tol) {
  if (p.size() != schema.total_width()) return false;
  for (int i = 0; i < schema.concept_count(); ++i) {
    double sum = 0.0;
    for (int j = 1; j <= schema.outcome_count(i); ++j) {
      const double v = p[schema.flat_index(i, j)];
      if (v < -tol) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace rulehead
