#ifndef RULEHEAD_SCHEMA_HPP
#define RULEHEAD_SCHEMA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rulehead/errors.hpp"

namespace rulehead {

// Outcome indices are 1-based everywhere a concept value is addressed
// (matching the rule DSL and file formats); flat positions into a marginal
// vector are 0-based.
struct Concept {
  std::string name;
  std::vector<std::string> values;
};

// Ordered list of concepts; concept 0 is the prediction target. Immutable
// after construction and safe to share across threads.
class ConceptSchema {
 public:
  explicit ConceptSchema(std::vector<Concept> concepts);

  int concept_count() const { return static_cast<int>(concepts_.size()); }
  int outcome_count(int i) const {
    return static_cast<int>(concept_at(i).values.size());
  }
  // s = sum of outcome counts; the length of a marginal vector.
  int total_width() const { return offsets_.back(); }
  // t = product of outcome counts. Construction fails if this overflows
  // 64 bits.
  std::uint64_t joint_count() const { return joint_count_; }

  // Flat index of p^(i)_1 within the concatenated marginal vector.
  int block_offset(int i) const;
  // Flat index of p^(i)_j, j 1-based.
  int flat_index(int i, int j) const;

  const Concept& concept_at(int i) const;
  std::optional<int> find_concept(std::string_view name) const;
  // 1-based outcome index of a value name within concept i.
  std::optional<int> find_value(int i, std::string_view name) const;

  bool operator==(const ConceptSchema& other) const;

 private:
  std::vector<Concept> concepts_;
  std::vector<int> offsets_;  // size m+2, offsets_[i] = sum of n_j, j<i
  std::uint64_t joint_count_ = 0;
};

// One full assignment of outcomes, values[i] in {1..n_i}.
using ConceptVector = std::vector<int>;

// Concatenated per-concept probability blocks, length s.
using MarginalVector = Eigen::VectorXd;

bool is_valid_concept_vector(const ConceptSchema& schema,
                             const ConceptVector& c);

// Checks nonnegativity and unit block sums within `tol`.
bool is_valid_marginal(const ConceptSchema& schema, const MarginalVector& p,
                       double tol = 1e-9);

}  // namespace rulehead

#endif  // RULEHEAD_SCHEMA_HPP
