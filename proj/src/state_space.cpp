#include "rulehead/state_space.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rulehead/logic.hpp"

namespace rulehead {

namespace {

// Iterates concept vectors in joint-state order (concept 0 most
// significant) without re-decoding every index.
class StateOdometer {
 public:
  explicit StateOdometer(const ConceptSchema& schema)
      : schema_(schema), current_(schema.concept_count(), 1) {}

  const ConceptVector& current() const { return current_; }

  void advance() {
    for (int i = schema_.concept_count() - 1; i >= 0; --i) {
      if (current_[i] < schema_.outcome_count(i)) {
        ++current_[i];
        return;
      }
      current_[i] = 1;
    }
  }

 private:
  const ConceptSchema& schema_;
  ConceptVector current_;
};

}  // namespace

std::uint64_t encode_state(const ConceptVector& c,
                           const ConceptSchema& schema) {
  if (!is_valid_concept_vector(schema, c)) {
    throw SchemaError("concept vector invalid for schema");
  }
  std::uint64_t k = 0;
  for (int i = 0; i < schema.concept_count(); ++i) {
    k = k * static_cast<std::uint64_t>(schema.outcome_count(i)) +
        static_cast<std::uint64_t>(c[i] - 1);
  }
  return k + 1;
}

ConceptVector decode_state(std::uint64_t k, const ConceptSchema& schema) {
  if (k < 1 || k > schema.joint_count()) {
    throw SchemaError("joint state index " + std::to_string(k) +
                      " out of range");
  }
  std::uint64_t rest = k - 1;
  ConceptVector c(schema.concept_count());
  for (int i = schema.concept_count() - 1; i >= 0; --i) {
    const auto n = static_cast<std::uint64_t>(schema.outcome_count(i));
    c[i] = static_cast<int>(rest % n) + 1;
    rest /= n;
  }
  return c;
}

AdmissibleMask admissible_mask(const RuleAst& ast, const ConceptSchema& schema,
                               std::uint64_t enumeration_budget) {
  const std::uint64_t t = schema.joint_count();
  if (t > enumeration_budget) {
    throw EnumerationBudgetExceeded(
        std::to_string(t) + " joint states exceed the budget of " +
        std::to_string(enumeration_budget) +
        "; reduce the schema or use the constraints head");
  }
  AdmissibleMask mask;
  mask.bits.resize(t);
  StateOdometer odo(schema);
  for (std::uint64_t k = 0; k < t; ++k, odo.advance()) {
    const bool ok = evaluate(ast, odo.current());
    mask.bits[k] = ok ? 1 : 0;
    mask.admissible_count += ok ? 1 : 0;
  }
  if (mask.admissible_count == 0) {
    throw UnsatisfiableRule("no joint state satisfies the rule");
  }
  return mask;
}

PlacementMatrix placement_matrix(const AdmissibleMask& mask) {
  PlacementMatrix placement;
  placement.state_index.reserve(mask.admissible_count);
  for (std::uint64_t k = 0; k < mask.bits.size(); ++k) {
    if (mask.bits[k]) placement.state_index.push_back(k + 1);
  }
  return placement;
}

Eigen::VectorXd apply_placement(const PlacementMatrix& placement,
                                const Eigen::VectorXd& reduced,
                                std::uint64_t joint_count) {
  if (static_cast<std::uint64_t>(reduced.size()) !=
      placement.admissible_count()) {
    throw DimensionError("admissible vector length does not match placement");
  }
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(joint_count));
  for (Eigen::Index k = 0; k < reduced.size(); ++k) {
    pi[static_cast<Eigen::Index>(placement.state_index[k] - 1)] = reduced[k];
  }
  return pi;
}

MarginalVector marginalize(const Eigen::VectorXd& pi,
                           const ConceptSchema& schema) {
  if (static_cast<std::uint64_t>(pi.size()) != schema.joint_count()) {
    throw DimensionError("joint vector length does not match schema");
  }
  MarginalVector p = MarginalVector::Zero(schema.total_width());
  StateOdometer odo(schema);
  for (Eigen::Index k = 0; k < pi.size(); ++k, odo.advance()) {
    const double w = pi[k];
    if (w == 0.0) continue;
    const ConceptVector& c = odo.current();
    for (int i = 0; i < schema.concept_count(); ++i) {
      p[schema.flat_index(i, c[i])] += w;
    }
  }
  return p;
}

Eigen::MatrixXd vertex_matrix(const AdmissibleMask& mask,
                              const ConceptSchema& schema,
                              std::uint64_t entry_budget) {
  const std::uint64_t s = schema.total_width();
  const std::uint64_t d = mask.admissible_count;
  if (s * d > entry_budget) {
    throw EnumerationBudgetExceeded(
        "vertex matrix would hold " + std::to_string(s * d) +
        " entries, over the budget of " + std::to_string(entry_budget));
  }
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s),
                                            static_cast<Eigen::Index>(d));
  StateOdometer odo(schema);
  Eigen::Index col = 0;
  for (std::uint64_t k = 0; k < mask.bits.size(); ++k, odo.advance()) {
    if (!mask.bits[k]) continue;
    const ConceptVector& c = odo.current();
    for (int i = 0; i < schema.concept_count(); ++i) {
      v(schema.flat_index(i, c[i]), col) = 1.0;
    }
    ++col;
  }
  return v;
}

int ReducedConcept::reduced_outcome(int original) const {
  const auto it = std::lower_bound(kept.begin(), kept.end(), original);
  if (it != kept.end() && *it == original) {
    return static_cast<int>(it - kept.begin()) + 1 + (has_zero ? 1 : 0);
  }
  if (!has_zero) {
    throw SchemaError("outcome " + std::to_string(original) +
                      " is not kept and the concept has no 0-outcome");
  }
  return 1;
}

namespace {

void collect_mentions(const RuleAst& node,
                      std::map<int, std::set<int>>& mentions) {
  if (node.kind == RuleAst::Kind::Literal) {
    mentions[node.literal.concept_index].insert(
        node.literal.outcomes.begin(), node.literal.outcomes.end());
  }
  for (const AstPtr& c : node.children) collect_mentions(*c, mentions);
}

std::string zero_outcome_name(const Concept& c) {
  std::string name = "_0";
  while (std::find(c.values.begin(), c.values.end(), name) != c.values.end()) {
    name += "_";
  }
  return name;
}

AstPtr rewrite_for_reduction(const RuleAst& node, const ReducedSchemaMap& map) {
  using Kind = RuleAst::Kind;
  switch (node.kind) {
    case Kind::Literal: {
      const ReducedConcept& rc = map.concepts[node.literal.concept_index];
      std::vector<int> outcomes;
      outcomes.reserve(node.literal.outcomes.size());
      for (int v : node.literal.outcomes) {
        outcomes.push_back(rc.reduced_outcome(v));
      }
      return ast::lit(rc.reduced_index, std::move(outcomes));
    }
    case Kind::And:
    case Kind::Or: {
      std::vector<AstPtr> children;
      children.reserve(node.children.size());
      for (const AstPtr& c : node.children) {
        children.push_back(rewrite_for_reduction(*c, map));
      }
      return node.kind == Kind::And ? ast::and_(std::move(children))
                                    : ast::or_(std::move(children));
    }
    case Kind::ConstTrue:
      return ast::const_true();
    default:
      throw Error("Internal", "reduction expects a negation-free AST");
  }
}

}  // namespace

SchemaReduction reduce_schema(const RuleAst& ast, const ConceptSchema& schema) {
  const AstPtr nnf = eliminate_negations(ast, schema);
  std::map<int, std::set<int>> mentions;
  collect_mentions(*nnf, mentions);
  if (mentions.empty()) {
    throw Error("ReductionError",
                "the rule mentions no concept; reduction is vacuous");
  }

  ReducedSchemaMap map;
  map.concepts.resize(schema.concept_count());
  std::vector<Concept> reduced_concepts;
  for (int i = 0; i < schema.concept_count(); ++i) {
    ReducedConcept& rc = map.concepts[i];
    const auto it = mentions.find(i);
    if (it == mentions.end()) {
      rc.untouched = true;
      continue;
    }
    rc.reduced_index = static_cast<int>(reduced_concepts.size());
    rc.kept.assign(it->second.begin(), it->second.end());
    for (int v = 1; v <= schema.outcome_count(i); ++v) {
      if (!it->second.count(v)) rc.replaced.push_back(v);
    }
    rc.has_zero = !rc.replaced.empty();

    const Concept& original = schema.concept_at(i);
    Concept reduced;
    reduced.name = original.name;
    if (rc.has_zero) reduced.values.push_back(zero_outcome_name(original));
    for (int v : rc.kept) reduced.values.push_back(original.values[v - 1]);
    reduced_concepts.push_back(std::move(reduced));
  }

  SchemaReduction out{ConceptSchema(std::move(reduced_concepts)), map,
                      nullptr};
  out.rewritten_ast = rewrite_for_reduction(*nnf, out.map);
  return out;
}

std::uint64_t reduce_state_index(std::uint64_t k,
                                 const ConceptSchema& original,
                                 const ConceptSchema& reduced,
                                 const ReducedSchemaMap& map) {
  const ConceptVector c = decode_state(k, original);
  ConceptVector reduced_c(reduced.concept_count());
  for (int i = 0; i < original.concept_count(); ++i) {
    const ReducedConcept& rc = map.concepts[i];
    if (rc.untouched) continue;
    reduced_c[rc.reduced_index] = rc.reduced_outcome(c[i]);
  }
  return encode_state(reduced_c, reduced);
}

MarginalVector expand_compressed_marginals(
    const MarginalVector& compressed, const ConceptSchema& original,
    const ConceptSchema& reduced, const ReducedSchemaMap& map,
    const std::vector<Eigen::VectorXd>& replacement_probs) {
  if (compressed.size() != reduced.total_width()) {
    throw DimensionError("compressed marginal width mismatch");
  }
  if (static_cast<int>(replacement_probs.size()) !=
      original.concept_count()) {
    throw DimensionError("need one replacement distribution per concept");
  }
  MarginalVector out = MarginalVector::Zero(original.total_width());
  for (int i = 0; i < original.concept_count(); ++i) {
    const ReducedConcept& rc = map.concepts[i];
    const Eigen::VectorXd& repl = replacement_probs[i];
    if (rc.untouched) {
      if (repl.size() != original.outcome_count(i)) {
        throw DimensionError("untouched concept " + std::to_string(i) +
                             " needs a full replacement distribution");
      }
      for (int v = 1; v <= original.outcome_count(i); ++v) {
        out[original.flat_index(i, v)] = repl[v - 1];
      }
      continue;
    }
    for (int v : rc.kept) {
      out[original.flat_index(i, v)] =
          compressed[reduced.flat_index(rc.reduced_index,
                                        rc.reduced_outcome(v))];
    }
    if (!rc.has_zero) continue;
    const double zero_mass =
        compressed[reduced.flat_index(rc.reduced_index, 1)];
    if (rc.replaced.size() == 1 && repl.size() == 0) {
      out[original.flat_index(i, rc.replaced[0])] = zero_mass;
      continue;
    }
    if (repl.size() != static_cast<Eigen::Index>(rc.replaced.size())) {
      throw DimensionError("replacement distribution for concept " +
                           std::to_string(i) + " has wrong length");
    }
    for (size_t r = 0; r < rc.replaced.size(); ++r) {
      out[original.flat_index(i, rc.replaced[r])] =
          zero_mass * repl[static_cast<Eigen::Index>(r)];
    }
  }
  return out;
}

}  // namespace rulehead
