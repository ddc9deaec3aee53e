#include "rulehead/heads.hpp"

#include <cmath>
#include <vector>

namespace rulehead {

namespace {

// Flat marginal indices touched by each admissible state, one row per
// placement column. Lets the hot head loops skip repeated decoding.
Eigen::MatrixXi admissible_flat_table(const PlacementMatrix& placement,
                                      const ConceptSchema& schema) {
  const auto d = static_cast<Eigen::Index>(placement.admissible_count());
  Eigen::MatrixXi table(d, schema.concept_count());
  for (Eigen::Index k = 0; k < d; ++k) {
    const ConceptVector c = decode_state(placement.state_index[k], schema);
    for (int i = 0; i < schema.concept_count(); ++i) {
      table(k, i) = schema.flat_index(i, c[i]);
    }
  }
  return table;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Extra input blocks a reduced compilation appends after the core head
// input: one per untouched concept (full block) and one per compressed
// concept with at least two replaced outcomes, in original concept order.
struct ExtraBlock {
  int concept_index;
  int offset;  // within the head input
  int size;
  bool untouched;
};

std::vector<ExtraBlock> extra_blocks(const CompiledRules& compiled,
                                     int core_width) {
  std::vector<ExtraBlock> extras;
  if (!compiled.reduction) return extras;
  int offset = core_width;
  const ConceptSchema& original = compiled.original_schema;
  for (int i = 0; i < original.concept_count(); ++i) {
    const ReducedConcept& rc = compiled.reduction->concepts[i];
    int size = 0;
    if (rc.untouched) {
      size = original.outcome_count(i);
    } else if (rc.replaced.size() >= 2) {
      size = static_cast<int>(rc.replaced.size());
    } else {
      continue;
    }
    extras.push_back({i, offset, size, rc.untouched});
    offset += size;
  }
  return extras;
}

MarginalVector core_forward(const HeadSpec& head,
                            const Eigen::VectorXd& input) {
  const CompiledRules& c = *head.compiled;
  switch (head.kind) {
    case HeadKind::Base:
      return base_head_forward(input, c.mask, c.schema);
    case HeadKind::AdmissibleState:
      return as_head_forward(input, c.placement, c.schema);
    case HeadKind::Vertex:
      return vertex_head_forward(input, c.vertices);
    case HeadKind::Constraints: {
      if (!c.system) {
        throw CnfExplosion(c.cnf_error.value_or(
            "constraints head needs a CNF-backed inequality system"));
      }
      const int s = c.s();
      return constraints_head_forward(input.head(s), input[s], *c.system,
                                      c.interior);
    }
    case HeadKind::Independent:
      break;
  }
  throw Error("Internal", "core_forward called with a non-core head");
}

Eigen::VectorXd core_backward(const HeadSpec& head,
                              const Eigen::VectorXd& input,
                              const Eigen::VectorXd& cotangent) {
  const CompiledRules& c = *head.compiled;
  const ConceptSchema& schema = c.schema;
  switch (head.kind) {
    case HeadKind::Base: {
      const Eigen::VectorXd pi_hat = softmax(input);
      double total = 0.0;
      for (Eigen::Index k = 0; k < pi_hat.size(); ++k) {
        if (c.mask.bits[k]) total += pi_hat[k];
      }
      // w = B^T v, accumulated state by state; then the mask-renormalize
      // VJP (u_k / S) * (w_k - w^T pi).
      Eigen::VectorXd w = Eigen::VectorXd::Zero(pi_hat.size());
      ConceptVector state(schema.concept_count(), 1);
      for (Eigen::Index k = 0; k < pi_hat.size(); ++k) {
        double sum = 0.0;
        for (int i = 0; i < schema.concept_count(); ++i) {
          sum += cotangent[schema.flat_index(i, state[i])];
        }
        w[k] = sum;
        for (int i = schema.concept_count() - 1; i >= 0; --i) {
          if (state[i] < schema.outcome_count(i)) {
            ++state[i];
            break;
          }
          state[i] = 1;
        }
      }
      double w_dot_pi = 0.0;
      for (Eigen::Index k = 0; k < pi_hat.size(); ++k) {
        if (c.mask.bits[k]) w_dot_pi += w[k] * pi_hat[k] / total;
      }
      Eigen::VectorXd g = Eigen::VectorXd::Zero(pi_hat.size());
      for (Eigen::Index k = 0; k < pi_hat.size(); ++k) {
        if (c.mask.bits[k]) g[k] = (w[k] - w_dot_pi) / total;
      }
      return softmax_vjp(pi_hat, g);
    }
    case HeadKind::AdmissibleState: {
      const Eigen::VectorXd pi = softmax(input);
      const Eigen::MatrixXi table = admissible_flat_table(c.placement, schema);
      Eigen::VectorXd w(pi.size());
      for (Eigen::Index k = 0; k < pi.size(); ++k) {
        double sum = 0.0;
        for (int i = 0; i < schema.concept_count(); ++i) {
          sum += cotangent[table(k, i)];
        }
        w[k] = sum;
      }
      return softmax_vjp(pi, w);
    }
    case HeadKind::Vertex: {
      const Eigen::VectorXd pi = softmax(input);
      return softmax_vjp(pi, c.vertices.transpose() * cotangent);
    }
    case HeadKind::Constraints: {
      if (!c.system) {
        throw CnfExplosion(c.cnf_error.value_or(
            "constraints head needs a CNF-backed inequality system"));
      }
      const InequalitySystem& sys = *c.system;
      const InteriorPoint& x0 = c.interior;
      const int s = c.s();
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(s + 1);

      const RayCast ray = cast_ray(input.head(s), x0, sys);
      if (ray.degenerate) return grad;
      const double gate = sigmoid(input[s]);
      const double scale = 1.0 - 1e-6;

      // out = x0 + gate*scale*alpha(dhat)*dhat with the active wall held
      // fixed: d(alpha)/d(dhat) = (slack/beta^2) * a_active.
      Eigen::VectorXd active_row = Eigen::VectorXd::Zero(s);
      bool bounded = false;
      if (ray.active_clause >= 0) {
        for (int idx : sys.clause_rows[ray.active_clause]) {
          active_row[idx] = 1.0;
        }
        bounded = true;
      } else if (ray.active_coordinate >= 0) {
        active_row[ray.active_coordinate] = 1.0;
        bounded = true;
      }

      const double dhat_dot_u = ray.unit_direction.dot(cotangent);
      grad[s] = scale * ray.alpha_max * dhat_dot_u * gate * (1.0 - gate);

      Eigen::VectorXd y = Eigen::VectorXd::Zero(s);
      if (bounded) {
        const double beta = -active_row.dot(ray.unit_direction);
        const double slack = ray.alpha_max * beta;
        y = (gate * scale) *
            (ray.alpha_max * cotangent +
             (slack / (beta * beta)) * dhat_dot_u * active_row);
      }
      const Eigen::VectorXd z =
          (y - ray.unit_direction * ray.unit_direction.dot(y)) / ray.norm;
      grad.head(s) = project_feasible_direction(z, x0, sys);
      return grad;
    }
    case HeadKind::Independent:
      break;
  }
  throw Error("Internal", "core_backward called with a non-core head");
}

MarginalVector independent_forward(const ConceptSchema& schema,
                                   const Eigen::VectorXd& input) {
  MarginalVector p(schema.total_width());
  for (int i = 0; i < schema.concept_count(); ++i) {
    const int off = schema.block_offset(i);
    const int n = schema.outcome_count(i);
    p.segment(off, n) = softmax(input.segment(off, n));
  }
  return p;
}

Eigen::VectorXd independent_backward(const ConceptSchema& schema,
                                     const Eigen::VectorXd& input,
                                     const Eigen::VectorXd& cotangent) {
  Eigen::VectorXd grad(schema.total_width());
  for (int i = 0; i < schema.concept_count(); ++i) {
    const int off = schema.block_offset(i);
    const int n = schema.outcome_count(i);
    const Eigen::VectorXd sm = softmax(input.segment(off, n));
    grad.segment(off, n) = softmax_vjp(sm, cotangent.segment(off, n));
  }
  return grad;
}

}  // namespace

std::string head_kind_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::Base:
      return "base";
    case HeadKind::AdmissibleState:
      return "as";
    case HeadKind::Vertex:
      return "vertex";
    case HeadKind::Constraints:
      return "constraints";
    case HeadKind::Independent:
      return "independent";
  }
  return "unknown";
}

HeadKind head_kind_from_name(const std::string& name) {
  if (name == "base") return HeadKind::Base;
  if (name == "as") return HeadKind::AdmissibleState;
  if (name == "vertex") return HeadKind::Vertex;
  if (name == "constraints") return HeadKind::Constraints;
  if (name == "independent") return HeadKind::Independent;
  throw Error("ConfigError", "unknown head kind '" + name + "'");
}

int core_input_width(HeadKind kind, const CompiledRules& compiled) {
  switch (kind) {
    case HeadKind::Base:
      return static_cast<int>(compiled.t());
    case HeadKind::AdmissibleState:
    case HeadKind::Vertex:
      return static_cast<int>(compiled.d());
    case HeadKind::Constraints:
      return compiled.s() + 1;
    case HeadKind::Independent:
      return compiled.original_schema.total_width();
  }
  throw Error("Internal", "unknown head kind");
}

int HeadSpec::input_width() const {
  if (kind == HeadKind::Independent) {
    return schema->total_width();
  }
  const int core = core_input_width(kind, *compiled);
  int width = core;
  for (const ExtraBlock& e : extra_blocks(*compiled, core)) width += e.size;
  return width;
}

int HeadSpec::output_width() const {
  return original_schema().total_width();
}

const ConceptSchema& HeadSpec::original_schema() const {
  return compiled ? compiled->original_schema : *schema;
}

HeadSpec make_head(HeadKind kind,
                   std::shared_ptr<const CompiledRules> compiled) {
  if (kind == HeadKind::Independent) {
    if (!compiled) {
      throw Error("ConfigError",
                  "independent head needs a schema; use "
                  "make_independent_head");
    }
    return make_independent_head(
        std::make_shared<ConceptSchema>(compiled->original_schema));
  }
  if (!compiled) {
    throw Error("ConfigError", "rule heads need a compilation");
  }
  if (kind == HeadKind::Constraints && !compiled->system) {
    throw CnfExplosion(compiled->cnf_error.value_or(
        "constraints head needs a CNF-backed inequality system"));
  }
  HeadSpec spec;
  spec.kind = kind;
  spec.compiled = std::move(compiled);
  return spec;
}

HeadSpec make_independent_head(std::shared_ptr<const ConceptSchema> schema) {
  HeadSpec spec;
  spec.kind = HeadKind::Independent;
  spec.schema = std::move(schema);
  return spec;
}

MarginalVector base_head_forward(const Eigen::VectorXd& logits,
                                 const AdmissibleMask& mask,
                                 const ConceptSchema& schema) {
  if (static_cast<std::uint64_t>(logits.size()) != schema.joint_count()) {
    throw DimensionError("base head expects one logit per joint state");
  }
  const Eigen::VectorXd pi_hat = softmax(logits);
  double total = 0.0;
  for (Eigen::Index k = 0; k < pi_hat.size(); ++k) {
    if (mask.bits[k]) total += pi_hat[k];
  }
  // total > 0: softmax is strictly positive and d >= 1.
  MarginalVector p = MarginalVector::Zero(schema.total_width());
  ConceptVector state(schema.concept_count(), 1);
  for (Eigen::Index k = 0; k < pi_hat.size(); ++k) {
    if (mask.bits[k]) {
      const double w = pi_hat[k] / total;
      for (int i = 0; i < schema.concept_count(); ++i) {
        p[schema.flat_index(i, state[i])] += w;
      }
    }
    for (int i = schema.concept_count() - 1; i >= 0; --i) {
      if (state[i] < schema.outcome_count(i)) {
        ++state[i];
        break;
      }
      state[i] = 1;
    }
  }
  return p;
}

MarginalVector as_head_forward(const Eigen::VectorXd& logits,
                               const PlacementMatrix& placement,
                               const ConceptSchema& schema) {
  if (static_cast<std::uint64_t>(logits.size()) !=
      placement.admissible_count()) {
    throw DimensionError("AS head expects one logit per admissible state");
  }
  const Eigen::VectorXd pi = softmax(logits);
  MarginalVector p = MarginalVector::Zero(schema.total_width());
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    const ConceptVector c = decode_state(placement.state_index[k], schema);
    for (int i = 0; i < schema.concept_count(); ++i) {
      p[schema.flat_index(i, c[i])] += pi[k];
    }
  }
  return p;
}

MarginalVector vertex_head_forward(const Eigen::VectorXd& logits,
                                   const Eigen::MatrixXd& vertices) {
  if (logits.size() != vertices.cols()) {
    throw DimensionError("vertex head expects one logit per vertex");
  }
  return vertices * softmax(logits);
}

MarginalVector constraints_head_forward(const Eigen::VectorXd& raw,
                                        double gate_raw,
                                        const InequalitySystem& sys,
                                        const InteriorPoint& x0) {
  return map_to_polytope(raw, sigmoid(gate_raw), x0, sys);
}

MarginalVector head_forward(const HeadSpec& head,
                            const Eigen::VectorXd& input) {
  if (input.size() != head.input_width()) {
    throw DimensionError("head input width mismatch: got " +
                         std::to_string(input.size()) + ", expected " +
                         std::to_string(head.input_width()));
  }
  if (head.kind == HeadKind::Independent) {
    return independent_forward(*head.schema, input);
  }
  const CompiledRules& c = *head.compiled;
  const int core = core_input_width(head.kind, c);
  const MarginalVector compressed = core_forward(head, input.head(core));
  if (!c.reduction) return compressed;

  const ConceptSchema& original = c.original_schema;
  std::vector<Eigen::VectorXd> replacement(original.concept_count());
  for (const ExtraBlock& e : extra_blocks(c, core)) {
    replacement[e.concept_index] = softmax(input.segment(e.offset, e.size));
  }
  return expand_compressed_marginals(compressed, original, c.schema,
                                     *c.reduction, replacement);
}

Eigen::VectorXd head_backward(const HeadSpec& head,
                              const Eigen::VectorXd& input,
                              const Eigen::VectorXd& cotangent) {
  if (input.size() != head.input_width()) {
    throw DimensionError("head input width mismatch");
  }
  if (cotangent.size() != head.output_width()) {
    throw DimensionError("head cotangent width mismatch");
  }
  if (head.kind == HeadKind::Independent) {
    return independent_backward(*head.schema, input, cotangent);
  }
  const CompiledRules& c = *head.compiled;
  const int core = core_input_width(head.kind, c);
  if (!c.reduction) {
    return core_backward(head, input.head(core), cotangent);
  }

  // Reduced pipeline: distribute the original-schema cotangent across the
  // compressed marginal and the extra softmax blocks, then pull the
  // compressed part back through the core head.
  const ConceptSchema& original = c.original_schema;
  const ConceptSchema& reduced = c.schema;
  const MarginalVector compressed = core_forward(head, input.head(core));

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(input.size());
  Eigen::VectorXd compressed_cotangent =
      Eigen::VectorXd::Zero(reduced.total_width());

  std::vector<ExtraBlock> extras = extra_blocks(c, core);
  std::vector<const ExtraBlock*> extra_of(original.concept_count(), nullptr);
  for (const ExtraBlock& e : extras) extra_of[e.concept_index] = &e;

  for (int i = 0; i < original.concept_count(); ++i) {
    const ReducedConcept& rc = c.reduction->concepts[i];
    if (rc.untouched) {
      const ExtraBlock& e = *extra_of[i];
      const Eigen::VectorXd sm = softmax(input.segment(e.offset, e.size));
      Eigen::VectorXd up(e.size);
      for (int v = 1; v <= original.outcome_count(i); ++v) {
        up[v - 1] = cotangent[original.flat_index(i, v)];
      }
      grad.segment(e.offset, e.size) = softmax_vjp(sm, up);
      continue;
    }
    for (int v : rc.kept) {
      compressed_cotangent[reduced.flat_index(rc.reduced_index,
                                              rc.reduced_outcome(v))] +=
          cotangent[original.flat_index(i, v)];
    }
    if (!rc.has_zero) continue;
    const int zero_flat = reduced.flat_index(rc.reduced_index, 1);
    const double zero_mass = compressed[zero_flat];
    if (rc.replaced.size() == 1) {
      compressed_cotangent[zero_flat] +=
          cotangent[original.flat_index(i, rc.replaced[0])];
      continue;
    }
    const ExtraBlock& e = *extra_of[i];
    const Eigen::VectorXd sm = softmax(input.segment(e.offset, e.size));
    Eigen::VectorXd up(e.size);
    for (size_t r = 0; r < rc.replaced.size(); ++r) {
      const double u_v = cotangent[original.flat_index(i, rc.replaced[r])];
      up[static_cast<Eigen::Index>(r)] = zero_mass * u_v;
      compressed_cotangent[zero_flat] += sm[static_cast<Eigen::Index>(r)] * u_v;
    }
    grad.segment(e.offset, e.size) = softmax_vjp(sm, up);
  }

  grad.head(core) = core_backward(head, input.head(core), compressed_cotangent);
  return grad;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double shift = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - shift).exp();
  return e / e.sum();
}

Eigen::VectorXd softmax_vjp(const Eigen::VectorXd& softmax_value,
                            const Eigen::VectorXd& upstream) {
  const double dot = softmax_value.dot(upstream);
  return softmax_value.array() * (upstream.array() - dot);
}

}  // namespace rulehead
