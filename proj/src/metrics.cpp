#include "rulehead/metrics.hpp"

namespace rulehead {

int argmax_outcome(const Eigen::VectorXd& marginal, const ConceptSchema& schema,
                   int concept_index) {
  const int off = schema.block_offset(concept_index);
  const int n = schema.outcome_count(concept_index);
  int best = 1;
  double best_value = marginal[off];
  for (int j = 2; j <= n; ++j) {
    if (marginal[off + j - 1] > best_value) {
      best_value = marginal[off + j - 1];
      best = j;
    }
  }
  return best;
}

std::vector<ConceptMetrics> evaluate_metrics(const Eigen::MatrixXd& marginals,
                                             const Eigen::MatrixXi& labels,
                                             const ConceptSchema& schema) {
  if (marginals.rows() != labels.rows()) {
    throw DimensionError("marginals and labels row counts differ");
  }
  if (marginals.cols() != schema.total_width() ||
      labels.cols() != schema.concept_count()) {
    throw DimensionError("marginals or labels width does not match schema");
  }

  std::vector<ConceptMetrics> out;
  for (int i = 0; i < schema.concept_count(); ++i) {
    ConceptMetrics m;
    m.concept_name = schema.concept_at(i).name;
    const int n = schema.outcome_count(i);
    std::vector<long> tp(n + 1, 0), fp(n + 1, 0), fn(n + 1, 0);
    long correct = 0;
    for (Eigen::Index r = 0; r < labels.rows(); ++r) {
      const int truth = labels(r, i);
      if (truth == -1) continue;
      ++m.labeled;
      const int pred = argmax_outcome(marginals.row(r).transpose(), schema, i);
      if (pred == truth) {
        ++correct;
        ++tp[truth];
      } else {
        ++fp[pred];
        ++fn[truth];
      }
    }
    if (m.labeled > 0) {
      m.accuracy = static_cast<double>(correct) / m.labeled;
      double f1_sum = 0.0;
      int f1_terms = 0;
      for (int j = 1; j <= n; ++j) {
        if (tp[j] + fp[j] + fn[j] == 0) continue;
        const double denom = 2.0 * tp[j] + fp[j] + fn[j];
        f1_sum += denom > 0.0 ? 2.0 * tp[j] / denom : 0.0;
        ++f1_terms;
      }
      m.macro_f1 = f1_terms > 0 ? f1_sum / f1_terms : 0.0;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ConceptMetrics> evaluate_metrics(const Model& model,
                                             const Dataset& data,
                                             const ConceptSchema& schema) {
  return evaluate_metrics(model.predict(data.features), data.labels, schema);
}

}  // namespace rulehead
