#ifndef RULEHEAD_METRICS_HPP
#define RULEHEAD_METRICS_HPP

#include <string>
#include <vector>

#include "rulehead/nn.hpp"

namespace rulehead {

struct ConceptMetrics {
  std::string concept_name;
  int labeled = 0;  // test entries with a known label
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// Argmax predictions per concept block against the labeled test entries;
// unlabeled entries are skipped. Macro-F1 averages the one-vs-rest F1 over
// the outcomes that appear in the labels or the predictions (an outcome
// with neither carries no information and is left out of the average).
std::vector<ConceptMetrics> evaluate_metrics(const Eigen::MatrixXd& marginals,
                                             const Eigen::MatrixXi& labels,
                                             const ConceptSchema& schema);

std::vector<ConceptMetrics> evaluate_metrics(const Model& model,
                                             const Dataset& data,
                                             const ConceptSchema& schema);

// Argmax outcome (1-based) of concept i in a marginal row.
int argmax_outcome(const Eigen::VectorXd& marginal, const ConceptSchema& schema,
                   int concept_index);

}  // namespace rulehead

#endif  // RULEHEAD_METRICS_HPP
