#ifndef RULEHEAD_NN_HPP
#define RULEHEAD_NN_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "rulehead/heads.hpp"

namespace rulehead {

// Partially labeled multi-concept dataset; label -1 means unknown.
struct Dataset {
  Eigen::MatrixXd features;  // n x a
  Eigen::MatrixXi labels;    // n x (m+1), entries in C^(i) or -1

  int sample_count() const { return static_cast<int>(features.rows()); }
  int feature_count() const { return static_cast<int>(features.cols()); }
  int concept_count() const { return static_cast<int>(labels.cols()); }
};

// CSV with a header row: feature columns x0..x{a-1}, then one column per
// concept holding 1-based outcome indices or -1.
Dataset load_dataset_csv(const std::filesystem::path& path,
                         const ConceptSchema& schema);
void save_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                      const ConceptSchema& schema);

struct TrainConfig {
  std::vector<int> hidden{64, 64};  // ReLU activations throughout
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;
  enum class Optimizer { Adam, Sgd };
  Optimizer optimizer = Optimizer::Adam;
  double momentum = 0.9;  // SGD only
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  std::uint64_t seed = 0;
  HeadKind head = HeadKind::AdmissibleState;
  // Override of the per-concept loss weights; default is the inverse
  // labeled count.
  std::optional<Eigen::VectorXd> concept_weights;
};

TrainConfig train_config_from_json_text(const std::string& text);
std::string train_config_to_json_text(const TrainConfig& config);

// omega_i = 1 / max(1, #labeled samples of concept i).
Eigen::VectorXd default_weights(const Dataset& data);

// Weighted masked cross entropy, summed over samples and concepts.
// Probabilities are floored at 1e-12 before the log.
double masked_ce_loss(const Eigen::MatrixXd& marginals,
                      const Eigen::MatrixXi& labels,
                      const Eigen::VectorXd& weights,
                      const ConceptSchema& schema);

// Per-concept unweighted loss sums, same masking.
Eigen::VectorXd masked_ce_per_concept(const Eigen::MatrixXd& marginals,
                                      const Eigen::MatrixXi& labels,
                                      const ConceptSchema& schema);

// d(masked_ce_loss)/d(marginals); rows align with the batch.
Eigen::MatrixXd masked_ce_grad(const Eigen::MatrixXd& marginals,
                               const Eigen::MatrixXi& labels,
                               const Eigen::VectorXd& weights,
                               const ConceptSchema& schema);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Fully-connected ReLU network with a concept head on top.
struct Model {
  std::vector<DenseLayer> layers;
  HeadSpec head;
  TrainConfig config;
  Eigen::VectorXd omega;

  // Pre-head activations, one row per sample.
  Eigen::MatrixXd embed(const Eigen::MatrixXd& x) const;
  // Marginal vectors, one row per sample (original schema layout).
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
};

// Summed batch loss with its exact parameter gradient (of the sum; the
// trainer scales by 1/batch before the optimizer step).
struct BatchGradients {
  double loss = 0.0;
  Eigen::VectorXd per_concept;      // unweighted per-concept loss sums
  std::vector<DenseLayer> layers;   // gradient, same shapes as the model
};

BatchGradients batch_gradients(const Model& model, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXi& labels,
                               Eigen::MatrixXd* marginals_out = nullptr);

struct EpochLog {
  int epoch = 0;
  double total = 0.0;             // sum of omega-weighted concept losses
  Eigen::VectorXd per_concept;    // unweighted sums
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

// Called after every optimizer step with that batch's marginals; used by
// tests to assert feasibility throughout training.
using BatchObserver =
    std::function<void(int epoch, const Eigen::MatrixXd& marginals)>;

// Deterministic given config.seed. Throws NumericError as soon as a batch
// loss stops being finite.
TrainResult train(const TrainConfig& config, const Dataset& data,
                  HeadSpec head, const BatchObserver& observer = nullptr);

// Checkpoint JSON: layer shapes plus row-major weights. Loading validates
// the final width against the supplied head.
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path, HeadSpec head);

// CSV: epoch, total, then one unweighted loss column per concept.
void save_train_log_csv(const std::filesystem::path& path,
                        const std::vector<EpochLog>& log,
                        const ConceptSchema& schema);

}  // namespace rulehead

#endif  // RULEHEAD_NN_HPP
