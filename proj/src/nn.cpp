#include "rulehead/nn.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rulehead/log.hpp"
#include "rulehead/rng.hpp"

namespace rulehead {

namespace {

using nlohmann::json;

constexpr double kProbFloor = 1e-12;

double parse_double(std::string_view cell, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw IoError(std::string("bad ") + what + " value '" +
                  std::string(cell) + "'");
  }
  return value;
}

void split_csv_line(std::string_view line,
                    std::vector<std::string_view>& out) {
  out.clear();
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

Dataset load_dataset_csv(const std::filesystem::path& path,
                         const ConceptSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset " + path.string());

  std::vector<std::string_view> cells;
  split_csv_line(line, cells);
  const int concepts = schema.concept_count();
  const int total = static_cast<int>(cells.size());
  if (total <= concepts) {
    throw IoError("dataset header needs feature columns before the " +
                  std::to_string(concepts) + " concept columns");
  }
  const int features = total - concepts;
  for (int i = 0; i < concepts; ++i) {
    if (std::string(cells[features + i]) != schema.concept_at(i).name) {
      throw IoError("dataset concept column '" +
                    std::string(cells[features + i]) +
                    "' does not match schema concept '" +
                    schema.concept_at(i).name + "'");
    }
  }

  std::vector<double> feature_values;
  std::vector<int> label_values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    split_csv_line(line, cells);
    if (static_cast<int>(cells.size()) != total) {
      throw IoError("row " + std::to_string(rows + 2) + " has " +
                    std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(total));
    }
    for (int c = 0; c < features; ++c) {
      feature_values.push_back(parse_double(cells[c], "feature"));
    }
    for (int c = 0; c < concepts; ++c) {
      const int v =
          static_cast<int>(parse_double(cells[features + c], "label"));
      if (v != -1 && (v < 1 || v > schema.outcome_count(c))) {
        throw IoError("row " + std::to_string(rows + 2) +
                      ": label out of range for concept '" +
                      schema.concept_at(c).name + "'");
      }
      label_values.push_back(v);
    }
    ++rows;
  }

  Dataset data;
  data.features = Eigen::Map<
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      feature_values.data(), rows, features);
  data.labels = Eigen::Map<
      Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      label_values.data(), rows, concepts);
  return data;
}

void save_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                      const ConceptSchema& schema) {
  if (data.concept_count() != schema.concept_count()) {
    throw DimensionError("dataset concept count does not match schema");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (int c = 0; c < data.feature_count(); ++c) out << 'x' << c << ',';
  for (int i = 0; i < schema.concept_count(); ++i) {
    out << schema.concept_at(i).name
        << (i + 1 < schema.concept_count() ? "," : "\n");
  }
  char buffer[64];
  for (int r = 0; r < data.sample_count(); ++r) {
    for (int c = 0; c < data.feature_count(); ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.8g", data.features(r, c));
      out << buffer << ',';
    }
    for (int i = 0; i < data.concept_count(); ++i) {
      out << data.labels(r, i) << (i + 1 < data.concept_count() ? "," : "\n");
    }
  }
}

TrainConfig train_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed train config: ") + e.what());
  }
  TrainConfig c;
  if (j.contains("hidden")) c.hidden = j["hidden"].get<std::vector<int>>();
  if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
  if (j.contains("learning_rate")) {
    c.learning_rate = j["learning_rate"].get<double>();
  }
  if (j.contains("optimizer")) {
    const std::string name = j["optimizer"].get<std::string>();
    if (name == "adam") {
      c.optimizer = TrainConfig::Optimizer::Adam;
    } else if (name == "sgd") {
      c.optimizer = TrainConfig::Optimizer::Sgd;
    } else {
      throw IoError("unknown optimizer '" + name + "'");
    }
  }
  if (j.contains("momentum")) c.momentum = j["momentum"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("head")) {
    c.head = head_kind_from_name(j["head"].get<std::string>());
  }
  if (j.contains("concept_weights") && !j["concept_weights"].is_null()) {
    const auto w = j["concept_weights"].get<std::vector<double>>();
    c.concept_weights = Eigen::Map<const Eigen::VectorXd>(
        w.data(), static_cast<Eigen::Index>(w.size()));
  }
  for (int h : c.hidden) {
    if (h <= 0) throw IoError("hidden sizes must be positive");
  }
  if (c.epochs <= 0 || c.batch_size <= 0 || c.learning_rate <= 0.0) {
    throw IoError("epochs, batch_size and learning_rate must be positive");
  }
  return c;
}

std::string train_config_to_json_text(const TrainConfig& c) {
  json j{{"hidden", c.hidden},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"learning_rate", c.learning_rate},
         {"optimizer",
          c.optimizer == TrainConfig::Optimizer::Adam ? "adam" : "sgd"},
         {"momentum", c.momentum},
         {"seed", c.seed},
         {"head", head_kind_name(c.head)}};
  if (c.concept_weights) {
    j["concept_weights"] = std::vector<double>(
        c.concept_weights->data(),
        c.concept_weights->data() + c.concept_weights->size());
  }
  return j.dump(2) + "\n";
}

Eigen::VectorXd default_weights(const Dataset& data) {
  Eigen::VectorXd omega(data.concept_count());
  for (int i = 0; i < data.concept_count(); ++i) {
    int labeled = 0;
    for (int r = 0; r < data.sample_count(); ++r) {
      if (data.labels(r, i) != -1) ++labeled;
    }
    omega[i] = 1.0 / std::max(1, labeled);
  }
  return omega;
}

double masked_ce_loss(const Eigen::MatrixXd& marginals,
                      const Eigen::MatrixXi& labels,
                      const Eigen::VectorXd& weights,
                      const ConceptSchema& schema) {
  double loss = 0.0;
  for (int r = 0; r < marginals.rows(); ++r) {
    for (int i = 0; i < schema.concept_count(); ++i) {
      const int z = labels(r, i);
      if (z == -1) continue;
      const double p =
          std::max(marginals(r, schema.flat_index(i, z)), kProbFloor);
      loss -= weights[i] * std::log(p);
    }
  }
  return loss;
}

Eigen::VectorXd masked_ce_per_concept(const Eigen::MatrixXd& marginals,
                                      const Eigen::MatrixXi& labels,
                                      const ConceptSchema& schema) {
  Eigen::VectorXd loss = Eigen::VectorXd::Zero(schema.concept_count());
  for (int r = 0; r < marginals.rows(); ++r) {
    for (int i = 0; i < schema.concept_count(); ++i) {
      const int z = labels(r, i);
      if (z == -1) continue;
      const double p =
          std::max(marginals(r, schema.flat_index(i, z)), kProbFloor);
      loss[i] -= std::log(p);
    }
  }
  return loss;
}

Eigen::MatrixXd masked_ce_grad(const Eigen::MatrixXd& marginals,
                               const Eigen::MatrixXi& labels,
                               const Eigen::VectorXd& weights,
                               const ConceptSchema& schema) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(marginals.rows(),
                                               marginals.cols());
  for (int r = 0; r < marginals.rows(); ++r) {
    for (int i = 0; i < schema.concept_count(); ++i) {
      const int z = labels(r, i);
      if (z == -1) continue;
      const int idx = schema.flat_index(i, z);
      const double p = marginals(r, idx);
      // Matches the floored loss: constant (zero gradient) below the floor.
      if (p > kProbFloor) grad(r, idx) -= weights[i] / p;
    }
  }
  return grad;
}

Eigen::MatrixXd Model::embed(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = a * layers[l].weight.transpose();
    z.rowwise() += layers[l].bias.transpose();
    if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd Model::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd e = embed(x);
  Eigen::MatrixXd p(x.rows(), head.output_width());
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    p.row(r) = head_forward(head, e.row(r).transpose()).transpose();
  }
  return p;
}

namespace {

struct AdamState {
  Eigen::MatrixXd mw, vw;
  Eigen::VectorXd mb, vb;
};

void init_layers(std::vector<DenseLayer>& layers, int input,
                 const std::vector<int>& hidden, int output, Rng& rng) {
  std::vector<int> sizes;
  sizes.push_back(input);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.weight = Eigen::MatrixXd(sizes[l + 1], sizes[l]);
    const bool last = l + 2 == sizes.size();
    const double scale = last ? std::sqrt(1.0 / sizes[l])
                              : std::sqrt(2.0 / sizes[l]);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = scale * rng.normal();
      }
    }
    layer.bias = Eigen::VectorXd::Zero(sizes[l + 1]);
    layers.push_back(std::move(layer));
  }
}

}  // namespace

BatchGradients batch_gradients(const Model& model, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXi& labels,
                               Eigen::MatrixXd* marginals_out) {
  const ConceptSchema& schema = model.head.original_schema();
  const size_t n_layers = model.layers.size();
  const Eigen::Index b = x.rows();

  // Forward pass, keeping layer inputs for backprop.
  std::vector<Eigen::MatrixXd> activations;
  activations.push_back(x);
  for (size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = activations.back() * model.layers[l].weight.transpose();
    z.rowwise() += model.layers[l].bias.transpose();
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    activations.push_back(std::move(z));
  }
  const Eigen::MatrixXd& embedding = activations.back();

  Eigen::MatrixXd marginals(b, model.head.output_width());
  for (Eigen::Index r = 0; r < b; ++r) {
    marginals.row(r) =
        head_forward(model.head, embedding.row(r).transpose()).transpose();
  }

  BatchGradients out;
  out.loss = masked_ce_loss(marginals, labels, model.omega, schema);
  out.per_concept = masked_ce_per_concept(marginals, labels, schema);

  const Eigen::MatrixXd dmarginals =
      masked_ce_grad(marginals, labels, model.omega, schema);
  Eigen::MatrixXd delta(b, model.head.input_width());
  for (Eigen::Index r = 0; r < b; ++r) {
    delta.row(r) = head_backward(model.head, embedding.row(r).transpose(),
                                 dmarginals.row(r).transpose())
                       .transpose();
  }

  out.layers.resize(n_layers);
  for (size_t l = n_layers; l-- > 0;) {
    out.layers[l].weight = delta.transpose() * activations[l];
    out.layers[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd next = delta * model.layers[l].weight;
      // ReLU mask from the stored activation (positive iff z positive).
      next.array() *= (activations[l].array() > 0.0).cast<double>();
      delta = std::move(next);
    }
  }
  if (marginals_out != nullptr) *marginals_out = std::move(marginals);
  return out;
}

TrainResult train(const TrainConfig& config, const Dataset& data,
                  HeadSpec head, const BatchObserver& observer) {
  if (data.sample_count() == 0) {
    throw DimensionError("training needs at least one sample");
  }
  const ConceptSchema& schema = head.original_schema();
  if (data.concept_count() != schema.concept_count()) {
    throw DimensionError("dataset labels do not match the schema");
  }
  bool any_label = false;
  for (int r = 0; r < data.sample_count() && !any_label; ++r) {
    for (int i = 0; i < data.concept_count() && !any_label; ++i) {
      any_label = data.labels(r, i) != -1;
    }
  }
  if (!any_label) {
    throw DimensionError("dataset has no labeled entries at all");
  }

  Eigen::VectorXd omega =
      config.concept_weights ? *config.concept_weights : default_weights(data);
  if (omega.size() != schema.concept_count()) {
    throw DimensionError("concept weight vector has wrong length");
  }

  Rng rng(config.seed);
  TrainResult result{Model{{}, std::move(head), config, omega}, {}};
  Model& model = result.model;
  init_layers(model.layers, data.feature_count(), config.hidden,
              model.head.input_width(), rng);

  const size_t n_layers = model.layers.size();
  std::vector<AdamState> adam(n_layers);
  std::vector<DenseLayer> velocity(n_layers);  // SGD momentum
  for (size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = model.layers[l];
    adam[l].mw = Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols());
    adam[l].vw = adam[l].mw;
    adam[l].mb = Eigen::VectorXd::Zero(layer.bias.size());
    adam[l].vb = adam[l].mb;
    velocity[l].weight = adam[l].mw;
    velocity[l].bias = adam[l].mb;
  }

  std::vector<int> order(data.sample_count());
  for (int i = 0; i < data.sample_count(); ++i) order[i] = i;

  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_total = 0.0;
    Eigen::VectorXd epoch_concepts =
        Eigen::VectorXd::Zero(schema.concept_count());

    for (int start = 0; start < data.sample_count();
         start += config.batch_size) {
      const int b =
          std::min(config.batch_size, data.sample_count() - start);
      Eigen::MatrixXd x(b, data.feature_count());
      Eigen::MatrixXi y(b, data.concept_count());
      for (int r = 0; r < b; ++r) {
        x.row(r) = data.features.row(order[start + r]);
        y.row(r) = data.labels.row(order[start + r]);
      }

      Eigen::MatrixXd marginals;
      const BatchGradients grads = batch_gradients(model, x, y, &marginals);
      if (!std::isfinite(grads.loss)) {
        throw NumericError("non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch offset " +
                           std::to_string(start));
      }
      epoch_total += grads.loss;
      epoch_concepts += grads.per_concept;

      // Gradients averaged over the batch.
      const double inv_b = 1.0 / b;
      ++step;
      for (size_t l = n_layers; l-- > 0;) {
        const Eigen::MatrixXd grad_w = inv_b * grads.layers[l].weight;
        const Eigen::VectorXd grad_b = inv_b * grads.layers[l].bias;

        DenseLayer& layer = model.layers[l];
        if (config.optimizer == TrainConfig::Optimizer::Adam) {
          AdamState& st = adam[l];
          const double b1 = config.adam_beta1, b2 = config.adam_beta2;
          st.mw = b1 * st.mw + (1 - b1) * grad_w;
          st.vw = b2 * st.vw.array() + (1 - b2) * grad_w.array().square();
          st.mb = b1 * st.mb + (1 - b1) * grad_b;
          st.vb = b2 * st.vb.array() + (1 - b2) * grad_b.array().square();
          const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
          const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
          layer.weight.array() -=
              config.learning_rate * (st.mw.array() / c1) /
              ((st.vw.array() / c2).sqrt() + 1e-8);
          layer.bias.array() -= config.learning_rate * (st.mb.array() / c1) /
                                ((st.vb.array() / c2).sqrt() + 1e-8);
        } else {
          DenseLayer& v = velocity[l];
          v.weight = config.momentum * v.weight - config.learning_rate * grad_w;
          v.bias = config.momentum * v.bias - config.learning_rate * grad_b;
          layer.weight += v.weight;
          layer.bias += v.bias;
        }
      }

      if (observer) observer(epoch, marginals);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.total = epoch_total;
    entry.per_concept = epoch_concepts;
    result.log.push_back(std::move(entry));
    log::debug("epoch %d loss %.6f", epoch, epoch_total);
  }
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  json layers = json::array();
  for (const DenseLayer& layer : model.layers) {
    std::vector<double> w;
    w.reserve(static_cast<size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        w.push_back(layer.weight(r, c));
      }
    }
    layers.push_back(
        {{"in", layer.weight.cols()},
         {"out", layer.weight.rows()},
         {"weight", w},
         {"bias", std::vector<double>(layer.bias.data(),
                                      layer.bias.data() + layer.bias.size())}});
  }
  const json j{{"format", "rulehead-checkpoint-v1"},
               {"head", head_kind_name(model.head.kind)},
               {"config", json::parse(train_config_to_json_text(model.config))},
               {"omega", std::vector<double>(
                             model.omega.data(),
                             model.omega.data() + model.omega.size())},
               {"layers", layers}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Model load_checkpoint(const std::filesystem::path& path, HeadSpec head) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint: " + std::string(e.what()));
  }
  if (j.value("format", "") != "rulehead-checkpoint-v1") {
    throw IoError("not a rulehead checkpoint: " + path.string());
  }

  Model model{{}, std::move(head), {}, {}};
  model.config = train_config_from_json_text(j.at("config").dump());
  const auto omega = j.at("omega").get<std::vector<double>>();
  model.omega = Eigen::Map<const Eigen::VectorXd>(
      omega.data(), static_cast<Eigen::Index>(omega.size()));

  for (const json& lj : j.at("layers")) {
    DenseLayer layer;
    const int in_w = lj.at("in").get<int>();
    const int out_w = lj.at("out").get<int>();
    const auto w = lj.at("weight").get<std::vector<double>>();
    const auto b = lj.at("bias").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != in_w * out_w ||
        static_cast<int>(b.size()) != out_w) {
      throw IoError("checkpoint layer shape mismatch");
    }
    layer.weight = Eigen::Map<const Eigen::Matrix<
        double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        w.data(), out_w, in_w);
    layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), out_w);
    model.layers.push_back(std::move(layer));
  }
  if (model.layers.empty()) throw IoError("checkpoint has no layers");

  const std::string head_name = j.at("head").get<std::string>();
  if (head_kind_from_name(head_name) != model.head.kind) {
    throw DimensionError("checkpoint was trained with head '" + head_name +
                         "', artifacts specify '" +
                         head_kind_name(model.head.kind) + "'");
  }
  if (model.layers.back().weight.rows() != model.head.input_width()) {
    throw DimensionError(
        "checkpoint final layer width " +
        std::to_string(model.layers.back().weight.rows()) +
        " does not match head input width " +
        std::to_string(model.head.input_width()));
  }
  return model;
}

void save_train_log_csv(const std::filesystem::path& path,
                        const std::vector<EpochLog>& log,
                        const ConceptSchema& schema) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,loss";
  for (int i = 0; i < schema.concept_count(); ++i) {
    out << ',' << schema.concept_at(i).name;
  }
  out << '\n';
  char buffer[64];
  for (const EpochLog& e : log) {
    out << e.epoch;
    std::snprintf(buffer, sizeof(buffer), "%.10g", e.total);
    out << ',' << buffer;
    for (Eigen::Index i = 0; i < e.per_concept.size(); ++i) {
      std::snprintf(buffer, sizeof(buffer), "%.10g", e.per_concept[i]);
      out << ',' << buffer;
    }
    out << '\n';
  }
}

}  // namespace rulehead
