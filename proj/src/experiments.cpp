#include "rulehead/experiments.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "rulehead/compile.hpp"
#include "rulehead/idx.hpp"
#include "rulehead/log.hpp"
#include "rulehead/rng.hpp"

namespace rulehead {

namespace {

int stripe(double v) {
  if (v < 0.25) return 1;
  if (v < 0.75) return 2;
  return 3;
}

// 5x7 glyph patterns for the synthetic digit renderer.
constexpr const char* kGlyphs[10][7] = {
    {"01110", "10001", "10011", "10101", "11001", "10001", "01110"},  // 0
    {"00100", "01100", "00100", "00100", "00100", "00100", "01110"},  // 1
    {"01110", "10001", "00001", "00010", "00100", "01000", "11111"},  // 2
    {"11111", "00010", "00100", "00010", "00001", "10001", "01110"},  // 3
    {"00010", "00110", "01010", "10010", "11111", "00010", "00010"},  // 4
    {"11111", "10000", "11110", "00001", "00001", "10001", "01110"},  // 5
    {"00110", "01000", "10000", "11110", "10001", "10001", "01110"},  // 6
    {"11111", "00001", "00010", "00100", "01000", "01000", "01000"},  // 7
    {"01110", "10001", "10001", "01110", "10001", "10001", "01110"},  // 8
    {"01110", "10001", "10001", "01111", "00001", "00010", "01100"},  // 9
};

}  // namespace

ToyData gen_toy(int n, std::uint64_t seed) {
  if (n < 1) throw DimensionError("gen_toy needs at least one sample");
  ConceptSchema schema({{"y", {"1", "2"}},
                        {"c1", {"1", "2"}},
                        {"c2", {"1", "2", "3"}},
                        {"c3", {"1", "2", "3"}}});
  Dataset data;
  data.features = Eigen::MatrixXd(n, 2);
  data.labels = Eigen::MatrixXi(n, 4);
  Rng rng(seed);
  for (int r = 0; r < n; ++r) {
    const double x1 = rng.uniform();
    const double x2 = rng.uniform();
    data.features(r, 0) = x1;
    data.features(r, 1) = x2;
    const int c1 = x1 > 0.5 ? 2 : 1;
    const int c2 = stripe(x2);
    const int c3 = stripe(std::max(x1, x2));
    const int y = (c1 == 2 && c2 == 2) ? 2 : 1;
    data.labels(r, 0) = y;
    data.labels(r, 1) = c1;
    data.labels(r, 2) = c2;
    data.labels(r, 3) = c3;
  }
  return ToyData{std::move(data), std::move(schema),
                 "IF c1 = 2 AND c2 = 2 THEN y = 2",
                 "y = 2 <-> (c1 = 2 AND c2 = 2)"};
}

void write_synthetic_digit_idx(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path,
                               int count, std::uint64_t seed) {
  if (count < 1) throw DimensionError("glyph count must be positive");
  constexpr int kSide = 28;
  constexpr int kScale = 3;  // 5x7 glyph -> 15x21 pixels
  IdxImages images;
  images.count = count;
  images.rows = kSide;
  images.cols = kSide;
  images.pixels.assign(static_cast<std::size_t>(count) * kSide * kSide, 0);
  std::vector<std::uint8_t> labels(count);

  Rng rng(seed);
  for (int img = 0; img < count; ++img) {
    const int digit = rng.below(10);
    labels[img] = static_cast<std::uint8_t>(digit);
    std::uint8_t* base =
        images.pixels.data() + static_cast<std::size_t>(img) * kSide * kSide;
    const int row0 = 3 + rng.below(5) - 2;  // vertical jitter in [1, 5]
    const int col0 = 6 + rng.below(9) - 4;  // horizontal jitter in [2, 10]
    const double ink = rng.uniform(190.0, 255.0);
    for (int gr = 0; gr < 7; ++gr) {
      for (int gc = 0; gc < 5; ++gc) {
        if (kGlyphs[digit][gr][gc] != '1') continue;
        for (int dr = 0; dr < kScale; ++dr) {
          for (int dc = 0; dc < kScale; ++dc) {
            const int r = row0 + gr * kScale + dr;
            const int c = col0 + gc * kScale + dc;
            base[r * kSide + c] = static_cast<std::uint8_t>(ink);
          }
        }
      }
    }
    for (int p = 0; p < kSide * kSide; ++p) {
      const double noisy = base[p] + 18.0 * rng.normal();
      base[p] = static_cast<std::uint8_t>(std::clamp(noisy, 0.0, 255.0));
    }
  }
  write_idx_images(images_path, images);
  write_idx_labels(labels_path, labels);
}

DigitsData gen_colored_digits(const std::filesystem::path& idx_images,
                              const std::filesystem::path& idx_labels, int n,
                              std::uint64_t seed) {
  const IdxImages images = read_idx_images(idx_images);
  const std::vector<std::uint8_t> digit_labels = read_idx_labels(idx_labels);
  if (static_cast<int>(digit_labels.size()) != images.count) {
    throw IoError("IDX image and label counts differ");
  }
  if (images.count < n) {
    throw IoError("IDX file holds " + std::to_string(images.count) +
                  " images, need " + std::to_string(n));
  }

  ConceptSchema schema(
      {{"y", {"1", "2"}},
       {"digit", {"1", "2", "3", "4", "5", "6", "7", "8", "9", "0"}},
       {"color", {"white", "blue"}}});

  const int pixels = images.rows * images.cols;
  Dataset data;
  data.features = Eigen::MatrixXd::Zero(n, 2 * pixels);
  data.labels = Eigen::MatrixXi(n, 3);

  Rng rng(seed);
  std::vector<int> pool(images.count);
  for (int i = 0; i < images.count; ++i) pool[i] = i;
  rng.shuffle(pool);

  for (int r = 0; r < n; ++r) {
    const int src = pool[r];
    const int digit = digit_labels[src];
    if (digit > 9) throw IoError("IDX label out of range 0..9");
    const int digit_outcome = digit == 0 ? 10 : digit;
    const int color = rng.chance(0.5) ? 2 : 1;  // 1 white, 2 blue
    const bool odd = digit % 2 == 1;
    const int y = ((odd && color == 2) || (!odd && color == 1)) ? 1 : 2;

    const std::uint8_t* px =
        images.pixels.data() + static_cast<std::size_t>(src) * pixels;
    for (int p = 0; p < pixels; ++p) {
      const double g = px[p] / 255.0;
      if (color == 1) data.features(r, p) = g;  // white: both channels
      data.features(r, pixels + p) = g;         // blue: second channel only
    }
    data.labels(r, 0) = y;
    data.labels(r, 1) = digit_outcome;
    data.labels(r, 2) = color;
  }

  return DigitsData{
      std::move(data), std::move(schema),
      "y = 1 <-> ((digit IN {1, 3, 5, 7, 9} AND color = blue) OR "
      "(digit IN {0, 2, 4, 6, 8} AND color = white))"};
}

Dataset mask_labels(const Dataset& data, const std::vector<double>& fractions,
                    std::uint64_t seed) {
  if (static_cast<int>(fractions.size()) != data.concept_count()) {
    throw DimensionError("need one labeled fraction per concept");
  }
  for (double f : fractions) {
    if (f < 0.0 || f > 1.0) {
      throw DimensionError("labeled fraction must be in [0, 1]");
    }
  }
  Dataset out = data;
  const int n = data.sample_count();
  Rng rng(seed);
  std::vector<int> rows(n);
  for (int i = 0; i < data.concept_count(); ++i) {
    const int keep = static_cast<int>(std::ceil(fractions[i] * n));
    if (keep >= n) continue;
    for (int r = 0; r < n; ++r) rows[r] = r;
    rng.shuffle(rows);
    for (int r = keep; r < n; ++r) out.labels(rows[r], i) = -1;
  }
  return out;
}

Dataset mask_labels(const Dataset& data, double fraction, std::uint64_t seed) {
  return mask_labels(
      data, std::vector<double>(data.concept_count(), fraction), seed);
}

Split split_dataset(const Dataset& data, double test_fraction,
                    std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw DimensionError("test fraction must be in [0, 1)");
  }
  // Strata: one per concept-0 label value (unlabeled rows form their own).
  std::vector<std::vector<int>> strata;
  std::vector<int> stratum_of_label;
  const auto stratum_for = [&](int label) -> std::vector<int>& {
    for (size_t s = 0; s < stratum_of_label.size(); ++s) {
      if (stratum_of_label[s] == label) return strata[s];
    }
    stratum_of_label.push_back(label);
    strata.emplace_back();
    return strata.back();
  };
  for (int r = 0; r < data.sample_count(); ++r) {
    stratum_for(data.labels(r, 0)).push_back(r);
  }

  Split split;
  Rng rng(seed);
  for (std::vector<int>& rows : strata) {
    rng.shuffle(rows);
    const int test_count =
        static_cast<int>(std::ceil(test_fraction * rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      (static_cast<int>(i) < test_count ? split.test_rows : split.train_rows)
          .push_back(rows[i]);
    }
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  return split;
}

Dataset take_rows(const Dataset& data, const std::vector<int>& rows) {
  Dataset out;
  out.features = Eigen::MatrixXd(rows.size(), data.feature_count());
  out.labels = Eigen::MatrixXi(rows.size(), data.concept_count());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    out.labels.row(static_cast<Eigen::Index>(i)) = data.labels.row(rows[i]);
  }
  return out;
}

namespace {

struct SweepRun {
  std::string head;
  double fraction;
  std::uint64_t seed;
};

}  // namespace

std::vector<SweepRow> run_sweep(const Dataset& data,
                                const ConceptSchema& schema,
                                const std::string& rule_text,
                                const SweepOptions& options) {
  if (options.fractions.empty() || options.seeds.empty()) {
    throw DimensionError("sweep needs at least one fraction and one seed");
  }

  const auto compiled_rule =
      std::make_shared<const CompiledRules>(compile_rule_text(schema, rule_text));
  const auto compiled_free =
      std::make_shared<const CompiledRules>(compile_rule_text(schema, "TRUE"));
  const auto shared_schema = std::make_shared<const ConceptSchema>(schema);

  std::vector<SweepRun> runs;
  for (const char* head : {"as", "joint", "independent"}) {
    for (double fraction : options.fractions) {
      for (std::uint64_t seed : options.seeds) {
        runs.push_back({head, fraction, seed});
      }
    }
  }

  std::vector<std::vector<SweepRow>> results(runs.size());
  std::atomic<size_t> cursor{0};

  const auto worker = [&]() {
    for (;;) {
      const size_t job = cursor.fetch_add(1);
      if (job >= runs.size()) return;
      const SweepRun& run = runs[job];
      log::info("sweep: head=%s fraction=%g seed=%llu", run.head.c_str(),
                run.fraction, static_cast<unsigned long long>(run.seed));

      const Split split =
          split_dataset(data, options.test_fraction, run.seed);
      const Dataset train_set =
          mask_labels(take_rows(data, split.train_rows), run.fraction,
                      run.seed);
      const Dataset test_set = take_rows(data, split.test_rows);

      HeadSpec head = run.head == "as"
                          ? make_head(HeadKind::AdmissibleState, compiled_rule)
                      : run.head == "joint"
                          ? make_head(HeadKind::AdmissibleState, compiled_free)
                          : make_independent_head(shared_schema);

      TrainConfig config = options.config;
      config.seed = run.seed;
      config.head = head.kind;

      const TrainResult trained = train(config, train_set, std::move(head));
      const std::vector<ConceptMetrics> metrics =
          evaluate_metrics(trained.model, test_set, schema);
      // One row per run; the reported score is the target concept's.
      const ConceptMetrics& target = metrics.front();
      results[job].push_back({run.head, run.fraction, run.seed,
                              target.concept_name, target.macro_f1,
                              target.accuracy});
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<SweepRow> rows;
  for (const std::vector<SweepRow>& part : results) {
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

void save_sweep_csv(const std::filesystem::path& path,
                    const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "head,fraction,seed,concept,f1,accuracy\n";
  char buffer[64];
  for (const SweepRow& r : rows) {
    out << r.head << ',';
    std::snprintf(buffer, sizeof(buffer), "%g", r.fraction);
    out << buffer << ',' << r.seed << ',' << r.concept_name << ',';
    std::snprintf(buffer, sizeof(buffer), "%.6f", r.f1);
    out << buffer << ',';
    std::snprintf(buffer, sizeof(buffer), "%.6f", r.accuracy);
    out << buffer << '\n';
  }
}

std::vector<SweepRow> load_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "head,fraction,seed,concept,f1,accuracy") {
    throw IoError("unexpected sweep CSV header in " + path.string());
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    SweepRow row;
    std::getline(ss, row.head, ',');
    std::getline(ss, cell, ',');
    row.fraction = std::stod(cell);
    std::getline(ss, cell, ',');
    row.seed = std::stoull(cell);
    std::getline(ss, row.concept_name, ',');
    std::getline(ss, cell, ',');
    row.f1 = std::stod(cell);
    std::getline(ss, cell, ',');
    row.accuracy = std::stod(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rulehead
