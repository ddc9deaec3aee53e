#ifndef RULEHEAD_EXPERIMENTS_HPP
#define RULEHEAD_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "rulehead/metrics.hpp"
#include "rulehead/nn.hpp"

namespace rulehead {

// --- Toy 2D dataset ----------------------------------------------------------

// Inputs uniform in [0,1]^2. c1 = 2 right of the vertical midline; c2 by
// horizontal stripes of heights 0.25 / 0.5 / 0.25; c3 applies the same
// stripe thresholds to max(x1, x2) (the L-shape); y = 2 iff c1 = c2 = 2.
// Stripe intervals are half-open [lo, hi).
struct ToyData {
  Dataset data;
  ConceptSchema schema;
  std::string implication_rule;  // (c1 = 2 and c2 = 2) implies y = 2
  std::string iff_rule;          // y = 2 iff (c1 = 2 and c2 = 2)
};

ToyData gen_toy(int n, std::uint64_t seed);

// --- Colored digits ----------------------------------------------------------

// Digits from IDX files, randomly colored white or blue; the color occupies
// a second channel (features are [channel0 | channel1], each rows*cols,
// scaled to [0,1]; white renders in both channels, blue only in the
// second). y = 1 iff the digit is odd and blue, or even and white. Digit 0
// maps to outcome 10 so outcomes stay 1-based.
struct DigitsData {
  Dataset data;
  ConceptSchema schema;
  std::string rule;
};

DigitsData gen_colored_digits(const std::filesystem::path& idx_images,
                              const std::filesystem::path& idx_labels, int n,
                              std::uint64_t seed);

// Renders simple digit glyphs with jitter and noise into MNIST-format IDX
// files; a stand-in source when the real dataset is not on disk.
void write_synthetic_digit_idx(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path,
                               int count, std::uint64_t seed);

// --- Label masking and the sweep ----------------------------------------------

// Keeps ceil(fraction * n) labels per concept (independently, seeded) and
// sets the rest to -1.
Dataset mask_labels(const Dataset& data, const std::vector<double>& fractions,
                    std::uint64_t seed);
Dataset mask_labels(const Dataset& data, double fraction, std::uint64_t seed);

// Seeded train/test split; stratified by concept 0 when it has labels.
struct Split {
  std::vector<int> train_rows;
  std::vector<int> test_rows;
};
Split split_dataset(const Dataset& data, double test_fraction,
                    std::uint64_t seed);
Dataset take_rows(const Dataset& data, const std::vector<int>& rows);

// One sweep result row per (head, fraction, seed); scores are the target
// concept's macro-F1 and accuracy on the held-out split.
struct SweepRow {
  std::string head;  // "as" | "joint" | "independent"
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string concept_name;
  double f1 = 0.0;
  double accuracy = 0.0;
};

struct SweepOptions {
  std::vector<double> fractions;
  std::vector<std::uint64_t> seeds;
  TrainConfig config;          // head field is ignored; the sweep sets it
  double test_fraction = 0.2;
  int jobs = 1;
};

// Compares the AS head, the joint head without rules (all-ones mask) and
// independent per-concept heads across labeled fractions. Test labels stay
// intact; only training labels are masked.
std::vector<SweepRow> run_sweep(const Dataset& data,
                                const ConceptSchema& schema,
                                const std::string& rule_text,
                                const SweepOptions& options);

// Header: head,fraction,seed,concept,f1,accuracy
void save_sweep_csv(const std::filesystem::path& path,
                    const std::vector<SweepRow>& rows);
std::vector<SweepRow> load_sweep_csv(const std::filesystem::path& path);

}  // namespace rulehead

#endif  // RULEHEAD_EXPERIMENTS_HPP
