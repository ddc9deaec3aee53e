#ifndef RULEHEAD_IDX_HPP
#define RULEHEAD_IDX_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rulehead {

// IDX image/label files (big-endian magic 0x00000803 / 0x00000801),
// optionally gzip-compressed; compression is detected transparently.
struct IdxImages {
  int count = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

void write_idx_images(const std::filesystem::path& path,
                      const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& labels);

}  // namespace rulehead

#endif  // RULEHEAD_IDX_HPP
