#include "rulehead/idx.hpp"

#include <fstream>

#include <zlib.h>

#include "rulehead/errors.hpp"

namespace rulehead {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

// gzread handles both gzip-compressed and plain files.
class GzReader {
 public:
  explicit GzReader(const std::filesystem::path& path)
      : file_(gzopen(path.string().c_str(), "rb")), path_(path.string()) {
    if (file_ == nullptr) throw IoError("cannot open " + path_);
  }

  ~GzReader() {
    if (file_ != nullptr) gzclose(file_);
  }

  GzReader(const GzReader&) = delete;
  GzReader& operator=(const GzReader&) = delete;

  void read(void* buffer, std::size_t size) {
    const int got = gzread(file_, buffer, static_cast<unsigned>(size));
    if (got < 0 || static_cast<std::size_t>(got) != size) {
      throw IoError("truncated IDX file " + path_);
    }
  }

  std::uint32_t read_u32_be() {
    std::uint8_t raw[4];
    read(raw, 4);
    return (static_cast<std::uint32_t>(raw[0]) << 24) |
           (static_cast<std::uint32_t>(raw[1]) << 16) |
           (static_cast<std::uint32_t>(raw[2]) << 8) |
           static_cast<std::uint32_t>(raw[3]);
  }

 private:
  gzFile file_;
  std::string path_;
};

void write_u32_be(std::ofstream& out, std::uint32_t value) {
  const char raw[4] = {static_cast<char>((value >> 24) & 0xff),
                       static_cast<char>((value >> 16) & 0xff),
                       static_cast<char>((value >> 8) & 0xff),
                       static_cast<char>(value & 0xff)};
  out.write(raw, 4);
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  GzReader in(path);
  const std::uint32_t magic = in.read_u32_be();
  if (magic != kImagesMagic) {
    throw IoError("bad IDX image magic in " + path.string());
  }
  IdxImages images;
  images.count = static_cast<int>(in.read_u32_be());
  images.rows = static_cast<int>(in.read_u32_be());
  images.cols = static_cast<int>(in.read_u32_be());
  if (images.count <= 0 || images.rows <= 0 || images.cols <= 0 ||
      images.rows > 1024 || images.cols > 1024) {
    throw IoError("implausible IDX image shape in " + path.string());
  }
  images.pixels.resize(static_cast<std::size_t>(images.count) * images.rows *
                       images.cols);
  in.read(images.pixels.data(), images.pixels.size());
  return images;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  GzReader in(path);
  const std::uint32_t magic = in.read_u32_be();
  if (magic != kLabelsMagic) {
    throw IoError("bad IDX label magic in " + path.string());
  }
  const auto count = static_cast<int>(in.read_u32_be());
  if (count <= 0) throw IoError("empty IDX label file " + path.string());
  std::vector<std::uint8_t> labels(count);
  in.read(labels.data(), labels.size());
  return labels;
}

void write_idx_images(const std::filesystem::path& path,
                      const IdxImages& images) {
  if (images.pixels.size() != static_cast<std::size_t>(images.count) *
                                  images.rows * images.cols) {
    throw DimensionError("IDX pixel buffer does not match its shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_u32_be(out, kImagesMagic);
  write_u32_be(out, static_cast<std::uint32_t>(images.count));
  write_u32_be(out, static_cast<std::uint32_t>(images.rows));
  write_u32_be(out, static_cast<std::uint32_t>(images.cols));
  out.write(reinterpret_cast<const char*>(images.pixels.data()),
            static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_u32_be(out, kLabelsMagic);
  write_u32_be(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

}  // namespace rulehead
