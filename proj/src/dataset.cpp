#include "sparseout/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include "sparseout/errors.hpp"
#include "sparseout/rng.hpp"

namespace sparseout {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const char* field) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(std::string("IDX: truncated header, missing ") + field, bytes.size());
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Dataset parse_mnist_idx(const std::vector<std::uint8_t>& image_bytes,
                        const std::vector<std::uint8_t>* label_bytes) {
  const std::uint32_t magic = read_be32(image_bytes, 0, "magic number");
  if (magic != kIdxImageMagic) {
    throw FormatError("IDX: image magic " + hex32(magic) + " is not " + hex32(kIdxImageMagic),
                      0);
  }
  const std::size_t count = read_be32(image_bytes, 4, "image count");
  const std::size_t rows = read_be32(image_bytes, 8, "row count");
  const std::size_t cols = read_be32(image_bytes, 12, "column count");
  if (count == 0) throw FormatError("IDX: file holds no images", 4);
  const std::size_t dim = rows * cols;
  if (dim == 0) throw FormatError("IDX: zero-sized images", 8);
  const std::size_t header = 16;
  const std::size_t needed = header + count * dim;
  if (image_bytes.size() < needed) {
    throw FormatError("IDX: truncated pixel data, expected " + std::to_string(needed) +
                          " bytes but file has " + std::to_string(image_bytes.size()),
                      image_bytes.size());
  }

  Dataset ds;
  ds.source = DataSource::mnist_idx;
  ds.images = Tensor(count, dim);
  auto dst = ds.images.values();
  for (std::size_t i = 0; i < count * dim; ++i) {
    dst[i] = static_cast<double>(image_bytes[header + i]) / 255.0;
  }

  if (label_bytes != nullptr) {
    const std::uint32_t lmagic = read_be32(*label_bytes, 0, "label magic number");
    if (lmagic != kIdxLabelMagic) {
      throw FormatError("IDX: label magic " + hex32(lmagic) + " is not " +
                            hex32(kIdxLabelMagic),
                        0);
    }
    const std::size_t lcount = read_be32(*label_bytes, 4, "label count");
    if (lcount != count) {
      throw FormatError("IDX: " + std::to_string(lcount) + " labels for " +
                            std::to_string(count) + " images",
                        4);
    }
    if (label_bytes->size() < 8 + lcount) {
      throw FormatError("IDX: truncated label data", label_bytes->size());
    }
    ds.labels.assign(label_bytes->begin() + 8, label_bytes->begin() + 8 + lcount);
  }
  return ds;
}

Dataset load_mnist_idx(const std::filesystem::path& images,
                       const std::optional<std::filesystem::path>& labels) {
  const auto image_bytes = read_file(images);
  if (labels) {
    const auto label_bytes = read_file(*labels);
    return parse_mnist_idx(image_bytes, &label_bytes);
  }
  return parse_mnist_idx(image_bytes, nullptr);
}

Dataset synthesize_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidInputError("synthesize_dataset: n and d must be positive");
  constexpr std::size_t kPrototypes = 10;
  constexpr double kActiveFraction = 0.3;
  constexpr double kNoise = 0.1;

  Rng rng(seed);
  Tensor prototypes(kPrototypes, d);
  for (auto& v : prototypes.values()) {
    v = rng.bernoulli(kActiveFraction) ? rng.uniform(0.5, 1.0) : 0.0;
  }

  Dataset ds;
  ds.source = DataSource::synthetic;
  ds.seed = seed;
  ds.images = Tensor(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto proto = prototypes.row(rng.below(kPrototypes));
    auto dst = ds.images.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      dst[j] = std::clamp(proto[j] + kNoise * rng.normal(), 0.0, 1.0);
    }
  }
  return ds;
}

}  // namespace sparseout
