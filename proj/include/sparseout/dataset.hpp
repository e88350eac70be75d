#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sparseout/tensor.hpp"

namespace sparseout {

enum class DataSource { mnist_idx, synthetic };

struct Dataset {
  Tensor images;  // n x d, every value in [0, 1]
  DataSource source = DataSource::synthetic;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> labels;  // empty unless a label file was read

  std::size_t size() const { return images.rows(); }
  std::size_t dim() const { return images.cols(); }
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Parses an IDX3 unsigned-byte image file (big-endian header: magic, count,
// rows, cols) and, optionally, the matching IDX1 label file. Pixels are
// divided by 255 and each image is flattened row-major. Throws FormatError
// naming the offending byte offset, IoError if a file cannot be opened.
Dataset load_mnist_idx(const std::filesystem::path& images,
                       const std::optional<std::filesystem::path>& labels = std::nullopt);

// Same, from in-memory bytes.
Dataset parse_mnist_idx(const std::vector<std::uint8_t>& image_bytes,
                        const std::vector<std::uint8_t>* label_bytes = nullptr);

// Deterministic stand-in for MNIST: n samples drawn from 10 sparse random
// prototypes plus Gaussian noise, clipped to [0, 1].
Dataset synthesize_dataset(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace sparseout
