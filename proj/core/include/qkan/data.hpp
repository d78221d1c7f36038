#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkan {

class DataError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, Truncated, CountMismatch, BadLength, NotEnoughItems, BadDimensions };

  DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Grayscale images as row-major pixel vectors in [0, 1], with parallel labels.
struct Dataset {
  std::vector<std::vector<double>> images;
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t size() const { return images.size(); }
  std::size_t pixels() const { return width * height; }
};

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * 32 * 32;

/// Whole file; gzip-compressed files (1f 8b) are inflated transparently.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Parses big-endian IDX images (magic 2051) and labels (magic 2049); pixels / 255.
Dataset parse_mnist_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);
Dataset load_mnist_idx(const std::filesystem::path& image_path,
                       const std::filesystem::path& label_path);

/// Uncompressed IDX encodings of a dataset (pixels rounded to bytes).
std::vector<std::uint8_t> encode_idx_images(const Dataset& ds);
std::vector<std::uint8_t> encode_idx_labels(const Dataset& ds);

/// CIFAR-10 binary batch: 3073-byte records, luminance 0.299 R + 0.587 G + 0.114 B.
Dataset parse_cifar10_gray(std::span<const std::uint8_t> batch);
Dataset load_cifar10_gray(const std::filesystem::path& batch_path);

/// Corner-aligned bilinear resampling; a 1-pixel axis samples the source centre.
std::vector<double> resize_bilinear(std::span<const double> image, std::size_t src_w,
                                    std::size_t src_h, std::size_t dst_w, std::size_t dst_h);

Dataset resize_dataset(const Dataset& ds, std::size_t width, std::size_t height);

/// First n items in index order, optionally keeping only one label.
Dataset take_prefix(const Dataset& ds, std::size_t n, std::optional<int> label = std::nullopt);

/// Binary PGM (P5, maxval 255), pixel byte = round(255 * clamp(v, 0, 1)).
std::string encode_pgm(std::span<const double> pixels, std::size_t width, std::size_t height);

/// Tiles equally sized images left to right into one PGM strip.
std::string encode_pgm_strip(const std::vector<std::vector<double>>& images, std::size_t width,
                             std::size_t height);

}  // namespace qkan
