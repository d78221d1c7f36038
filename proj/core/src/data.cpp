#include "qkan/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace qkan {

namespace {

using Kind = DataError::Kind;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in, const std::string& name) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw DataError(Kind::Io, "zlib init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  int rc = Z_OK;
  do {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw DataError(Kind::Truncated, name + ": corrupt or truncated gzip stream");
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
  } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw DataError(Kind::Truncated, name + ": truncated gzip stream");
  return out;
}

double to_unit(std::uint8_t byte) { return static_cast<double>(byte) / 255.0; }

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(Kind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path.string());
  return bytes;
}

Dataset parse_mnist_idx(std::span<const std::uint8_t> images,
                        std::span<const std::uint8_t> labels) {
  if (images.size() < 16) throw DataError(Kind::Truncated, "IDX image header truncated");
  if (labels.size() < 8) throw DataError(Kind::Truncated, "IDX label header truncated");
  if (read_be32(images, 0) != kIdxImageMagic) {
    throw DataError(Kind::BadMagic, "IDX image magic is not 2051");
  }
  if (read_be32(labels, 0) != kIdxLabelMagic) {
    throw DataError(Kind::BadMagic, "IDX label magic is not 2049");
  }
  const std::size_t count = read_be32(images, 4);
  const std::size_t rows = read_be32(images, 8);
  const std::size_t cols = read_be32(images, 12);
  const std::size_t label_count = read_be32(labels, 4);
  if (count != label_count) {
    throw DataError(Kind::CountMismatch, "IDX image count " + std::to_string(count) +
                                             " != label count " + std::to_string(label_count));
  }
  if (rows == 0 || cols == 0) throw DataError(Kind::BadDimensions, "IDX image has a zero dimension");
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels) throw DataError(Kind::Truncated, "IDX image data truncated");
  if (labels.size() < 8 + count) throw DataError(Kind::Truncated, "IDX label data truncated");

  Dataset ds;
  ds.width = cols;
  ds.height = rows;
  ds.images.reserve(count);
  ds.labels.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const auto src = images.subspan(16 + n * pixels, pixels);
    std::vector<double> img(pixels);
    std::transform(src.begin(), src.end(), img.begin(), to_unit);
    ds.images.push_back(std::move(img));
    ds.labels.push_back(labels[8 + n]);
  }
  return ds;
}

Dataset load_mnist_idx(const std::filesystem::path& image_path,
                       const std::filesystem::path& label_path) {
  const auto images = read_file_bytes(image_path);
  const auto labels = read_file_bytes(label_path);
  return parse_mnist_idx(images, labels);
}

std::vector<std::uint8_t> encode_idx_images(const Dataset& ds) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + ds.size() * ds.pixels());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(ds.size()));
  write_be32(out, static_cast<std::uint32_t>(ds.height));
  write_be32(out, static_cast<std::uint32_t>(ds.width));
  for (const auto& img : ds.images) {
    for (double v : img) out.push_back(to_byte(v));
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const Dataset& ds) {
  std::vector<std::uint8_t> out;
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(ds.size()));
  for (int label : ds.labels) out.push_back(static_cast<std::uint8_t>(label));
  return out;
}

Dataset parse_cifar10_gray(std::span<const std::uint8_t> batch) {
  if (batch.empty() || batch.size() % kCifarRecordBytes != 0) {
    throw DataError(Kind::BadLength, "CIFAR-10 batch length " + std::to_string(batch.size()) +
                                         " is not a positive multiple of 3073");
  }
  constexpr std::size_t plane = 32 * 32;
  Dataset ds;
  ds.width = 32;
  ds.height = 32;
  const std::size_t count = batch.size() / kCifarRecordBytes;
  for (std::size_t n = 0; n < count; ++n) {
    const auto rec = batch.subspan(n * kCifarRecordBytes, kCifarRecordBytes);
    ds.labels.push_back(rec[0]);
    std::vector<double> img(plane);
    for (std::size_t k = 0; k < plane; ++k) {
      const double gray = 0.299 * rec[1 + k] + 0.587 * rec[1 + plane + k] +
                          0.114 * rec[1 + 2 * plane + k];
      img[k] = std::clamp(gray / 255.0, 0.0, 1.0);
    }
    ds.images.push_back(std::move(img));
  }
  return ds;
}

Dataset load_cifar10_gray(const std::filesystem::path& batch_path) {
  return parse_cifar10_gray(read_file_bytes(batch_path));
}

std::vector<double> resize_bilinear(std::span<const double> image, std::size_t src_w,
                                    std::size_t src_h, std::size_t dst_w, std::size_t dst_h) {
  if (src_w == 0 || src_h == 0 || dst_w == 0 || dst_h == 0) {
    throw DataError(Kind::BadDimensions, "resize dimensions must be positive");
  }
  if (image.size() != src_w * src_h) throw DataError(Kind::BadDimensions, "image size mismatch");

  auto source_coord = [](std::size_t i, std::size_t src, std::size_t dst) {
    if (dst == 1) return 0.5 * static_cast<double>(src - 1);
    return static_cast<double>(i) * static_cast<double>(src - 1) / static_cast<double>(dst - 1);
  };

  std::vector<double> out(dst_w * dst_h);
  for (std::size_t y = 0; y < dst_h; ++y) {
    const double sy = source_coord(y, src_h, dst_h);
    const auto y0 = std::min(static_cast<std::size_t>(sy), src_h - 1);
    const std::size_t y1 = std::min(y0 + 1, src_h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < dst_w; ++x) {
      const double sx = source_coord(x, src_w, dst_w);
      const auto x0 = std::min(static_cast<std::size_t>(sx), src_w - 1);
      const std::size_t x1 = std::min(x0 + 1, src_w - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = (1.0 - fx) * image[y0 * src_w + x0] + fx * image[y0 * src_w + x1];
      const double bottom = (1.0 - fx) * image[y1 * src_w + x0] + fx * image[y1 * src_w + x1];
      out[y * dst_w + x] = std::clamp((1.0 - fy) * top + fy * bottom, 0.0, 1.0);
    }
  }
  return out;
}

Dataset resize_dataset(const Dataset& ds, std::size_t width, std::size_t height) {
  if (ds.width == width && ds.height == height) return ds;
  Dataset out;
  out.width = width;
  out.height = height;
  out.labels = ds.labels;
  out.images.reserve(ds.size());
  for (const auto& img : ds.images) {
    out.images.push_back(resize_bilinear(img, ds.width, ds.height, width, height));
  }
  return out;
}

Dataset take_prefix(const Dataset& ds, std::size_t n, std::optional<int> label) {
  if (n < 1) throw DataError(Kind::NotEnoughItems, "prefix length must be >= 1");
  Dataset out;
  out.width = ds.width;
  out.height = ds.height;
  for (std::size_t i = 0; i < ds.size() && out.size() < n; ++i) {
    if (label && ds.labels[i] != *label) continue;
    out.images.push_back(ds.images[i]);
    out.labels.push_back(ds.labels[i]);
  }
  if (out.size() < n) {
    throw DataError(Kind::NotEnoughItems, "requested " + std::to_string(n) + " items, only " +
                                              std::to_string(out.size()) + " available");
  }
  return out;
}

std::string encode_pgm(std::span<const double> pixels, std::size_t width, std::size_t height) {
  if (pixels.size() != width * height) throw DataError(Kind::BadDimensions, "PGM size mismatch");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (double v : pixels) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

std::string encode_pgm_strip(const std::vector<std::vector<double>>& images, std::size_t width,
                             std::size_t height) {
  if (images.empty()) throw DataError(Kind::BadDimensions, "no images to tile");
  const std::size_t strip_w = width * images.size();
  std::vector<double> strip(strip_w * height);
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (images[n].size() != width * height) {
      throw DataError(Kind::BadDimensions, "PGM tile size mismatch");
    }
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        strip[y * strip_w + n * width + x] = images[n][y * width + x];
      }
    }
  }
  return encode_pgm(strip, strip_w, height);
}

}  // namespace qkan
