#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dfdetect {

/// Decoded 8-bit image, interleaved RGB or grayscale, row-major.
struct RawImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;  // 1 or 3
  std::vector<std::uint8_t> pixels;
};

struct Normalization {
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Model input layout, height x width x channels, interleaved.
struct InputShape {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;

  std::size_t size() const { return height * width * channels; }
  friend bool operator==(const InputShape&, const InputShape&) = default;
};

struct TargetShape {
  std::size_t height = 224;
  std::size_t width = 224;
};

/// Normalized H x W x 3 tensor, interleaved channels.
struct ImageTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  static constexpr std::size_t channels = 3;
  std::vector<double> data;

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data[(y * width + x) * channels + c];
  }
};

RawImage decode_image(const std::filesystem::path& path);
RawImage decode_image(std::span<const std::uint8_t> encoded);

/// Bilinear resize (half-pixel centers, edge clamp) to `target`, grayscale
/// replicated to three channels, values scaled to [0,1] and standardized
/// per channel as (v/255 - mean[c]) / std[c].
ImageTensor preprocess(const RawImage& raw, TargetShape target = {},
                       const Normalization& norm = {});

}  // namespace dfdetect
