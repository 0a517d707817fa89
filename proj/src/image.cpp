#include "dfdetect/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "dfdetect/error.hpp"

namespace dfdetect {

namespace {

RawImage from_mat(const cv::Mat& mat, const std::string& what) {
  if (mat.empty()) fail(ErrorKind::data, "image.undecodable", "cannot decode image: " + what);
  if (mat.depth() != CV_8U)
    fail(ErrorKind::data, "image.unsupported", "only 8-bit images are supported: " + what);
  if (mat.channels() != 1 && mat.channels() != 3)
    fail(ErrorKind::data, "image.unsupported",
         "expected 1 or 3 channels, got " + std::to_string(mat.channels()) + ": " + what);

  RawImage raw;
  raw.height = static_cast<std::size_t>(mat.rows);
  raw.width = static_cast<std::size_t>(mat.cols);
  raw.channels = static_cast<std::size_t>(mat.channels());
  raw.pixels.resize(raw.height * raw.width * raw.channels);
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    std::uint8_t* dst = raw.pixels.data() + static_cast<std::size_t>(y) * raw.width * raw.channels;
    if (raw.channels == 1) {
      std::copy(row, row + raw.width, dst);
    } else {
      // OpenCV decodes to BGR.
      for (std::size_t x = 0; x < raw.width; ++x) {
        dst[3 * x + 0] = row[3 * x + 2];
        dst[3 * x + 1] = row[3 * x + 1];
        dst[3 * x + 2] = row[3 * x + 0];
      }
    }
  }
  return raw;
}

}  // namespace

RawImage decode_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    fail(ErrorKind::data, "image.missing_file", "image not found: " + path.string());
  return from_mat(cv::imread(path.string(), cv::IMREAD_UNCHANGED), path.string());
}

RawImage decode_image(std::span<const std::uint8_t> encoded) {
  if (encoded.empty()) fail(ErrorKind::data, "image.undecodable", "cannot decode image: empty buffer");
  const cv::Mat buf(1, static_cast<int>(encoded.size()), CV_8U,
                    const_cast<std::uint8_t*>(encoded.data()));
  return from_mat(cv::imdecode(buf, cv::IMREAD_UNCHANGED), "<memory>");
}

ImageTensor preprocess(const RawImage& raw, TargetShape target, const Normalization& norm) {
  if (raw.height == 0 || raw.width == 0)
    fail(ErrorKind::data, "image.empty", "zero-size image");
  if (raw.channels != 1 && raw.channels != 3)
    fail(ErrorKind::data, "image.unsupported", "expected 1 or 3 channels");
  if (raw.pixels.size() != raw.height * raw.width * raw.channels)
    fail(ErrorKind::data, "image.corrupt", "pixel buffer does not match image dimensions");
  if (target.height == 0 || target.width == 0)
    fail(ErrorKind::usage, "image.bad_target", "target shape must be at least 1x1");
  for (double s : norm.std)
    if (!(s > 0.0) || !std::isfinite(s))
      fail(ErrorKind::usage, "image.bad_normalization", "normalization std must be positive");

  ImageTensor out;
  out.height = target.height;
  out.width = target.width;
  out.data.resize(out.height * out.width * ImageTensor::channels);

  const double scale_y = static_cast<double>(raw.height) / static_cast<double>(target.height);
  const double scale_x = static_cast<double>(raw.width) / static_cast<double>(target.width);
  const auto pixel = [&](std::size_t y, std::size_t x, std::size_t c) -> double {
    const std::size_t src_c = raw.channels == 1 ? 0 : c;
    return raw.pixels[(y * raw.width + x) * raw.channels + src_c];
  };
  const auto source_coord = [](std::size_t dst, double scale, std::size_t extent,
                               std::size_t& lo, std::size_t& hi, double& frac) {
    double src = (static_cast<double>(dst) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(extent - 1));
    lo = static_cast<std::size_t>(std::floor(src));
    hi = std::min(lo + 1, extent - 1);
    frac = src - static_cast<double>(lo);
  };

  for (std::size_t y = 0; y < out.height; ++y) {
    std::size_t y0, y1;
    double fy;
    source_coord(y, scale_y, raw.height, y0, y1, fy);
    for (std::size_t x = 0; x < out.width; ++x) {
      std::size_t x0, x1;
      double fx;
      source_coord(x, scale_x, raw.width, x0, x1, fx);
      for (std::size_t c = 0; c < ImageTensor::channels; ++c) {
        // a + (b - a) * t keeps constant regions exact
        const double top = pixel(y0, x0, c) + (pixel(y0, x1, c) - pixel(y0, x0, c)) * fx;
        const double bottom = pixel(y1, x0, c) + (pixel(y1, x1, c) - pixel(y1, x0, c)) * fx;
        const double v = top + (bottom - top) * fy;
        out.data[(y * out.width + x) * ImageTensor::channels + c] = (v / 255.0 - norm.mean[c]) / norm.std[c];
      }
    }
  }
  return out;
}

}  // namespace dfdetect
