#include "mapvio/image.hpp"

#include <algorithm>
#include <cmath>

#include "mapvio/error.hpp"

namespace mapvio {

ImagePlane::ImagePlane(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidArgument("negative image size");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImagePlane::ImagePlane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0 || data_.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidArgument("image data length does not match width * height");
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("image intensity outside [0, 1]");
  }
}

namespace {

// Overlap weights of source cells [i, i+1) with target cell [k*s, (k+1)*s).
struct Span1D {
  int first = 0;
  std::vector<double> weights;
};

std::vector<Span1D> overlap_table(int src, int dst) {
  std::vector<Span1D> table(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int k = 0; k < dst; ++k) {
    const double lo = k * scale;
    const double hi = (k + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
    table[k].first = first;
    for (int i = first; i <= last; ++i) {
      const double w = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
      table[k].weights.push_back(std::max(0.0, w) / scale);
    }
  }
  return table;
}

}  // namespace

ImagePlane area_resample(const ImagePlane& src, int target_width, int target_height) {
  if (src.empty()) throw InvalidArgument("cannot resample an empty image");
  if (target_width <= 0 || target_height <= 0) throw InvalidArgument("target size must be positive");
  if (target_width == src.width() && target_height == src.height()) return src;

  const auto xs = overlap_table(src.width(), target_width);
  const auto ys = overlap_table(src.height(), target_height);
  ImagePlane out(target_width, target_height);
  for (int ty = 0; ty < target_height; ++ty) {
    for (int tx = 0; tx < target_width; ++tx) {
      double acc = 0.0;
      for (std::size_t j = 0; j < ys[ty].weights.size(); ++j) {
        const int y = ys[ty].first + static_cast<int>(j);
        for (std::size_t i = 0; i < xs[tx].weights.size(); ++i) {
          acc += ys[ty].weights[j] * xs[tx].weights[i] * src(xs[tx].first + static_cast<int>(i), y);
        }
      }
      out(tx, ty) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

ImagePlane preprocess(const RgbImage& raw, int target_width, int target_height) {
  if (raw.width <= 0 || raw.height <= 0) throw InvalidArgument("zero-dimension image");
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  if (raw.rgb.size() != 3 * n) throw InvalidArgument("RGB buffer length does not match image size");
  std::vector<double> gray(n);
  for (std::size_t i = 0; i < n; ++i) {
    // integer weights keep pure white at exactly 1.0
    const long v = 299L * raw.rgb[3 * i] + 587L * raw.rgb[3 * i + 1] + 114L * raw.rgb[3 * i + 2];
    gray[i] = std::clamp(static_cast<double>(v) / 255000.0, 0.0, 1.0);
  }
  return area_resample(ImagePlane(raw.width, raw.height, std::move(gray)), target_width, target_height);
}

ImagePlane preprocess(const ImagePlane& gray, int target_width, int target_height) {
  if (gray.width() <= 0 || gray.height() <= 0) throw InvalidArgument("zero-dimension image");
  return area_resample(gray, target_width, target_height);
}

}  // namespace mapvio
