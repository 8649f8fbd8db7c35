#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mapvio {

/// Row-major grayscale image with intensities in [0, 1].
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(int width, int height, double fill = 0.0);
  /// Throws InvalidArgument on a size mismatch or values outside [0, 1].
  ImagePlane(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool operator==(const ImagePlane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Interleaved 8-bit RGB image, the raw input to preprocess().
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // size 3 * width * height
};

/// Rec. 601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// Grayscale conversion, normalisation to [0, 1] and area-averaged resampling
/// to target_width x target_height. Throws InvalidArgument on empty input.
ImagePlane preprocess(const RgbImage& raw, int target_width, int target_height);
/// Same as above for an image that is already grayscale.
ImagePlane preprocess(const ImagePlane& gray, int target_width, int target_height);

/// Area-averaged resampling with fractional pixel overlap.
ImagePlane area_resample(const ImagePlane& src, int target_width, int target_height);

}  // namespace mapvio
