#pragma once

#include <vector>

#include "mapvio/image.hpp"

namespace mapvio {

struct SsimOptions {
  int grid_cols = 8;
  int grid_rows = 8;
  double threshold = 0.8;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
  int window = 11;
  double window_sigma = 1.5;
};

struct CellRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0, x1) x [y0, y1)
  bool contains(double u, double v) const { return u >= x0 - 0.5 && u < x1 - 0.5 && v >= y0 - 0.5 && v < y1 - 0.5; }
};

/// Cell c (row-major, c = row * grid_cols + col) of a width x height image.
CellRect grid_cell(int width, int height, int grid_cols, int grid_rows, int c);
/// Index of the cell containing pixel (u, v), or -1 outside the image.
int grid_cell_of(int width, int height, int grid_cols, int grid_rows, double u, double v);

struct SsimGrid {
  std::vector<double> score;  // mean SSIM per cell
  std::vector<bool> accepted;
  int grid_cols = 0;
  int grid_rows = 0;
};

/// Mean SSIM of each cell. The Gaussian window is clipped to the cell and
/// renormalised, so a cell only depends on its own pixels. Throws
/// InvalidArgument when the image sizes differ or a cell is empty.
SsimGrid ssim_grid(const ImagePlane& a, const ImagePlane& b, const SsimOptions& opt = {});
/// Cells with SSIM >= threshold.
std::vector<bool> ssim_grid_filter(const ImagePlane& rendered, const ImagePlane& captured, const SsimOptions& opt = {});

}  // namespace mapvio
