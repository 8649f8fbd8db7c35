#include "mapvio/ssim.hpp"

#include <cmath>

#include "mapvio/error.hpp"

namespace mapvio {

CellRect grid_cell(int width, int height, int grid_cols, int grid_rows, int c) {
  const int col = c % grid_cols;
  const int row = c / grid_cols;
  CellRect r;
  r.x0 = col * width / grid_cols;
  r.x1 = (col + 1) * width / grid_cols;
  r.y0 = row * height / grid_rows;
  r.y1 = (row + 1) * height / grid_rows;
  return r;
}

int grid_cell_of(int width, int height, int grid_cols, int grid_rows, double u, double v) {
  const int x = static_cast<int>(std::lround(u));
  const int y = static_cast<int>(std::lround(v));
  if (x < 0 || y < 0 || x >= width || y >= height) return -1;
  // Inverse of the integer split used by grid_cell.
  int col = (x * grid_cols) / width;
  while (col + 1 < grid_cols && (col + 1) * width / grid_cols <= x) ++col;
  while (col > 0 && col * width / grid_cols > x) --col;
  int row = (y * grid_rows) / height;
  while (row + 1 < grid_rows && (row + 1) * height / grid_rows <= y) ++row;
  while (row > 0 && row * height / grid_rows > y) --row;
  return row * grid_cols + col;
}

namespace {

// 1-D weights clipped to [lo, hi) and renormalised; w[i][k] is the weight of
// sample lo + k for output position lo + i.
std::vector<std::vector<double>> clipped_weights(int n, int window, double sigma) {
  const int half = window / 2;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = std::max(0, i - half); k <= std::min(n - 1, i + half); ++k) {
      const double d = k - i;
      w[i][k] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += w[i][k];
    }
    for (double& x : w[i]) x /= sum;
  }
  return w;
}

// Separable filtering of a cell-local buffer.
std::vector<double> filter(const std::vector<double>& src, int w, int h, const std::vector<std::vector<double>>& wx,
                           const std::vector<std::vector<double>>& wy, int half) {
  std::vector<double> tmp(src.size(), 0.0);
  std::vector<double> out(src.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = std::max(0, x - half); k <= std::min(w - 1, x + half); ++k) s += wx[x][k] * src[y * w + k];
      tmp[y * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = std::max(0, y - half); k <= std::min(h - 1, y + half); ++k) s += wy[y][k] * tmp[k * w + x];
      out[y * w + x] = s;
    }
  }
  return out;
}

double cell_ssim(const ImagePlane& a, const ImagePlane& b, const CellRect& r, const SsimOptions& opt) {
  const int w = r.x1 - r.x0;
  const int h = r.y1 - r.y0;
  if (w <= 0 || h <= 0) throw InvalidArgument("empty SSIM cell");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * w + i;
      x[k] = a(r.x0 + i, r.y0 + j);
      y[k] = b(r.x0 + i, r.y0 + j);
      xx[k] = x[k] * x[k];
      yy[k] = y[k] * y[k];
      xy[k] = x[k] * y[k];
    }
  }
  const auto wx = clipped_weights(w, opt.window, opt.window_sigma);
  const auto wy = clipped_weights(h, opt.window, opt.window_sigma);
  const int half = opt.window / 2;
  const auto mx = filter(x, w, h, wx, wy, half);
  const auto my = filter(y, w, h, wx, wy, half);
  const auto sxx = filter(xx, w, h, wx, wy, half);
  const auto syy = filter(yy, w, h, wx, wy, half);
  const auto sxy = filter(xy, w, h, wx, wy, half);

  const double c1 = std::pow(opt.k1 * opt.dynamic_range, 2);
  const double c2 = std::pow(opt.k2 * opt.dynamic_range, 2);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vx = sxx[k] - mx[k] * mx[k];
    const double vy = syy[k] - my[k] * my[k];
    const double cxy = sxy[k] - mx[k] * my[k];
    const double num = (2.0 * mx[k] * my[k] + c1) * (2.0 * cxy + c2);
    const double den = (mx[k] * mx[k] + my[k] * my[k] + c1) * (vx + vy + c2);
    total += num / den;
  }
  return total / static_cast<double>(n);
}

}  // namespace

SsimGrid ssim_grid(const ImagePlane& a, const ImagePlane& b, const SsimOptions& opt) {
  if (a.width() != b.width() || a.height() != b.height()) throw InvalidArgument("SSIM images differ in size");
  if (opt.grid_cols <= 0 || opt.grid_rows <= 0 || opt.window <= 0 || !(opt.window_sigma > 0.0)) {
    throw InvalidArgument("invalid SSIM options");
  }
  SsimGrid g;
  g.grid_cols = opt.grid_cols;
  g.grid_rows = opt.grid_rows;
  const int cells = opt.grid_cols * opt.grid_rows;
  for (int c = 0; c < cells; ++c) {
    const double s = cell_ssim(a, b, grid_cell(a.width(), a.height(), opt.grid_cols, opt.grid_rows, c), opt);
    g.score.push_back(s);
    g.accepted.push_back(s >= opt.threshold);
  }
  return g;
}

std::vector<bool> ssim_grid_filter(const ImagePlane& rendered, const ImagePlane& captured, const SsimOptions& opt) {
  return ssim_grid(rendered, captured, opt).accepted;
}

}  // namespace mapvio
