#include "mapvio/fast.hpp"

#include <algorithm>
#include <array>

namespace mapvio {

namespace {

constexpr std::array<std::array<int, 2>, 16> kCircle{{{0, -3},
                                                       {1, -3},
                                                       {2, -2},
                                                       {3, -1},
                                                       {3, 0},
                                                       {3, 1},
                                                       {2, 2},
                                                       {1, 3},
                                                       {0, 3},
                                                       {-1, 3},
                                                       {-2, 2},
                                                       {-3, 1},
                                                       {-3, 0},
                                                       {-3, -1},
                                                       {-2, -2},
                                                       {-1, -3}}};

std::array<double, 16> ring(const ImagePlane& img, int x, int y) {
  std::array<double, 16> d{};
  const double c = img(x, y);
  for (int i = 0; i < 16; ++i) d[i] = img(x + kCircle[i][0], y + kCircle[i][1]) - c;
  return d;
}

// Largest m such that some arc of `arc` contiguous entries all exceed m
// (sign = +1) or all fall below -m (sign = -1); zero when none is positive.
double best_arc(const std::array<double, 16>& d, int arc, double sign) {
  double best = 0.0;
  for (int s = 0; s < 16; ++s) {
    double m = sign * d[s];
    for (int k = 1; k < arc && m > best; ++k) m = std::min(m, sign * d[(s + k) % 16]);
    best = std::max(best, m);
  }
  return best;
}

bool inside(const ImagePlane& img, int x, int y) { return x >= 3 && y >= 3 && x < img.width() - 3 && y < img.height() - 3; }

}  // namespace

bool fast_segment_test(const ImagePlane& img, int x, int y, double t, int arc) {
  if (!inside(img, x, y)) return false;
  const auto d = ring(img, x, y);
  for (double sign : {1.0, -1.0}) {
    for (int s = 0; s < 16; ++s) {
      int k = 0;
      while (k < arc && sign * d[(s + k) % 16] > t) ++k;
      if (k == arc) return true;
    }
  }
  return false;
}

double fast_score(const ImagePlane& img, int x, int y, int arc) {
  if (!inside(img, x, y)) return 0.0;
  const auto d = ring(img, x, y);
  return std::max(best_arc(d, arc, 1.0), best_arc(d, arc, -1.0));
}

std::vector<Corner> fast_detect(const ImagePlane& img, double t, bool nonmax) {
  std::vector<Corner> raw;
  if (img.width() < 7 || img.height() < 7) return raw;
  const int w = img.width();
  std::vector<double> score(img.size(), 0.0);
  for (int y = 3; y < img.height() - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      if (!fast_segment_test(img, x, y, t)) continue;
      const double s = fast_score(img, x, y);
      score[static_cast<std::size_t>(y) * w + x] = s;
      raw.push_back({x, y, s});
    }
  }
  if (!nonmax) return raw;
  std::vector<Corner> out;
  for (const auto& c : raw) {
    bool keep = true;
    for (int dy = -1; dy <= 1 && keep; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const double s = score[static_cast<std::size_t>(c.y + dy) * w + c.x + dx];
        // Ties go to the first pixel in raster order.
        if (s > c.score || (s == c.score && s > 0.0 && (dy < 0 || (dy == 0 && dx < 0)))) {
          keep = false;
          break;
        }
      }
    }
    if (keep) out.push_back(c);
  }
  return out;
}

}  // namespace mapvio
