#pragma once

#include <vector>

#include "mapvio/image.hpp"

namespace mapvio {

struct Corner {
  int x = 0;
  int y = 0;
  double score = 0.0;  // largest threshold at which the segment test still passes
};

/// Segment test on the 16-pixel Bresenham circle of radius 3: true when at
/// least `arc` contiguous pixels are all brighter than centre + t or all
/// darker than centre - t.
bool fast_segment_test(const ImagePlane& img, int x, int y, double t, int arc = 9);
double fast_score(const ImagePlane& img, int x, int y, int arc = 9);

/// FAST-9 with 3x3 non-maximum suppression. Corners are ordered by row, then
/// column. Images smaller than 7x7 yield no corners.
std::vector<Corner> fast_detect(const ImagePlane& img, double t, bool nonmax = true);

}  // namespace mapvio
