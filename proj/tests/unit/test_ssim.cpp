#include <gtest/gtest.h>

#include <random>

#include "mapvio/error.hpp"
#include "mapvio/ssim.hpp"

using namespace mapvio;

namespace {

ImagePlane noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImagePlane img(w, h);
  for (double& v : img.data()) v = u(rng);
  return img;
}

}  // namespace

TEST(Ssim, CellsTileTheImage) {
  std::vector<int> hits(320 * 240, 0);
  for (int c = 0; c < 64; ++c) {
    const CellRect r = grid_cell(320, 240, 8, 8, c);
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) ++hits[y * 320 + x];
  }
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_EQ(grid_cell_of(320, 240, 8, 8, 0, 0), 0);
  EXPECT_EQ(grid_cell_of(320, 240, 8, 8, 319, 239), 63);
  EXPECT_EQ(grid_cell_of(320, 240, 8, 8, 45, 31), 9);
  EXPECT_EQ(grid_cell_of(320, 240, 8, 8, -1, 10), -1);
}

TEST(Ssim, IdenticalImagesPassEverywhere) {
  const ImagePlane a = noise_image(320, 240, 1);
  const SsimGrid g = ssim_grid(a, a);
  ASSERT_EQ(g.score.size(), 64u);
  for (std::size_t c = 0; c < 64; ++c) {
    EXPECT_DOUBLE_EQ(g.score[c], 1.0);
    EXPECT_TRUE(g.accepted[c]);
  }
}

TEST(Ssim, Symmetric) {
  const ImagePlane a = noise_image(64, 48, 2), b = noise_image(64, 48, 3);
  const SsimGrid ab = ssim_grid(a, b), ba = ssim_grid(b, a);
  for (std::size_t c = 0; c < ab.score.size(); ++c) EXPECT_DOUBLE_EQ(ab.score[c], ba.score[c]);
}

TEST(Ssim, ConstantCellsFollowLuminanceTerm) {
  // Flat cells: zero variance, so SSIM reduces to (2 ma mb + C1) / (ma^2 + mb^2 + C1).
  const SsimOptions opt;
  const double C1 = std::pow(opt.k1 * opt.dynamic_range, 2);
  const ImagePlane a(64, 64, 0.3), b(64, 64, 0.6);
  const SsimGrid g = ssim_grid(a, b, opt);
  const double expected = (2 * 0.3 * 0.6 + C1) / (0.09 + 0.36 + C1);
  for (double s : g.score) EXPECT_NEAR(s, expected, 1e-12);
}

TEST(Ssim, CellsAreIndependent) {
  const ImagePlane a = noise_image(320, 240, 4);
  ImagePlane b = a;
  const CellRect r = grid_cell(320, 240, 8, 8, 27);
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) b(x, y) = 1.0 - b(x, y);
  const SsimGrid g = ssim_grid(a, b);
  for (int c = 0; c < 64; ++c) {
    if (c == 27) {
      EXPECT_FALSE(g.accepted[c]);
    } else {
      EXPECT_DOUBLE_EQ(g.score[c], 1.0);
    }
  }
  EXPECT_EQ(ssim_grid_filter(a, b), g.accepted);
}

TEST(Ssim, ScoreDropsWithNoise) {
  const ImagePlane a = noise_image(64, 64, 5);
  ImagePlane b = a, c = a;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  for (std::size_t i = 0; i < a.size(); ++i) {
    b.data()[i] = std::clamp(a.data()[i] + 0.02 * n(rng), 0.0, 1.0);
    c.data()[i] = std::clamp(a.data()[i] + 0.2 * n(rng), 0.0, 1.0);
  }
  SsimOptions opt;
  opt.grid_cols = opt.grid_rows = 1;
  EXPECT_GT(ssim_grid(a, b, opt).score[0], ssim_grid(a, c, opt).score[0]);
  EXPECT_LT(ssim_grid(a, c, opt).score[0], 1.0);
}

TEST(Ssim, RejectsMismatchedSizes) {
  EXPECT_THROW(ssim_grid(ImagePlane(10, 10), ImagePlane(10, 11)), InvalidArgument);
  SsimOptions opt;
  opt.grid_cols = 20;
  EXPECT_THROW(ssim_grid(ImagePlane(10, 10), ImagePlane(10, 10), opt), InvalidArgument);
}
