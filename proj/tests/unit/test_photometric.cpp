#include <gtest/gtest.h>

#include <chrono>
#include <numbers>

#include "mapvio/experiment.hpp"
#include "mapvio/metrics.hpp"
#include "mapvio/photometric.hpp"

using namespace mapvio;

namespace {

// Quarter-resolution map keeps each refinement well under a second.
struct Scene {
  MapModel map;
  Pose truth;
  ImagePlane image;
};

Scene make_scene() {
  const ExperimentConfig cfg;
  const MapModel full = build_map(cfg);
  Scene s;
  s.map = full.scaled(0.25);
  s.truth = make_init_dataset(full, build_world(cfg).calib, init_region_for(cfg), 1, 5, 8)[0].gt_pose;
  s.image = render(s.map, s.truth);
  return s;
}

const Scene& scene() {
  static const Scene s = make_scene();
  return s;
}

}  // namespace

TEST(Photometric, LossVanishesAtTruth) {
  const Scene& s = scene();
  EXPECT_EQ(photometric_loss(s.map, s.image, s.truth), 0.0);
  const Pose off{s.truth.rotation, s.truth.translation + Vec3(0.05, 0, 0)};
  EXPECT_GT(photometric_loss(s.map, s.image, off), 0.0);
  EXPECT_GE(photometric_loss(s.map, s.image, off, 2), 0.0);
}

TEST(Photometric, TruthIsAFixedPoint) {
  const Scene& s = scene();
  const PhotometricResult r = refine_pose_photometric(s.map, s.image, s.truth);
  EXPECT_EQ(r.accepted_steps, 0);
  EXPECT_EQ(r.final_loss, 0.0);
  EXPECT_EQ(r.pose.matrix(), s.truth.matrix());
}

TEST(Photometric, RecoversSmallPerturbation) {
  const Scene& s = scene();
  const Pose guess = s.truth * Pose{so3_exp(Vec3(0.01, -0.01, 0.01)), Vec3(0.01, 0.02, -0.01)};
  PhotometricOptions opt;
  opt.pyramid = {2, 1};
  const PhotometricResult r = refine_pose_photometric(s.map, s.image, guess, opt);
  EXPECT_LT(r.final_loss, 0.1 * r.initial_loss);
  const InitEval before = pose_difference(guess, s.truth);
  const InitEval after = pose_difference(r.pose, s.truth);
  EXPECT_LT(after.rot_deg, 0.5 * before.rot_deg);
  EXPECT_LT(after.pos_cm, 0.5 * before.pos_cm);
  ASSERT_EQ(r.level_losses.size(), 2u);
  for (const auto& level : r.level_losses) {
    ASSERT_FALSE(level.empty());
    for (std::size_t i = 1; i < level.size(); ++i) EXPECT_LT(level[i], level[i - 1]);
  }
}

TEST(Photometric, RespectsIterationBudget) {
  const Scene& s = scene();
  const Pose guess = s.truth * Pose{so3_exp(Vec3(0.05, 0, 0)), Vec3(0.1, 0, 0)};
  PhotometricOptions opt;
  opt.max_iterations = 3;
  const PhotometricResult r = refine_pose_photometric(s.map, s.image, guess, opt);
  EXPECT_LE(r.iterations, 3);
  EXPECT_LE(r.final_loss, r.initial_loss);
}
