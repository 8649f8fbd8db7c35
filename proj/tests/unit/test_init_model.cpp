#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "mapvio/error.hpp"
#include "mapvio/init_model.hpp"
#include "test_util.hpp"

using namespace mapvio;
using namespace mapvio::test;

namespace {

std::vector<TrainSample> random_samples(int n, int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrainSample> out;
  for (int i = 0; i < n; ++i) {
    ImagePlane img(w, h);
    for (double& v : img.data()) v = u(rng);
    out.push_back({img, random_pose(rng, 0.8, 1.0)});
  }
  return out;
}

double loss_at(MlpModel m, const Eigen::VectorXd& theta, std::span<const TrainSample> data, const MetricParam& a) {
  set_parameters(m, theta);
  return loss_and_grad(m, data, a).loss;
}

}  // namespace

TEST(InitModel, ShapeAndValidation) {
  const MlpModel m = make_mlp(8, 6, 16, 3, 1);
  EXPECT_EQ(m.layers.size(), 3u);
  EXPECT_EQ(m.layers.front().W.cols(), 48);
  EXPECT_EQ(m.layers.back().W.rows(), 6);
  EXPECT_EQ(m.layers.back().act, Activation::kLinear);
  EXPECT_EQ(m.parameter_count(), static_cast<std::size_t>(48 * 16 + 16 + 16 * 16 + 16 + 16 * 6 + 6));
  EXPECT_NO_THROW(m.validate());
  EXPECT_THROW(make_mlp(8, 6, 16, 0, 1), InvalidArgument);
  EXPECT_THROW(forward(m, ImagePlane(6, 8)), InvalidArgument);
}

TEST(InitModel, ParameterRoundTrip) {
  MlpModel m = make_mlp(4, 4, 8, 3, 2);
  const Eigen::VectorXd th = parameters(m);
  set_parameters(m, th * 2.0);
  EXPECT_EQ(parameters(m), th * 2.0);
  EXPECT_THROW(set_parameters(m, Eigen::VectorXd::Zero(3)), InvalidArgument);
}

TEST(InitModel, BatchForwardMatchesSingle) {
  const MlpModel m = make_mlp(5, 4, 12, 4, 3, 0.5);
  const auto data = random_samples(7, 5, 4, 4);
  std::vector<ImagePlane> imgs;
  for (const auto& s : data) imgs.push_back(s.image);
  const auto batch = forward_batch(m, imgs);
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_LT((batch[i].vector() - forward(m, data[i].image).vector()).norm(), 1e-13);
  }
}

TEST(InitModel, GradientMatchesCentralDifferences) {
  for (std::uint64_t seed : {11, 12, 13}) {
    MlpModel m = make_mlp(4, 3, 10, 3, seed, 0.5);
    std::mt19937_64 rng(seed);
    m.anchor = random_pose(rng, 0.5, 0.5);
    const MetricParam a(random_vec3(rng, 0.5));
    const auto data = random_samples(6, 4, 3, seed + 100);
    const LossAndGrad lg = loss_and_grad(m, data, a);
    ASSERT_EQ(lg.excluded, 0);
    const Eigen::VectorXd g = flatten(lg.grad);
    const Eigen::VectorXd th = parameters(m);
    const double h = 1e-6;
    const double gmax = g.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < th.size(); ++i) {
      Eigen::VectorXd p = th, q = th;
      p[i] += h;
      q[i] -= h;
      const double fd = (loss_at(m, p, data, a) - loss_at(m, q, data, a)) / (2 * h);
      worst = std::max(worst, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-3 * gmax));
    }
    EXPECT_LT(worst, 1e-4) << "seed " << seed;
  }
}

TEST(InitModel, LossIsMeanGeodesicDistance) {
  const MlpModel m = make_mlp(4, 4, 8, 2, 5, 0.3);
  const auto data = random_samples(5, 4, 4, 6);
  const MetricParam a(Vec3(0.1, 0.2, -0.1));
  double sum = 0;
  for (const auto& s : data) sum += geodesic_dist_sq(relocalize(m, s.image), s.gt_pose, a);
  EXPECT_NEAR(loss_and_grad(m, data, a).loss, sum / 5, 1e-12);
  EXPECT_NEAR(dataset_loss(m, data, a), sum / 5, 1e-12);
  EXPECT_THROW(loss_and_grad(m, {}, a), InvalidArgument);
}

TEST(InitModel, TrainingIsDeterministic) {
  const auto data = random_samples(40, 6, 6, 7);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  const MlpModel init = make_mlp(6, 6, 16, 3, 8);
  const TrainResult a = train(data, cfg, init);
  const TrainResult b = train(data, cfg, init);
  EXPECT_EQ(parameters(a.model), parameters(b.model));
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  cfg.seed = 2;
  EXPECT_NE(parameters(train(data, cfg, init).model), parameters(a.model));
}

TEST(InitModel, MemorizesSmallSet) {
  const auto data = random_samples(8, 6, 6, 9);
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.batch_size = 8;
  cfg.lr_decay = 1.0;
  const TrainResult r = train(data, cfg, make_mlp(6, 6, 64, 3, 10));
  EXPECT_LT(r.final_loss, 1e-3 * r.initial_loss);
  for (const auto& s : data) {
    const Pose p = relocalize(r.model, s.image);
    EXPECT_LT(rotation_angle_between(p.rotation, s.gt_pose.rotation), 0.02);
  }
}

TEST(InitModel, TrainRejectsBadInput) {
  const auto data = random_samples(4, 4, 4, 1);
  const MlpModel m = make_mlp(4, 4, 8, 2, 1);
  EXPECT_THROW(train(std::span(data).first(1), {}, m), InvalidArgument);
  TrainConfig bad;
  bad.momentum = 1.0;
  EXPECT_THROW(train(data, bad, m), InvalidArgument);
  TrainConfig huge;
  huge.learning_rate = 1e8;
  huge.momentum = 0.0;
  huge.epochs = 3;
  EXPECT_THROW(train(data, huge, m), NumericalError);
}

TEST(InitModel, MeanPose) {
  std::vector<TrainSample> s(2);
  s[0].gt_pose = {so3_exp(Vec3(0, 0, 0.2)), Vec3(1, 0, 0)};
  s[1].gt_pose = {so3_exp(Vec3(0, 0, -0.2)), Vec3(0, 1, 0)};
  const Pose m = mean_pose(s);
  EXPECT_LT((m.rotation - Mat3::Identity()).norm(), 1e-14);
  EXPECT_LT((m.translation - Vec3(0.5, 0.5, 0)).norm(), 1e-15);
}

TEST(InitModel, ComposeFirstImu) {
  const Pose I;
  EXPECT_EQ(compose_first_imu(I, I).matrix(), Mat4::Identity());
  const Pose a{Mat3::Identity(), Vec3(1, 2, 3)}, b{Mat3::Identity(), Vec3(-0.5, 0, 1)};
  EXPECT_LT((compose_first_imu(a, b).translation - Vec3(0.5, 2, 4)).norm(), 1e-15);
  // A point in the IMU frame reaches the world through the camera frame.
  std::mt19937_64 rng(3);
  const Pose T_W_C = random_pose(rng), T_C_I = random_pose(rng);
  const Vec3 x_I(0.1, 0.2, 0.3);
  EXPECT_LT((compose_first_imu(T_W_C, T_C_I) * x_I - T_W_C * (T_C_I * x_I)).norm(), 1e-14);
}

TEST(InitModel, BootstrapFromStationaryWindow) {
  const Mat3 R = so3_exp(Vec3(0.1, -0.2, 0.3));
  const Vec3 bg(0.01, -0.02, 0.005), ba(0.1, 0.05, -0.2);
  std::vector<ImuSample> w;
  for (int k = 0; k < 50; ++k) w.push_back({k * 0.005, bg, R * (-kDefaultGravity) + ba});
  const BiasBootstrap b = bootstrap_vel_bias(w, R);
  EXPECT_LT((b.bg0 - bg).norm(), 1e-15);
  EXPECT_LT((b.ba0 - ba).norm(), 1e-14);
  EXPECT_EQ(b.v0, Vec3::Zero());
  EXPECT_THROW(bootstrap_vel_bias({}, R), InvalidArgument);
}

TEST(InitModel, PoseError) {
  const Pose truth{so3_exp(Vec3(0.1, 0.2, 0.3)), Vec3(1, 2, 3)};
  EXPECT_LT(pose_error(truth, truth).norm(), 1e-15);
  const Pose shifted{truth.rotation, truth.translation + Vec3(0.01, 0, 0)};
  EXPECT_LT((pose_error(shifted, truth) - (Vec6() << 0, 0, 0, 0.01, 0, 0).finished()).norm(), 1e-15);
}

TEST(InitModel, CheckpointRoundTrip) {
  MlpModel m = make_mlp(6, 5, 9, 3, 4, 0.2);
  m.input_mean = Eigen::VectorXd::LinSpaced(30, 0.1, 0.9);
  m.input_scale = 3.5;
  m.anchor = {so3_exp(Vec3(0.3, 0, 0.1)), Vec3(1, -1, 0.5)};
  m.metric = MetricParam(Vec3(0.1, 0.2, 0.3));
  m.validation_ms << 1e-4, 2e-4, 3e-4, 1e-3, 2e-3, 3e-3;
  std::stringstream ss;
  write_checkpoint(ss, m);
  const MlpModel b = read_checkpoint(ss);
  EXPECT_EQ(parameters(b), parameters(m));
  EXPECT_EQ(b.input_mean, m.input_mean);
  EXPECT_EQ(b.input_scale, m.input_scale);
  EXPECT_EQ(b.anchor.matrix(), m.anchor.matrix());
  EXPECT_EQ(b.metric.a(), m.metric.a());
  EXPECT_EQ(b.validation_ms, m.validation_ms);
  const auto img = random_samples(1, 6, 5, 1)[0].image;
  EXPECT_EQ(relocalize(b, img).matrix(), relocalize(m, img).matrix());

  const auto path = std::filesystem::temp_directory_path() / "mapvio_test_model.bin";
  save_checkpoint(path.string(), m);
  EXPECT_EQ(parameters(load_checkpoint(path.string())), parameters(m));
  std::filesystem::remove(path);
}

TEST(InitModel, CheckpointRejectsCorruption) {
  std::stringstream bad("not a checkpoint at all");
  EXPECT_THROW(read_checkpoint(bad), FormatError);
  std::stringstream ss;
  write_checkpoint(ss, make_mlp(4, 4, 8, 2, 1));
  const std::string full = ss.str();
  std::stringstream truncated(full.substr(0, full.size() / 2));
  EXPECT_THROW(read_checkpoint(truncated), FormatError);
  std::string wrong_version = full;
  wrong_version[8] = 9;
  std::stringstream wv(wrong_version);
  EXPECT_THROW(read_checkpoint(wv), FormatError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.bin"), FormatError);
}
