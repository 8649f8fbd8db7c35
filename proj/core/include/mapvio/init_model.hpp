#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mapvio/image.hpp"
#include "mapvio/imu.hpp"
#include "mapvio/se3.hpp"

namespace mapvio {

/// An image with the pose of its camera in the world (x_W = gt_pose * x_C).
struct TrainSample {
  ImagePlane image;
  Pose gt_pose;
};

enum class Activation : std::uint8_t { kRelu = 0, kLinear = 1 };

struct DenseLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;
  Activation act = Activation::kRelu;
};

/// Image-to-pose regressor. The network outputs a twist xi and the predicted
/// pose is exp(xi) * anchor (anchor is the identity unless set by training).
struct MlpModel {
  std::vector<DenseLayer> layers;
  int input_width = 32;
  int input_height = 32;
  Eigen::VectorXd input_mean;  // subtracted per pixel; empty means zero
  double input_scale = 1.0;    // applied after the mean
  Pose anchor;
  MetricParam metric;
  /// Mean-square held-out pose_error() per axis, the source of the map
  /// alignment covariance.
  Vec6 validation_ms = Vec6::Zero();

  int input_dim() const { return input_width * input_height; }
  std::size_t parameter_count() const;
  /// Throws InvalidArgument on an inconsistent layer chain or non-finite values.
  void validate() const;
};

/// He-initialised MLP with `depth` affine layers: ReLU on hidden layers and a
/// linear 6-dimensional output whose weights are scaled by output_scale.
MlpModel make_mlp(int input_width, int input_height, int hidden = 256, int depth = 7, std::uint64_t seed = 1,
                  double output_scale = 0.01);

Eigen::VectorXd normalize_input(const MlpModel& m, const ImagePlane& img);

/// Throws InvalidArgument when the image size does not match the model.
Twist forward(const MlpModel& m, const ImagePlane& img);
std::vector<Twist> forward_batch(const MlpModel& m, const std::vector<ImagePlane>& imgs);
Pose predicted_pose(const MlpModel& m, const Twist& xi);

struct Gradient {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

struct LossAndGrad {
  double loss = 0.0;
  Gradient grad;
  int excluded = 0;  // samples skipped because the log was degenerate
};

/// Mean geodesic loss of the batch and its gradient by backpropagation.
/// Throws InvalidArgument on an empty batch.
LossAndGrad loss_and_grad(const MlpModel& m, std::span<const TrainSample> batch, const MetricParam& a);
double dataset_loss(const MlpModel& m, std::span<const TrainSample> data, const MetricParam& a);

Eigen::VectorXd parameters(const MlpModel& m);
void set_parameters(MlpModel& m, const Eigen::VectorXd& theta);
Eigen::VectorXd flatten(const Gradient& g);

struct TrainConfig {
  int epochs = 80;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // 0 gives plain SGD
  int batch_size = 32;
  std::uint64_t seed = 1;
  bool fit_input_norm = true;
  bool fit_anchor = true;
  double lr_decay = 0.97;  // multiplied into the rate after each epoch
};

struct TrainResult {
  MlpModel model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_loss;  // running mean of batch losses per epoch
  int excluded = 0;
};

/// Mini-batch SGD on the geodesic loss. Deterministic for a given seed.
/// Throws InvalidArgument for fewer than two samples and NumericalError
/// (naming the epoch) when the loss becomes non-finite.
TrainResult train(std::span<const TrainSample> data, const TrainConfig& cfg, MlpModel init);

/// Chordal mean of the rotations and arithmetic mean of the translations.
Pose mean_pose(std::span<const TrainSample> data);

Pose relocalize(const MlpModel& m, const ImagePlane& img);

/// Pose of the first IMU frame in the world from the camera pose in the world
/// and the IMU pose in the camera frame.
Pose compose_first_imu(const Pose& T_W_C0, const Pose& T_C0_I0);

struct InitResult {
  Pose T_W_I0;
  Vec3 v0 = Vec3::Zero();
  Vec3 bg0 = Vec3::Zero();
  Vec3 ba0 = Vec3::Zero();
};

struct BiasBootstrap {
  Vec3 v0 = Vec3::Zero();
  Vec3 bg0 = Vec3::Zero();
  Vec3 ba0 = Vec3::Zero();
};

/// Stationary-start bootstrap: v0 = 0, bg0 = mean gyro,
/// ba0 = mean accel + R_GtoI0 * gravity. Throws InvalidArgument on an empty window.
BiasBootstrap bootstrap_vel_bias(std::span<const ImuSample> window, const Mat3& R_GtoI0,
                                 const Vec3& gravity = kDefaultGravity);

/// World-frame error E = est * truth^-1 as (log of its rotation, its
/// translation); the translation is the apparent shift of the world origin.
Vec6 pose_error(const Pose& est, const Pose& truth);

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint; see docs/formats.md. read_* throws FormatError on a bad
/// magic, version or truncated file.
void write_checkpoint(std::ostream& out, const MlpModel& m);
MlpModel read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const MlpModel& m);
MlpModel load_checkpoint(const std::string& path);

}  // namespace mapvio
