#pragma once

#include <vector>

#include "mapvio/render.hpp"

namespace mapvio {

struct PhotometricOptions {
  int max_iterations = 100;   // per pyramid level
  double fd_step = 1e-3;      // twist step of the central differences
  double initial_step = 0.05; // first line-search step length (twist norm)
  double min_step = 1e-4;     // stop once the step shrinks below this
  int max_backtracks = 8;
  std::vector<int> pyramid = {1};  // downsampling factors, coarse first
};

struct PhotometricResult {
  Pose pose;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
  bool converged = false;  // stopped on a vanishing step rather than the budget
  /// Per pyramid level: the level's loss at entry and after each accepted step.
  std::vector<std::vector<double>> level_losses;
};

/// Mean squared intensity difference between render(map, T_W_C) and img,
/// both area-downsampled by `factor`.
double photometric_loss(const MapModel& map, const ImagePlane& img, const Pose& T_W_C, int factor = 1);

/// Gradient descent on the photometric loss over a camera-frame perturbation
/// T_W_C = guess * exp(xi), with finite-difference gradients and a
/// backtracking line search (only decreasing steps are taken). img must have
/// the map's resolution.
PhotometricResult refine_pose_photometric(const MapModel& map, const ImagePlane& img, const Pose& guess,
                                          const PhotometricOptions& opt = {});

}  // namespace mapvio
