#include "mapvio/photometric.hpp"

#include <cmath>

#include "mapvio/error.hpp"

namespace mapvio {

namespace {

ImagePlane downsample(const ImagePlane& img, int factor) {
  if (factor == 1) return img;
  return area_resample(img, std::max(1, img.width() / factor), std::max(1, img.height() / factor));
}

double mse(const ImagePlane& a, const ImagePlane& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

Pose perturb(const Pose& T, const Vec6& xi) { return T * se3_exp(Twist::from_vector(xi)); }

}  // namespace

double photometric_loss(const MapModel& map, const ImagePlane& img, const Pose& T_W_C, int factor) {
  if (img.width() != map.camera.width || img.height() != map.camera.height) {
    throw InvalidArgument("image does not match the map resolution");
  }
  if (factor < 1) throw InvalidArgument("downsampling factor must be positive");
  return mse(downsample(render(map, T_W_C), factor), downsample(img, factor));
}

PhotometricResult refine_pose_photometric(const MapModel& map, const ImagePlane& img, const Pose& guess,
                                          const PhotometricOptions& opt) {
  if (opt.pyramid.empty() || opt.max_iterations < 0 || !(opt.fd_step > 0.0) || !(opt.initial_step > 0.0)) {
    throw InvalidArgument("invalid photometric options");
  }
  PhotometricResult res;
  res.pose = guess;
  res.initial_loss = photometric_loss(map, img, guess);
  bool budget_hit = false;

  for (int factor : opt.pyramid) {
    const ImagePlane target = downsample(img, factor);
    auto loss_at = [&](const Pose& T) { return mse(downsample(render(map, T), factor), target); };
    double current = loss_at(res.pose);
    res.level_losses.push_back({current});
    double step = opt.initial_step;
    bool level_converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
      ++res.iterations;
      Vec6 g;
      for (int k = 0; k < 6; ++k) {
        Vec6 d = Vec6::Zero();
        d[k] = opt.fd_step;
        g[k] = (loss_at(perturb(res.pose, d)) - loss_at(perturb(res.pose, -d))) / (2.0 * opt.fd_step);
      }
      const double gn = g.norm();
      if (!(gn > 0.0)) {
        level_converged = true;
        break;
      }
      bool accepted = false;
      for (int b = 0; b <= opt.max_backtracks; ++b) {
        const Pose cand = perturb(res.pose, -step / gn * g);
        const double l = loss_at(cand);
        if (l < current) {
          res.pose = cand;
          current = l;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted || step < opt.min_step) {
        level_converged = true;
        break;
      }
      ++res.accepted_steps;
      res.level_losses.back().push_back(current);
      step *= 1.5;
    }
    budget_hit = !level_converged;
  }
  res.final_loss = photometric_loss(map, img, res.pose);
  res.converged = !budget_hit;
  if (!std::isfinite(res.final_loss)) throw NumericalError("photometric refinement diverged");
  return res;
}

}  // namespace mapvio
