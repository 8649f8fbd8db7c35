#include "mapvio/metrics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "mapvio/error.hpp"

namespace mapvio {

Pose umeyama_rigid(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size() || src.size() < 2) throw InvalidArgument("alignment needs two matched points");
  Vec3 ms = Vec3::Zero(), md = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    ms += src[i];
    md += dst[i];
  }
  ms /= static_cast<double>(src.size());
  md /= static_cast<double>(src.size());
  Mat3 C = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) C += (dst[i] - md) * (src[i] - ms).transpose();
  Eigen::JacobiSVD<Mat3> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 S = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) S(2, 2) = -1.0;
  const Mat3 R = svd.matrixU() * S * svd.matrixV().transpose();
  return {R, md - R * ms};
}

AteResult compute_ate(const std::vector<TrajectoryEntry>& est, const std::vector<TrajectoryEntry>& gt) {
  std::vector<std::pair<const TrajectoryEntry*, const TrajectoryEntry*>> pairs;
  for (const auto& e : est) {
    auto it = std::lower_bound(gt.begin(), gt.end(), e.t, [](const TrajectoryEntry& g, double t) { return g.t < t; });
    const TrajectoryEntry* best = nullptr;
    double best_dt = 1e-3;
    for (auto c : {it, it == gt.begin() ? it : std::prev(it)}) {
      if (c == gt.end()) continue;
      const double dt = std::abs(c->t - e.t);
      if (dt <= best_dt) {
        best_dt = dt;
        best = &*c;
      }
    }
    if (best) pairs.emplace_back(&e, best);
  }
  if (pairs.size() < 2) throw InvalidArgument("trajectories share fewer than two timestamps");

  std::vector<Vec3> src, dst;
  for (const auto& [e, g] : pairs) {
    src.push_back(e->p_I_in_G);
    dst.push_back(g->p_I_in_G);
  }
  AteResult r;
  r.alignment = umeyama_rigid(src, dst);
  r.matched = static_cast<int>(pairs.size());
  double se_p = 0.0, se_r = 0.0;
  for (const auto& [e, g] : pairs) {
    const Vec3 p = r.alignment * e->p_I_in_G;
    se_p += (p - g->p_I_in_G).squaredNorm();
    const Mat3 R_ItoG = r.alignment.rotation * e->R_GtoI.transpose();
    const double ang = rotation_angle_between(R_ItoG, g->R_GtoI.transpose());
    se_r += ang * ang;
  }
  r.pos_m = std::sqrt(se_p / pairs.size());
  r.rot_deg = std::sqrt(se_r / pairs.size()) * 180.0 / std::numbers::pi;
  return r;
}

InitEval pose_difference(const Pose& est, const Pose& truth) {
  InitEval e;
  e.rot_deg = rotation_angle_between(est.rotation, truth.rotation) * 180.0 / std::numbers::pi;
  e.pos_cm = (est.translation - truth.translation).norm() * 100.0;
  e.estimate = est;
  return e;
}

std::vector<InitEval> eval_init(const MlpModel& m, std::span<const TrainSample> test) {
  std::vector<InitEval> out;
  out.reserve(test.size());
  for (const auto& s : test) {
    const auto t0 = std::chrono::steady_clock::now();
    const Pose est = relocalize(m, s.image);
    const auto t1 = std::chrono::steady_clock::now();
    InitEval e = pose_difference(est, s.gt_pose);
    e.seconds = std::chrono::duration<double>(t1 - t0).count();
    out.push_back(e);
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace mapvio
