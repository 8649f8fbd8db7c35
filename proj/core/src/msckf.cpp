#include "mapvio/msckf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>

#include "mapvio/error.hpp"

namespace mapvio {

void CameraIntrinsics::validate() const {
  if (width <= 0 || height <= 0) throw InvalidArgument("camera resolution must be positive");
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("focal lengths must be positive");
}

Vec2 project(const Vec3& p_C) {
  if (!(p_C.z() > kMinDepth)) throw InvalidArgument("point is behind the camera");
  return {p_C.x() / p_C.z(), p_C.y() / p_C.z()};
}

Mat23 jacobian_project(const Vec3& p_C) {
  if (!(p_C.z() > kMinDepth)) throw InvalidArgument("point is behind the camera");
  const double iz = 1.0 / p_C.z();
  Mat23 J;
  J << iz, 0.0, -p_C.x() * iz * iz, 0.0, iz, -p_C.y() * iz * iz;
  return J;
}

Vec3 transform_to_camera(const FilterState& fs, double clone_ts, const Vec3& p_G) {
  const CloneEntry& c = fs.clone_at(clone_ts);
  return fs.calib.R_ItoC * c.R_GtoI * (p_G - c.p_I_in_G) + fs.calib.p_I_in_C;
}

// ---------------------------------------------------------------------------
// Triangulation

namespace {

Vec3 bearing(const CameraView& v) { return (v.R_GtoC.transpose() * Vec3(v.xy.x(), v.xy.y(), 1.0)).normalized(); }

}  // namespace

Vec3 triangulate(const std::vector<CameraView>& views, const TriangulationOptions& opt) {
  if (views.size() < 2) throw NumericalError("triangulation needs at least two views");

  double baseline = 0.0;
  double parallax = 0.0;
  std::vector<Vec3> rays;
  rays.reserve(views.size());
  for (const auto& v : views) rays.push_back(bearing(v));
  for (std::size_t i = 0; i < views.size(); ++i) {
    for (std::size_t j = i + 1; j < views.size(); ++j) {
      baseline = std::max(baseline, (views[i].p_C_in_G - views[j].p_C_in_G).norm());
      parallax = std::max(parallax, std::atan2(rays[i].cross(rays[j]).norm(), rays[i].dot(rays[j])));
    }
  }
  if (baseline < opt.min_baseline) throw NumericalError("triangulation baseline too small");
  if (parallax < opt.min_parallax_deg * std::numbers::pi / 180.0) {
    throw NumericalError("triangulation is ill-conditioned (insufficient parallax)");
  }

  // Linear seed: sum_i (I - b b^T)(X - c_i) = 0
  Mat3 A = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const Mat3 Pi = Mat3::Identity() - rays[i] * rays[i].transpose();
    A += Pi;
    rhs += Pi * views[i].p_C_in_G;
  }
  Vec3 X = A.ldlt().solve(rhs);
  if (!X.allFinite()) throw NumericalError("linear triangulation failed");

  const int n = static_cast<int>(views.size());
  Eigen::MatrixXd J(2 * n, 3);
  Eigen::VectorXd r(2 * n);
  auto linearize = [&](const Vec3& P) {
    for (int i = 0; i < n; ++i) {
      const Vec3 pc = views[i].R_GtoC * (P - views[i].p_C_in_G);
      if (!(pc.z() > kMinDepth)) throw NumericalError("triangulated point behind a camera");
      r.segment<2>(2 * i) = views[i].xy - project(pc);
      J.middleRows<2>(2 * i) = jacobian_project(pc) * views[i].R_GtoC;
    }
  };

  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    linearize(X);
    const Vec3 dx = (J.transpose() * J).ldlt().solve(J.transpose() * r);
    if (!dx.allFinite()) throw NumericalError("triangulation diverged");
    X += dx;
    if (dx.norm() < opt.step_tolerance) {
      converged = true;
      break;
    }
  }
  linearize(X);
  const double rms = std::sqrt(r.squaredNorm() / n);
  if (!X.allFinite() || rms > opt.max_rms_normalized) {
    throw NumericalError(converged ? "triangulation reprojection error above gate" : "triangulation diverged");
  }
  return X;
}

std::vector<CameraView> track_views(const FeatureTrack& track, const FilterState& fs, const CameraIntrinsics& cam,
                                    bool to_map) {
  std::vector<CameraView> views;
  views.reserve(track.obs.size());
  for (const auto& o : track.obs) {
    const auto idx = fs.find_clone(o.t);
    if (!idx) continue;
    const CloneEntry& c = fs.clones[*idx];
    CameraView v;
    v.R_GtoC = fs.calib.R_ItoC * c.R_GtoI;
    v.p_C_in_G = c.p_I_in_G - v.R_GtoC.transpose() * fs.calib.p_I_in_C;
    v.xy = cam.to_normalized(o.uv);
    if (to_map) {
      const Mat3& R_GW = fs.T_GW.rotation;
      v.p_C_in_G = R_GW.transpose() * (v.p_C_in_G - fs.T_GW.translation);
      v.R_GtoC = v.R_GtoC * R_GW;
    }
    views.push_back(v);
  }
  return views;
}

Vec3 triangulate(const FeatureTrack& track, const FilterState& fs, const CameraIntrinsics& cam,
                 const TriangulationOptions& opt) {
  return triangulate(track_views(track, fs, cam), opt);
}

// ---------------------------------------------------------------------------
// Linearization

namespace {

struct ObsGeometry {
  int clone_col = 0;
  Vec3 y;    // R_GtoI (p_G - p_I)
  Vec3 p_C;  // feature in camera
  Mat23 Jpi;
};

Mat2 pixel_cov(const CameraIntrinsics& cam, double sigma_px) {
  Mat2 R = Mat2::Zero();
  R(0, 0) = sigma_px * sigma_px / (cam.fx * cam.fx);
  R(1, 1) = sigma_px * sigma_px / (cam.fy * cam.fy);
  return R;
}

// Multiplies the 2-row block starting at `row` by L^-1, L = chol(cov).
void whiten_rows(LinearizedFeature& lin, int row, const Mat2& cov) {
  Eigen::LLT<Mat2> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("measurement covariance is not positive definite");
  const Mat2 L = llt.matrixL();
  const Mat2 Linv = L.triangularView<Eigen::Lower>().solve(Mat2::Identity());
  lin.r.segment<2>(row) = Linv * lin.r.segment<2>(row);
  lin.Hx.middleRows<2>(row) = Linv * lin.Hx.middleRows<2>(row);
  lin.Hf.middleRows<2>(row) = Linv * lin.Hf.middleRows<2>(row);
}

// Fills residual and state columns shared by both feature kinds; returns the
// per-row geometry so callers can add their own noise model and Hf.
std::vector<ObsGeometry> fill_common(const FeatureTrack& track, const FilterState& fs, const Vec3& p_G,
                                     const CameraIntrinsics& cam, LinearizedFeature& lin) {
  std::vector<ObsGeometry> geo;
  for (const auto& o : track.obs) {
    const auto idx = fs.find_clone(o.t);
    if (!idx) continue;
    const CloneEntry& c = fs.clones[*idx];
    ObsGeometry g;
    g.clone_col = fs.clone_offset(*idx);
    g.y = c.R_GtoI * (p_G - c.p_I_in_G);
    g.p_C = fs.calib.R_ItoC * g.y + fs.calib.p_I_in_C;
    g.Jpi = jacobian_project(g.p_C);
    geo.push_back(g);
  }
  const int rows = 2 * static_cast<int>(geo.size());
  lin.Hx = Eigen::MatrixXd::Zero(rows, fs.dim());
  lin.Hf = Eigen::MatrixXd::Zero(rows, 3);
  lin.r = Eigen::VectorXd::Zero(rows);

  int k = 0;
  for (const auto& o : track.obs) {
    const auto idx = fs.find_clone(o.t);
    if (!idx) continue;
    const ObsGeometry& g = geo[k];
    const CloneEntry& c = fs.clones[*idx];
    const int row = 2 * k;
    lin.r.segment<2>(row) = cam.to_normalized(o.uv) - project(g.p_C);
    const Mat23 JR = g.Jpi * fs.calib.R_ItoC;
    lin.Hx.block<2, 3>(row, g.clone_col) = JR * skew(g.y);
    lin.Hx.block<2, 3>(row, g.clone_col + 3) = -JR * c.R_GtoI;
    if (fs.calib_active) {
      const int co = fs.calib_offset();
      lin.Hx.block<2, 3>(row, co) = g.Jpi * skew(fs.calib.R_ItoC * g.y);
      lin.Hx.block<2, 3>(row, co + 3) = g.Jpi;
    }
    ++k;
  }
  return geo;
}

}  // namespace

LinearizedFeature linearize_captured(const FeatureTrack& track, const FilterState& fs, const Vec3& p_G,
                                     const UpdateOptions& opt) {
  LinearizedFeature lin;
  const auto geo = fill_common(track, fs, p_G, opt.camera, lin);
  const Mat2 cov = pixel_cov(opt.camera, opt.sigma_px);
  int k = 0;
  for (const auto& o : track.obs) {
    const auto idx = fs.find_clone(o.t);
    if (!idx) continue;
    lin.Hf.middleRows<2>(2 * k) = geo[k].Jpi * fs.calib.R_ItoC * fs.clones[*idx].R_GtoI;
    whiten_rows(lin, 2 * k, cov);
    ++k;
  }
  return lin;
}

LinearizedFeature linearize_rendered(const FeatureTrack& track, const FilterState& fs, const Vec3& p_W,
                                     const UpdateOptions& opt) {
  const Mat3& R_GW = fs.T_GW.rotation;
  const Vec3 p_G = R_GW * p_W + fs.T_GW.translation;
  LinearizedFeature lin;
  const auto geo = fill_common(track, fs, p_G, opt.camera, lin);
  const Mat2 base = pixel_cov(opt.camera, opt.sigma_r);
  const Mat3 lever = skew(R_GW * p_W);
  int k = 0;
  for (const auto& o : track.obs) {
    const auto idx = fs.find_clone(o.t);
    if (!idx) continue;
    const Mat23 JRR = geo[k].Jpi * fs.calib.R_ItoC * fs.clones[*idx].R_GtoI;
    lin.Hf.middleRows<2>(2 * k) = JRR * R_GW;
    const InflatedNoise inflated = inflate_noise(base, JRR * lever, JRR, fs.sigma_init);
    whiten_rows(lin, 2 * k, inflated.cov);
    ++k;
  }
  return lin;
}

Eigen::MatrixXd left_nullspace(const Eigen::MatrixXd& Hf) {
  const int rows = static_cast<int>(Hf.rows());
  const int cols = static_cast<int>(Hf.cols());
  if (rows <= cols) return Eigen::MatrixXd(rows, 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Hf);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(rows - cols);
}

double chi2_quantile(int dof, double probability) {
  if (dof <= 0) throw InvalidArgument("chi-square needs a positive number of degrees of freedom");
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, probability);
}

Eigen::VectorXd ekf_update(FilterState& fs, Covariance& P, const Eigen::MatrixXd& H_in, const Eigen::VectorXd& r_in) {
  const int n = fs.dim();
  if (H_in.cols() != n || H_in.rows() != r_in.size()) throw InvalidArgument("update dimensions do not match");
  Eigen::MatrixXd H = H_in;
  Eigen::VectorXd r = r_in;
  if (H.rows() > n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(H);
    const Eigen::VectorXd qtr = qr.householderQ().transpose() * r;
    H = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    r = qtr.head(n);
  }
  const Eigen::MatrixXd PHt = P * H.transpose();
  Eigen::MatrixXd S = H * PHt;
  S.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalError("innovation covariance is singular");
  const Eigen::MatrixXd K = llt.solve(PHt.transpose()).transpose();
  const Eigen::VectorXd dx = K * r;

  Eigen::MatrixXd IKH = -K * H;
  IKH.diagonal().array() += 1.0;
  Covariance Pn = IKH * P * IKH.transpose() + K * K.transpose();
  P = 0.5 * (Pn + Pn.transpose());
  apply_correction(fs, dx);
  return dx;
}

// ---------------------------------------------------------------------------
// Updates

namespace {

struct Projected {
  Eigen::MatrixXd H;
  Eigen::VectorXd r;
  Eigen::MatrixXd N;  // empty when no projection was applied
  Vec3 point;         // linearization point (G for captured, W for rendered)
  const FeatureTrack* track = nullptr;
};

double gate_value(const Projected& p, const Covariance& P) {
  Eigen::MatrixXd S = p.H * P * p.H.transpose();
  S.diagonal().array() += 1.0;
  return p.r.dot(S.ldlt().solve(p.r));
}

// Gates each candidate, stacks the survivors, updates, and measures the
// post-update residual with `relinearize`.
template <typename Relinearize>
UpdateReport gate_and_update(FilterState& fs, Covariance& P, std::vector<Projected>& candidates, int failed,
                             const UpdateOptions& opt, Relinearize relinearize) {
  UpdateReport rep;
  rep.features_failed = failed;
  std::vector<const Projected*> accepted;
  int rows = 0;
  for (const auto& c : candidates) {
    const int dof = static_cast<int>(c.r.size());
    GateRecord g{c.track->id, dof, gate_value(c, P), false};
    g.accepted = std::isfinite(g.chi2) && g.chi2 < chi2_quantile(dof, opt.chi2_probability);
    rep.gates.push_back(g);
    if (g.accepted) {
      accepted.push_back(&c);
      rows += dof;
      rep.chi2 += g.chi2;
    } else {
      ++rep.features_rejected;
    }
  }
  rep.features_used = static_cast<int>(accepted.size());
  rep.residual_dim = rows;
  if (accepted.empty()) return rep;

  Eigen::MatrixXd H(rows, fs.dim());
  Eigen::VectorXd r(rows);
  int at = 0;
  for (const Projected* c : accepted) {
    H.middleRows(at, c->r.size()) = c->H;
    r.segment(at, c->r.size()) = c->r;
    at += static_cast<int>(c->r.size());
  }
  ekf_update(fs, P, H, r);
  rep.accepted = true;

  double post = 0.0;
  for (const Projected* c : accepted) {
    const LinearizedFeature lin = relinearize(*c);
    post += c->N.size() ? (c->N.transpose() * lin.r).squaredNorm() : lin.r.squaredNorm();
  }
  rep.post_residual_norm = std::sqrt(post);
  return rep;
}

bool project_out(Projected& p, const LinearizedFeature& lin) {
  if (lin.r.size() <= 3) return false;
  p.N = left_nullspace(lin.Hf);
  p.H = p.N.transpose() * lin.Hx;
  p.r = p.N.transpose() * lin.r;
  return true;
}

}  // namespace

UpdateReport captured_update(FilterState& fs, Covariance& P, const std::vector<FeatureTrack>& tracks,
                             const UpdateOptions& opt) {
  if (P.rows() != fs.dim()) throw InvalidArgument("covariance size does not match state");
  std::vector<Projected> candidates;
  int failed = 0;
  for (const auto& track : tracks) {
    try {
      Projected p;
      p.track = &track;
      p.point = triangulate(track, fs, opt.camera, opt.triangulation);
      if (!project_out(p, linearize_captured(track, fs, p.point, opt))) {
        ++failed;
        continue;
      }
      candidates.push_back(std::move(p));
    } catch (const Error&) {
      ++failed;
    }
  }
  return gate_and_update(fs, P, candidates, failed, opt, [&](const Projected& c) {
    return linearize_captured(*c.track, fs, c.point, opt);
  });
}

double select_closest_clone(const FilterState& fs, double render_start_ts) {
  if (fs.clones.empty()) throw InvalidArgument("no clones in the window");
  double best_t = fs.clones.front().t;
  double best_d = std::abs(best_t - render_start_ts);
  for (const auto& c : fs.clones) {
    const double d = std::abs(c.t - render_start_ts);
    if (d < best_d - 1e-12) {
      best_d = d;
      best_t = c.t;
    }
  }
  return best_t;
}

InflatedNoise inflate_noise(const Mat2& base_cov, const Mat23& J_theta, const Mat23& J_p, const Mat6& sigma_init) {
  const double scale = std::max(1.0, sigma_init.cwiseAbs().maxCoeff());
  if ((sigma_init - sigma_init.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("initialization covariance is not symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Mat6>(sigma_init, Eigen::EigenvaluesOnly).eigenvalues()(0) < -1e-12 * scale) {
    throw InvalidArgument("initialization covariance is not PSD");
  }
  Eigen::Matrix<double, 2, 6> J;
  J << J_theta, J_p;
  Mat2 R = base_cov + J * sigma_init * J.transpose();
  InflatedNoise out;
  out.cov = 0.5 * (R + R.transpose());
  Eigen::SelfAdjointEigenSolver<Mat2> es(out.cov);
  if (es.eigenvalues()(0) < 0.0) {
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    out.cov = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    out.repaired = true;
  }
  return out;
}

UpdateReport rendered_update(FilterState& fs, Covariance& P, const std::vector<FeatureTrack>& tracks,
                             const UpdateOptions& opt) {
  if (P.rows() != fs.dim()) throw InvalidArgument("covariance size does not match state");
  std::vector<Projected> candidates;
  int failed = 0;
  for (const auto& track : tracks) {
    try {
      Projected p;
      p.track = &track;
      if (track.anchor_known && track.anchor_W) {
        p.point = *track.anchor_W;
        const LinearizedFeature lin = linearize_rendered(track, fs, p.point, opt);
        if (lin.r.size() == 0) {
          ++failed;
          continue;
        }
        p.H = lin.Hx;
        p.r = lin.r;
      } else {
        p.point = triangulate(track_views(track, fs, opt.camera, true), opt.triangulation);
        if (!project_out(p, linearize_rendered(track, fs, p.point, opt))) {
          ++failed;
          continue;
        }
      }
      candidates.push_back(std::move(p));
    } catch (const Error&) {
      ++failed;
    }
  }
  return gate_and_update(fs, P, candidates, failed, opt, [&](const Projected& c) {
    return linearize_rendered(*c.track, fs, c.point, opt);
  });
}

}  // namespace mapvio
