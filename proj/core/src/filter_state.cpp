#include "mapvio/filter_state.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "mapvio/error.hpp"

namespace mapvio {

int FilterState::dim() const {
  return 15 + 6 * static_cast<int>(clones.size()) + 3 * static_cast<int>(slam_features.size()) +
         (calib_active ? 6 : 0) + (td_active ? 1 : 0);
}

int FilterState::slam_offset(std::size_t i) const {
  return 15 + 6 * static_cast<int>(clones.size()) + 3 * static_cast<int>(i);
}

int FilterState::calib_offset() const {
  if (!calib_active) return -1;
  return 15 + 6 * static_cast<int>(clones.size()) + 3 * static_cast<int>(slam_features.size());
}

int FilterState::td_offset() const {
  if (!td_active) return -1;
  return dim() - 1;
}

std::optional<std::size_t> FilterState::find_clone(double t) const {
  for (std::size_t i = 0; i < clones.size(); ++i) {
    if (std::abs(clones[i].t - t) < 1e-9) return i;
  }
  return std::nullopt;
}

const CloneEntry& FilterState::clone_at(double t) const {
  const auto i = find_clone(t);
  if (!i) throw InvalidArgument("no clone at the requested timestamp");
  return clones[*i];
}

Covariance select_covariance(const Covariance& P, const std::vector<int>& index) {
  const int n = static_cast<int>(index.size());
  Covariance out(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) out(i, j) = P(index[i], index[j]);
  }
  return out;
}

void clone_state(FilterState& fs, Covariance& P, double t) {
  if (P.rows() != fs.dim() || P.cols() != fs.dim()) throw InvalidArgument("covariance size does not match state");
  if (fs.clones.size() >= fs.max_clones) throw InvalidArgument("clone window overflow; marginalize first");
  if (!fs.clones.empty() && !(t > fs.clones.back().t)) {
    throw InvalidArgument("clone timestamps must be strictly increasing");
  }
  const int old_dim = fs.dim();
  const int at = fs.clone_offset(fs.clones.size());
  std::vector<int> index;
  index.reserve(old_dim + 6);
  for (int i = 0; i < at; ++i) index.push_back(i);
  for (int i = 0; i < 6; ++i) index.push_back(imu_index::kTheta + i);  // dtheta, dp are contiguous
  for (int i = at; i < old_dim; ++i) index.push_back(i);
  P = select_covariance(P, index);
  fs.clones.push_back({t, fs.imu.R_GtoI, fs.imu.p_I_in_G});
}

void marginalize(FilterState& fs, Covariance& P, MarginalizePolicy policy) {
  if (policy != MarginalizePolicy::kOldest) throw InvalidArgument("unknown marginalization policy");
  if (fs.clones.empty()) throw InvalidArgument("no clone to marginalize");
  const int dim = fs.dim();
  const int drop = fs.clone_offset(0);
  std::vector<int> index;
  index.reserve(dim - 6);
  for (int i = 0; i < dim; ++i) {
    if (i < drop || i >= drop + 6) index.push_back(i);
  }
  P = select_covariance(P, index);
  fs.clones.erase(fs.clones.begin());
}

void apply_correction(FilterState& fs, const Eigen::Ref<const Eigen::VectorXd>& dx) {
  if (dx.size() != fs.dim()) throw InvalidArgument("correction size does not match state");
  using namespace imu_index;
  fs.imu.R_GtoI = so3_exp(-dx.segment<3>(kTheta)) * fs.imu.R_GtoI;
  fs.imu.p_I_in_G += dx.segment<3>(kPos);
  fs.imu.v_I_in_G += dx.segment<3>(kVel);
  fs.imu.bg += dx.segment<3>(kBg);
  fs.imu.ba += dx.segment<3>(kBa);
  for (std::size_t i = 0; i < fs.clones.size(); ++i) {
    const int o = fs.clone_offset(i);
    fs.clones[i].R_GtoI = so3_exp(-dx.segment<3>(o)) * fs.clones[i].R_GtoI;
    fs.clones[i].p_I_in_G += dx.segment<3>(o + 3);
  }
  for (std::size_t i = 0; i < fs.slam_features.size(); ++i) {
    fs.slam_features[i] += dx.segment<3>(fs.slam_offset(i));
  }
  if (fs.calib_active) {
    const int o = fs.calib_offset();
    fs.calib.R_ItoC = so3_exp(-dx.segment<3>(o)) * fs.calib.R_ItoC;
    fs.calib.p_I_in_C += dx.segment<3>(o + 3);
  }
  if (fs.td_active) fs.t_d += dx(fs.td_offset());
}

double asymmetry(const Covariance& P) { return (P - P.transpose()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const Covariance& P) {
  Eigen::SelfAdjointEigenSolver<Covariance> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace mapvio
