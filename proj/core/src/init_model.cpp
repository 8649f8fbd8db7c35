#include "mapvio/init_model.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "mapvio/error.hpp"

namespace mapvio {

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.W.size() + l.b.size());
  return n;
}

void MlpModel::validate() const {
  if (layers.empty()) throw InvalidArgument("model has no layers");
  if (input_width <= 0 || input_height <= 0) throw InvalidArgument("invalid model input size");
  Eigen::Index dim = input_dim();
  for (const auto& l : layers) {
    if (l.W.cols() != dim || l.b.size() != l.W.rows()) throw InvalidArgument("inconsistent layer dimensions");
    if (!l.W.allFinite() || !l.b.allFinite()) throw InvalidArgument("non-finite model parameter");
    dim = l.W.rows();
  }
  if (dim != 6) throw InvalidArgument("model output must be 6-dimensional");
  if (input_mean.size() != 0 && input_mean.size() != input_dim()) throw InvalidArgument("input mean size mismatch");
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) throw InvalidArgument("invalid input scale");
}

MlpModel make_mlp(int input_width, int input_height, int hidden, int depth, std::uint64_t seed, double output_scale) {
  if (input_width <= 0 || input_height <= 0 || hidden <= 0 || depth < 1) {
    throw InvalidArgument("invalid MLP shape");
  }
  MlpModel m;
  m.input_width = input_width;
  m.input_height = input_height;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  int in = m.input_dim();
  for (int i = 0; i < depth; ++i) {
    const bool last = i == depth - 1;
    const int out = last ? 6 : hidden;
    DenseLayer l;
    l.W.resize(out, in);
    const double s = std::sqrt(2.0 / in) * (last ? output_scale : 1.0);
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) l.W(r, c) = s * n01(rng);
    l.b = Eigen::VectorXd::Zero(out);
    l.act = last ? Activation::kLinear : Activation::kRelu;
    m.layers.push_back(std::move(l));
    in = out;
  }
  return m;
}

Eigen::VectorXd normalize_input(const MlpModel& m, const ImagePlane& img) {
  if (img.width() != m.input_width || img.height() != m.input_height) {
    throw InvalidArgument("image size does not match the model input");
  }
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(img.data().data(), m.input_dim());
  if (m.input_mean.size()) x -= m.input_mean;
  return x * m.input_scale;
}

namespace {

Eigen::MatrixXd stack_inputs(const MlpModel& m, std::span<const ImagePlane* const> imgs) {
  Eigen::MatrixXd X(m.input_dim(), static_cast<Eigen::Index>(imgs.size()));
  for (std::size_t i = 0; i < imgs.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = normalize_input(m, *imgs[i]);
  return X;
}

void activate(Eigen::MatrixXd& Z, Activation a) {
  if (a == Activation::kRelu) Z = Z.cwiseMax(0.0);
}

// Forward pass keeping every layer's output (acts[0] is the input).
std::vector<Eigen::MatrixXd> forward_all(const MlpModel& m, Eigen::MatrixXd X) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(m.layers.size() + 1);
  acts.push_back(std::move(X));
  for (const auto& l : m.layers) {
    Eigen::MatrixXd Z = l.W * acts.back();
    Z.colwise() += l.b;
    activate(Z, l.act);
    acts.push_back(std::move(Z));
  }
  return acts;
}

Twist twist_of(const Eigen::MatrixXd& Y, Eigen::Index c) {
  Vec6 v = Y.col(c);
  return Twist::from_vector(v);
}

}  // namespace

Twist forward(const MlpModel& m, const ImagePlane& img) {
  const ImagePlane* p = &img;
  const auto acts = forward_all(m, stack_inputs(m, std::span<const ImagePlane* const>(&p, 1)));
  return twist_of(acts.back(), 0);
}

std::vector<Twist> forward_batch(const MlpModel& m, const std::vector<ImagePlane>& imgs) {
  std::vector<const ImagePlane*> ptrs;
  for (const auto& i : imgs) ptrs.push_back(&i);
  const auto acts = forward_all(m, stack_inputs(m, ptrs));
  std::vector<Twist> out;
  for (Eigen::Index c = 0; c < acts.back().cols(); ++c) out.push_back(twist_of(acts.back(), c));
  return out;
}

Pose predicted_pose(const MlpModel& m, const Twist& xi) { return se3_exp(xi) * m.anchor; }

LossAndGrad loss_and_grad(const MlpModel& m, std::span<const TrainSample> batch, const MetricParam& a) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  std::vector<const ImagePlane*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s.image);
  const auto acts = forward_all(m, stack_inputs(m, ptrs));
  const Eigen::MatrixXd& Y = acts.back();
  const Mat6 B = metric_gram(a);

  LossAndGrad out;
  const Eigen::Index n = Y.cols();
  Eigen::MatrixXd dY = Eigen::MatrixXd::Zero(6, n);
  std::vector<bool> used(n, false);
  int count = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const Twist xi = twist_of(Y, c);
    const Pose& G = batch[c].gt_pose;
    Vec6 y;
    Mat6 Jr_inv;
    try {
      y = se3_log((se3_exp(xi) * m.anchor).inverse() * G).vector();
      Jr_inv = se3_right_jacobian(Twist::from_vector(y)).inverse();
    } catch (const DegenerateLog&) {
      ++out.excluded;
      continue;
    }
    // log(P^-1 G) with P = exp(xi) A: a change d of xi moves it by
    // -Jr(y)^-1 Ad(G^-1) Jl(xi) d.
    const Mat6 dy = -Jr_inv * se3_adjoint(G.inverse()) * se3_left_jacobian(xi);
    out.loss += y.dot(B * y);
    dY.col(c) = 2.0 * dy.transpose() * (B * y);
    used[c] = true;
    ++count;
  }
  const int L = static_cast<int>(m.layers.size());
  out.grad.dW.resize(L);
  out.grad.db.resize(L);
  if (count == 0) {
    for (int l = 0; l < L; ++l) {
      out.grad.dW[l] = Eigen::MatrixXd::Zero(m.layers[l].W.rows(), m.layers[l].W.cols());
      out.grad.db[l] = Eigen::VectorXd::Zero(m.layers[l].b.size());
    }
    return out;
  }
  out.loss /= count;
  Eigen::MatrixXd delta = dY / static_cast<double>(count);
  for (int l = L - 1; l >= 0; --l) {
    const DenseLayer& layer = m.layers[l];
    if (layer.act == Activation::kRelu) delta = delta.cwiseProduct((acts[l + 1].array() > 0.0).cast<double>().matrix());
    out.grad.dW[l] = delta * acts[l].transpose();
    out.grad.db[l] = delta.rowwise().sum();
    if (l > 0) delta = layer.W.transpose() * delta;
  }
  return out;
}

double dataset_loss(const MlpModel& m, std::span<const TrainSample> data, const MetricParam& a) {
  double total = 0.0;
  int count = 0;
  const std::size_t chunk = 256;
  for (std::size_t i = 0; i < data.size(); i += chunk) {
    const auto part = data.subspan(i, std::min(chunk, data.size() - i));
    std::vector<ImagePlane> imgs;
    for (const auto& s : part) imgs.push_back(s.image);
    const auto xs = forward_batch(m, imgs);
    for (std::size_t k = 0; k < part.size(); ++k) {
      try {
        total += geodesic_dist_sq(predicted_pose(m, xs[k]), part[k].gt_pose, a);
        ++count;
      } catch (const DegenerateLog&) {
      }
    }
  }
  return count ? total / count : 0.0;
}

Eigen::VectorXd parameters(const MlpModel& m) {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(m.parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : m.layers) {
    theta.segment(k, l.W.size()) = Eigen::Map<const Eigen::VectorXd>(l.W.data(), l.W.size());
    k += l.W.size();
    theta.segment(k, l.b.size()) = l.b;
    k += l.b.size();
  }
  return theta;
}

void set_parameters(MlpModel& m, const Eigen::VectorXd& theta) {
  if (theta.size() != static_cast<Eigen::Index>(m.parameter_count())) throw InvalidArgument("parameter size mismatch");
  Eigen::Index k = 0;
  for (auto& l : m.layers) {
    Eigen::Map<Eigen::VectorXd>(l.W.data(), l.W.size()) = theta.segment(k, l.W.size());
    k += l.W.size();
    l.b = theta.segment(k, l.b.size());
    k += l.b.size();
  }
}

Eigen::VectorXd flatten(const Gradient& g) {
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < g.dW.size(); ++i) n += g.dW[i].size() + g.db[i].size();
  Eigen::VectorXd out(n);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < g.dW.size(); ++i) {
    out.segment(k, g.dW[i].size()) = Eigen::Map<const Eigen::VectorXd>(g.dW[i].data(), g.dW[i].size());
    k += g.dW[i].size();
    out.segment(k, g.db[i].size()) = g.db[i];
    k += g.db[i].size();
  }
  return out;
}

Pose mean_pose(std::span<const TrainSample> data) {
  if (data.empty()) throw InvalidArgument("mean of an empty set");
  Mat3 Rs = Mat3::Zero();
  Vec3 t = Vec3::Zero();
  for (const auto& s : data) {
    Rs += s.gt_pose.rotation;
    t += s.gt_pose.translation;
  }
  Eigen::JacobiSVD<Mat3> svd(Rs, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return {svd.matrixU() * D * svd.matrixV().transpose(), t / static_cast<double>(data.size())};
}

TrainResult train(std::span<const TrainSample> data, const TrainConfig& cfg, MlpModel init) {
  if (data.size() < 2) throw InvalidArgument("training needs at least two samples");
  if (cfg.epochs < 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0) || cfg.momentum < 0.0 ||
      cfg.momentum >= 1.0) {
    throw InvalidArgument("invalid training configuration");
  }
  TrainResult res;
  MlpModel& m = res.model;
  m = std::move(init);
  if (cfg.fit_input_norm) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.input_dim());
    for (const auto& s : data) mean += Eigen::Map<const Eigen::VectorXd>(s.image.data().data(), m.input_dim());
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const auto& s : data) {
      var += (Eigen::Map<const Eigen::VectorXd>(s.image.data().data(), m.input_dim()) - mean).squaredNorm();
    }
    var /= static_cast<double>(data.size()) * m.input_dim();
    m.input_mean = mean;
    m.input_scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  }
  if (cfg.fit_anchor) m.anchor = mean_pose(data);
  m.validate();

  res.initial_loss = dataset_loss(m, data, m.metric);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::MatrixXd> vW(m.layers.size());
  std::vector<Eigen::VectorXd> vb(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    vW[l] = Eigen::MatrixXd::Zero(m.layers[l].W.rows(), m.layers[l].W.cols());
    vb[l] = Eigen::VectorXd::Zero(m.layers[l].b.size());
  }
  double lr = cfg.learning_rate;
  std::vector<TrainSample> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    int batches = 0;
    for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
      batch.clear();
      for (std::size_t k = i; k < std::min(order.size(), i + cfg.batch_size); ++k) batch.push_back(data[order[k]]);
      const LossAndGrad lg = loss_and_grad(m, batch, m.metric);
      res.excluded += lg.excluded;
      if (!std::isfinite(lg.loss)) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch));
      }
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        vW[l] = cfg.momentum * vW[l] - lr * lg.grad.dW[l];
        vb[l] = cfg.momentum * vb[l] - lr * lg.grad.db[l];
        m.layers[l].W += vW[l];
        m.layers[l].b += vb[l];
      }
      sum += lg.loss;
      ++batches;
    }
    res.epoch_loss.push_back(sum / batches);
    lr *= cfg.lr_decay;
  }
  res.final_loss = dataset_loss(m, data, m.metric);
  if (!std::isfinite(res.final_loss)) throw NumericalError("training diverged at epoch " + std::to_string(cfg.epochs));
  return res;
}

Pose relocalize(const MlpModel& m, const ImagePlane& img) { return predicted_pose(m, forward(m, img)); }

Pose compose_first_imu(const Pose& T_W_C0, const Pose& T_C0_I0) { return T_W_C0 * T_C0_I0; }

BiasBootstrap bootstrap_vel_bias(std::span<const ImuSample> window, const Mat3& R_GtoI0, const Vec3& gravity) {
  if (window.empty()) throw InvalidArgument("empty IMU window");
  Vec3 g = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  for (const auto& s : window) {
    g += s.omega_m;
    a += s.accel_m;
  }
  const double n = static_cast<double>(window.size());
  BiasBootstrap b;
  b.bg0 = g / n;
  b.ba0 = a / n + R_GtoI0 * gravity;
  return b;
}

Vec6 pose_error(const Pose& est, const Pose& truth) {
  const Pose E = est * truth.inverse();
  Vec6 e;
  e.head<3>() = so3_log(E.rotation);
  e.tail<3>() = E.translation;
  return e;
}

// ---------------------------------------------------------------------------
// Checkpoint

namespace {

constexpr char kMagic[8] = {'M', 'V', 'I', 'O', 'M', 'L', 'P', '\0'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated checkpoint");
  return v;
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
  if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw FormatError("truncated checkpoint");
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const MlpModel& m) {
  m.validate();
  out.write(kMagic, sizeof(kMagic));
  put(out, kCheckpointVersion);
  put(out, static_cast<std::int32_t>(m.input_width));
  put(out, static_cast<std::int32_t>(m.input_height));
  put(out, static_cast<std::uint32_t>(m.layers.size()));
  for (const auto& l : m.layers) {
    put(out, static_cast<std::int32_t>(l.W.rows()));
    put(out, static_cast<std::int32_t>(l.W.cols()));
    put(out, static_cast<std::uint8_t>(l.act));
  }
  put_doubles(out, m.metric.a().data(), 3);
  const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> R = m.anchor.rotation;
  put_doubles(out, R.data(), 9);
  put_doubles(out, m.anchor.translation.data(), 3);
  put(out, m.input_scale);
  put_doubles(out, m.validation_ms.data(), 6);
  put(out, static_cast<std::uint8_t>(m.input_mean.size() ? 1 : 0));
  if (m.input_mean.size()) put_doubles(out, m.input_mean.data(), m.input_mean.size());
  for (const auto& l : m.layers) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> W = l.W;
    put_doubles(out, W.data(), W.size());
    put_doubles(out, l.b.data(), l.b.size());
  }
  if (!out) throw FormatError("failed to write checkpoint");
}

MlpModel read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw FormatError("not a model checkpoint");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  MlpModel m;
  m.input_width = get<std::int32_t>(in);
  m.input_height = get<std::int32_t>(in);
  const auto n = get<std::uint32_t>(in);
  if (n == 0 || n > 64 || m.input_width <= 0 || m.input_height <= 0 || m.input_width > 4096 ||
      m.input_height > 4096) {
    throw FormatError("implausible checkpoint header");
  }
  m.layers.resize(n);
  for (auto& l : m.layers) {
    const auto rows = get<std::int32_t>(in);
    const auto cols = get<std::int32_t>(in);
    const auto act = get<std::uint8_t>(in);
    if (rows <= 0 || cols <= 0 || rows > (1 << 16) || cols > (1 << 24) || act > 1) {
      throw FormatError("implausible layer header");
    }
    l.W.resize(rows, cols);
    l.b.resize(rows);
    l.act = static_cast<Activation>(act);
  }
  Vec3 a;
  get_doubles(in, a.data(), 3);
  Eigen::Matrix<double, 3, 3, Eigen::RowMajor> R;
  get_doubles(in, R.data(), 9);
  get_doubles(in, m.anchor.translation.data(), 3);
  m.anchor.rotation = R;
  m.input_scale = get<double>(in);
  get_doubles(in, m.validation_ms.data(), 6);
  if (get<std::uint8_t>(in)) {
    m.input_mean.resize(m.input_dim());
    get_doubles(in, m.input_mean.data(), m.input_mean.size());
  }
  for (auto& l : m.layers) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> W(l.W.rows(), l.W.cols());
    get_doubles(in, W.data(), W.size());
    l.W = W;
    get_doubles(in, l.b.data(), l.b.size());
  }
  try {
    m.metric = MetricParam(a);
    m.validate();
    if (!is_rotation(m.anchor.rotation, 1e-9)) throw InvalidArgument("anchor is not a rotation");
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
  return m;
}

void save_checkpoint(const std::string& path, const MlpModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path);
  write_checkpoint(out, m);
}

MlpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  return read_checkpoint(in);
}

}  // namespace mapvio
