#include "mapvio/csv_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "mapvio/error.hpp"

namespace mapvio {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.find_last_not_of(" \r") + 1) {
    throw FormatError("line " + std::to_string(line) + ": not a number '" + s + "'");
  }
  return v;
}

// Calls row(cells, line_no) for every data line after checking the header.
template <typename F>
void read_rows(std::istream& in, const std::string& header, std::size_t columns, F&& row) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV, expected header '" + header + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw FormatError("unexpected CSV header '" + line + "'");
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != columns) {
      throw FormatError("line " + std::to_string(n) + ": expected " + std::to_string(columns) + " columns");
    }
    row(cells, n);
  }
}

const char* source_name(FeatureSource s) { return s == FeatureSource::kCaptured ? "captured" : "rendered"; }

}  // namespace

void write_imu_csv(std::ostream& out, const std::vector<ImuSample>& samples) {
  out << "t,wx,wy,wz,ax,ay,az\n" << std::setprecision(17);
  for (const auto& s : samples) {
    out << s.t << ',' << s.omega_m.x() << ',' << s.omega_m.y() << ',' << s.omega_m.z() << ',' << s.accel_m.x() << ','
        << s.accel_m.y() << ',' << s.accel_m.z() << '\n';
  }
}

std::vector<ImuSample> read_imu_csv(std::istream& in) {
  std::vector<ImuSample> out;
  read_rows(in, "t,wx,wy,wz,ax,ay,az", 7, [&](const std::vector<std::string>& c, int n) {
    ImuSample s;
    s.t = to_double(c[0], n);
    for (int i = 0; i < 3; ++i) {
      s.omega_m[i] = to_double(c[1 + i], n);
      s.accel_m[i] = to_double(c[4 + i], n);
    }
    if (!out.empty() && !(s.t > out.back().t)) {
      throw FormatError("line " + std::to_string(n) + ": IMU timestamps must increase");
    }
    out.push_back(s);
  });
  return out;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  out << "t,feature_id,u,v,source\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.t << ',' << r.feature_id << ',' << r.uv.x() << ',' << r.uv.y() << ',' << source_name(r.source) << '\n';
  }
}

std::vector<FeatureRow> read_feature_csv(std::istream& in) {
  std::vector<FeatureRow> out;
  read_rows(in, "t,feature_id,u,v,source", 5, [&](const std::vector<std::string>& c, int n) {
    FeatureRow r;
    r.t = to_double(c[0], n);
    const double id = to_double(c[1], n);
    if (id < 0.0 || id != static_cast<double>(static_cast<std::size_t>(id))) {
      throw FormatError("line " + std::to_string(n) + ": bad feature id");
    }
    r.feature_id = static_cast<std::size_t>(id);
    r.uv = {to_double(c[2], n), to_double(c[3], n)};
    if (c[4] == "captured") {
      r.source = FeatureSource::kCaptured;
    } else if (c[4] == "rendered") {
      r.source = FeatureSource::kRendered;
    } else {
      throw FormatError("line " + std::to_string(n) + ": unknown source '" + c[4] + "'");
    }
    out.push_back(r);
  });
  return out;
}

std::vector<FeatureRow> feature_rows(const std::vector<CameraFrame>& frames) {
  std::vector<FeatureRow> rows;
  for (const auto& f : frames) {
    for (const auto& o : f.obs) rows.push_back({f.t, o.id, o.uv, FeatureSource::kCaptured});
  }
  return rows;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryEntry>& traj) {
  out << "t,qx,qy,qz,qw,px,py,pz\n" << std::setprecision(17);
  for (const auto& e : traj) {
    const UnitQuaternion q = rot_to_quat(e.R_GtoI);
    out << e.t << ',' << q.x() << ',' << q.y() << ',' << q.z() << ',' << q.w() << ',' << e.p_I_in_G.x() << ','
        << e.p_I_in_G.y() << ',' << e.p_I_in_G.z() << '\n';
  }
}

std::vector<TrajectoryEntry> read_trajectory_csv(std::istream& in) {
  std::vector<TrajectoryEntry> out;
  read_rows(in, "t,qx,qy,qz,qw,px,py,pz", 8, [&](const std::vector<std::string>& c, int n) {
    TrajectoryEntry e;
    e.t = to_double(c[0], n);
    try {
      e.R_GtoI = quat_to_rot(UnitQuaternion(to_double(c[1], n), to_double(c[2], n), to_double(c[3], n),
                                            to_double(c[4], n)));
    } catch (const InvalidArgument& err) {
      throw FormatError("line " + std::to_string(n) + ": " + err.what());
    }
    e.p_I_in_G = {to_double(c[5], n), to_double(c[6], n), to_double(c[7], n)};
    out.push_back(e);
  });
  return out;
}

void write_update_log(std::ostream& out, const std::vector<UpdateLogRow>& rows) {
  out << "t,source,residual_dim,chi2,accepted,post_residual_norm,features_used,features_rejected,features_failed\n"
      << std::setprecision(17);
  for (const auto& r : rows) {
    const UpdateReport& u = r.report;
    out << r.t << ',' << source_name(r.source) << ',' << u.residual_dim << ',' << u.chi2 << ',' << (u.accepted ? 1 : 0)
        << ',' << u.post_residual_norm << ',' << u.features_used << ',' << u.features_rejected << ','
        << u.features_failed << '\n';
  }
}

void write_gnuplot_dat(std::ostream& out, const std::vector<TrajectoryEntry>& est,
                       const std::vector<TrajectoryEntry>& gt) {
  if (est.size() != gt.size()) throw InvalidArgument("trajectories must be sampled at the same times");
  out << "# t est_x est_y est_z gt_x gt_y gt_z\n" << std::setprecision(12);
  for (std::size_t i = 0; i < est.size(); ++i) {
    out << est[i].t << ' ' << est[i].p_I_in_G.x() << ' ' << est[i].p_I_in_G.y() << ' ' << est[i].p_I_in_G.z() << ' '
        << gt[i].p_I_in_G.x() << ' ' << gt[i].p_I_in_G.y() << ' ' << gt[i].p_I_in_G.z() << '\n';
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << content;
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace mapvio
