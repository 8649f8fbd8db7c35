#include "mapvio/map_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "mapvio/error.hpp"

namespace mapvio {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line split into a stream.
  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    fail(std::string("unexpected end of file, expected ") + what);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("map line " + std::to_string(line_no_) + ": " + msg);
  }

  void expect_keyword(std::istringstream& ss, const std::string& key) const {
    std::string k;
    if (!(ss >> k) || k != key) fail("expected '" + key + "'");
  }

  template <typename... T>
  void read(std::istringstream& ss, T&... values) const {
    if (!((ss >> values) && ...)) fail("malformed values");
    std::string extra;
    if (ss >> extra) fail("trailing token '" + extra + "'");
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

MapModel read_map(std::istream& in) {
  LineReader r(in);
  MapModel m;

  auto header = r.next("header");
  r.expect_keyword(header, "mapvio-map");
  int version = 0;
  r.read(header, version);
  if (version != kMapFormatVersion) r.fail("unsupported map version " + std::to_string(version));

  auto cam = r.next("camera");
  r.expect_keyword(cam, "camera");
  r.read(cam, m.camera.width, m.camera.height, m.camera.fx, m.camera.fy, m.camera.cx, m.camera.cy);

  auto scene = r.next("scene");
  r.expect_keyword(scene, "scene");
  r.read(scene, m.scene.table_half, m.scene.wall_dist);

  auto lat = r.next("latency");
  r.expect_keyword(lat, "latency");
  r.read(lat, m.latency);

  auto margin = r.next("change_margin");
  r.expect_keyword(margin, "change_margin");
  r.read(margin, m.change_margin);

  auto count = r.next("landmarks");
  r.expect_keyword(count, "landmarks");
  std::size_t n = 0;
  r.read(count, n);
  m.landmarks.resize(n);
  for (auto& lm : m.landmarks) {
    auto row = r.next("landmark");
    r.read(row, lm.id, lm.p_W.x(), lm.p_W.y(), lm.p_W.z(), lm.amplitude, lm.sigma_px);
  }

  auto changed = r.next("changed");
  r.expect_keyword(changed, "changed");
  std::size_t k = 0;
  if (!(changed >> k)) r.fail("malformed changed count");
  m.changed.resize(k);
  for (auto& id : m.changed) {
    if (!(changed >> id)) r.fail("missing changed id");
  }
  std::string extra;
  if (changed >> extra) r.fail("trailing token '" + extra + "'");

  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid map: ") + e.what());
  }
  return m;
}

void write_map(std::ostream& out, const MapModel& m) {
  out << std::setprecision(17);
  out << "mapvio-map " << kMapFormatVersion << '\n';
  out << "camera " << m.camera.width << ' ' << m.camera.height << ' ' << m.camera.fx << ' ' << m.camera.fy << ' '
      << m.camera.cx << ' ' << m.camera.cy << '\n';
  out << "scene " << m.scene.table_half << ' ' << m.scene.wall_dist << '\n';
  out << "latency " << m.latency << '\n';
  out << "change_margin " << m.change_margin << '\n';
  out << "landmarks " << m.landmarks.size() << '\n';
  for (const auto& lm : m.landmarks) {
    out << lm.id << ' ' << lm.p_W.x() << ' ' << lm.p_W.y() << ' ' << lm.p_W.z() << ' ' << lm.amplitude << ' '
        << lm.sigma_px << '\n';
  }
  out << "changed " << m.changed.size();
  for (auto id : m.changed) out << ' ' << id;
  out << '\n';
}

MapModel load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open map file " + path);
  return read_map(in);
}

void save_map(const std::string& path, const MapModel& map) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write map file " + path);
  write_map(out, map);
}

}  // namespace mapvio
