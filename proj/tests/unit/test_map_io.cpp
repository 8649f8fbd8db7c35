#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "mapvio/error.hpp"
#include "mapvio/map_io.hpp"
#include "mapvio/sim_world.hpp"

using namespace mapvio;

namespace {

MapModel sample_map() {
  MapModel m;
  m.landmarks = generate_landmarks(m.scene, 9, LandmarkLayout{20, 10});
  m.changed = {2, 5, 7};
  m.latency = 0.15;
  return m;
}

std::string expect_format_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_map(in);
  } catch (const FormatError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no FormatError for:\n" << text;
  return {};
}

}  // namespace

TEST(MapIo, RoundTripIsExact) {
  const MapModel m = sample_map();
  std::stringstream ss;
  write_map(ss, m);
  const MapModel back = read_map(ss);
  ASSERT_EQ(back.landmarks.size(), m.landmarks.size());
  for (std::size_t i = 0; i < m.landmarks.size(); ++i) {
    EXPECT_EQ(back.landmarks[i].id, m.landmarks[i].id);
    EXPECT_EQ(back.landmarks[i].p_W, m.landmarks[i].p_W);
    EXPECT_EQ(back.landmarks[i].amplitude, m.landmarks[i].amplitude);
    EXPECT_EQ(back.landmarks[i].sigma_px, m.landmarks[i].sigma_px);
  }
  EXPECT_EQ(back.changed, m.changed);
  EXPECT_EQ(back.latency, m.latency);
  EXPECT_EQ(back.camera.fx, m.camera.fx);
  std::stringstream again;
  write_map(again, back);
  std::stringstream first;
  write_map(first, m);
  EXPECT_EQ(again.str(), first.str());
}

TEST(MapIo, CommentsAndBlankLines) {
  std::istringstream in(
      "# prior map\nmapvio-map 1\n\ncamera 320 240 250 250 159.5 119.5  # intrinsics\n"
      "scene 0.5 3\nlatency 0.2\nchange_margin 0.06\nlandmarks 1\n0 0.1 0.2 0 0.4 1.8\nchanged 0\n");
  const MapModel m = read_map(in);
  ASSERT_EQ(m.landmarks.size(), 1u);
  EXPECT_DOUBLE_EQ(m.landmarks[0].p_W.y(), 0.2);
}

TEST(MapIo, ErrorsNameTheLine) {
  EXPECT_NE(expect_format_error("mapvio-map 2\n").find("line 1"), std::string::npos);
  EXPECT_NE(expect_format_error("mapvio-map 1\ncamera 320 240 250\n").find("line 2"), std::string::npos);
  expect_format_error("mapvio-map 1\ncamera 320 240 250 250 159.5 119.5\nscene 0.5 3\nlatency 0.2\n");
  expect_format_error(
      "mapvio-map 1\ncamera 320 240 250 250 159.5 119.5\nscene 0.5 3\nlatency 0.2\nchange_margin 0.06\n"
      "landmarks 1\n0 0.1 0.2 0 0.4 0\nchanged 0\n");
  expect_format_error(
      "mapvio-map 1\ncamera 320 240 250 250 159.5 119.5\nscene 0.5 3\nlatency 0.2\nchange_margin 0.06\n"
      "landmarks 0\nchanged 0 extra\n");
}

TEST(MapIo, FileHelpers) {
  const auto path = std::filesystem::temp_directory_path() / "mapvio_test_map.txt";
  save_map(path.string(), sample_map());
  EXPECT_EQ(load_map(path.string()).landmarks.size(), 30u);
  std::filesystem::remove(path);
  EXPECT_THROW(load_map("/nonexistent/map.txt"), FormatError);
}
