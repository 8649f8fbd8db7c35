#pragma once

#include <iosfwd>
#include <string>

#include "mapvio/render.hpp"

namespace mapvio {

inline constexpr int kMapFormatVersion = 1;

/// Text map format; see docs/formats.md. Throws FormatError with the line
/// number on malformed input or an unsupported version.
MapModel read_map(std::istream& in);
void write_map(std::ostream& out, const MapModel& map);
MapModel load_map(const std::string& path);
void save_map(const std::string& path, const MapModel& map);

}  // namespace mapvio
