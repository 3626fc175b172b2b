#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>

#include "nretina/plane.hpp"

namespace nretina::io {

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

struct PgmImage {
  int maxval = 255;
  Plane<std::uint16_t> pixels;
  std::string comment;
};

/// Reads the next P5 image from `in`; std::nullopt at a clean end of input.
/// Throws TruncatedVideo / UnsupportedDepth / VideoError.
std::optional<PgmImage> read_pgm(std::istream& in);

std::string encode_pgm(const Plane<std::uint16_t>& pixels, int maxval,
                       std::string_view comment = {});

}  // namespace nretina::io
