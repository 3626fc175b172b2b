#include "nretina/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nretina/stimulus.hpp"

namespace nretina::io {

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

// Skips whitespace and '#' comments; the last comment seen is kept.
void skip_space(std::istream& in, std::string& comment) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::getline(in, comment);
      comment.erase(0, 1);
      while (!comment.empty() && comment.front() == ' ') comment.erase(0, 1);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, std::string& comment, const char* what) {
  skip_space(in, comment);
  int v = 0;
  if (!(in >> v)) throw TruncatedVideo(std::string("PGM header truncated reading ") + what);
  return v;
}

}  // namespace

std::optional<PgmImage> read_pgm(std::istream& in) {
  std::string comment;
  skip_space(in, comment);
  if (in.peek() == EOF) return std::nullopt;
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2) throw TruncatedVideo("PGM magic truncated");
  if (magic[0] != 'P' || magic[1] != '5') {
    throw VideoError("not a binary PGM (P5) image");
  }
  PgmImage img;
  const int width = read_header_int(in, comment, "width");
  const int height = read_header_int(in, comment, "height");
  img.maxval = read_header_int(in, comment, "maxval");
  if (width <= 0 || height <= 0) throw VideoError("PGM with empty geometry");
  if (img.maxval <= 0 || img.maxval > 65535) {
    throw UnsupportedDepth("unsupported PGM maxval " + std::to_string(img.maxval));
  }
  img.comment = comment;
  // Exactly one whitespace byte separates the header from the raster.
  in.get();
  img.pixels = Plane<std::uint16_t>(width, height);
  const bool wide = img.maxval > 255;
  const std::size_t bytes = img.pixels.size() * (wide ? 2 : 1);
  std::string buf(bytes, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw TruncatedVideo("PGM raster truncated: expected " + std::to_string(bytes) +
                         " bytes, got " + std::to_string(in.gcount()));
  }
  auto data = img.pixels.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (wide) {
      data[i] = static_cast<std::uint16_t>((static_cast<unsigned char>(buf[2 * i]) << 8) |
                                           static_cast<unsigned char>(buf[2 * i + 1]));
    } else {
      data[i] = static_cast<unsigned char>(buf[i]);
    }
  }
  return img;
}

std::string encode_pgm(const Plane<std::uint16_t>& pixels, int maxval, std::string_view comment) {
  std::ostringstream os;
  os << "P5\n";
  if (!comment.empty()) os << "# " << comment << "\n";
  os << pixels.width() << " " << pixels.height() << "\n" << maxval << "\n";
  std::string body;
  const bool wide = maxval > 255;
  body.reserve(pixels.size() * (wide ? 2 : 1));
  for (const auto v : pixels.data()) {
    if (wide) body.push_back(static_cast<char>(v >> 8));
    body.push_back(static_cast<char>(v & 0xff));
  }
  return os.str() + body;
}

}  // namespace nretina::io
