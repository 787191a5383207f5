#include "fgssl/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

namespace fgssl {

namespace {

// Reads one whitespace/comment-separated header token.
std::string next_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  // Leave the terminator in the stream: the byte after the last header token
  // is the payload separator and must stay readable.
  if (c != EOF) in.unget();
  if (tok.empty()) throw IoError("truncated pixmap header in " + path);
  return tok;
}

int64_t parse_dim(const std::string& tok, const std::string& path) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad pixmap header value '" + tok + "' in " + path);
  }
}

uint8_t quantize(float v) {
  if (v < 0.0f) v = 0.0f;
  if (v > 1.0f) v = 1.0f;
  return static_cast<uint8_t>(std::lround(v * 255.0f));
}

}  // namespace

Image read_pixmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = next_token(in, path);
  if (magic != "P6") {
    throw IoError("unsupported pixmap magic '" + magic + "' in " + path);
  }
  const int64_t w = parse_dim(next_token(in, path), path);
  const int64_t h = parse_dim(next_token(in, path), path);
  const int64_t maxval = parse_dim(next_token(in, path), path);
  if (maxval != 255) {
    throw IoError("unsupported maxval " + std::to_string(maxval) + " in " + path);
  }
  // The header ends with exactly one whitespace byte before the payload.
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) throw IoError("missing payload separator in " + path);

  std::vector<unsigned char> raw(static_cast<size_t>(w * h * 3));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw IoError("truncated pixel payload in " + path);
  }
  if (in.get() != EOF) throw IoError("trailing bytes after pixel payload in " + path);

  Image img(h, w);
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      for (int64_t c = 0; c < 3; ++c) {
        img.at(c, y, x) = static_cast<float>(raw[static_cast<size_t>((y * w + x) * 3 + c)]) / 255.0f;
      }
    }
  }
  return img;
}

void write_pixmap(const std::string& path, const Image& img) {
  FGSSL_CHECK(!img.empty(), "write_pixmap: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << img.w << " " << img.h << "\n255\n";
  std::vector<unsigned char> raw(static_cast<size_t>(img.h * img.w * 3));
  for (int64_t y = 0; y < img.h; ++y) {
    for (int64_t x = 0; x < img.w; ++x) {
      for (int64_t c = 0; c < 3; ++c) {
        raw[static_cast<size_t>((y * img.w + x) * 3 + c)] = quantize(img.at(c, y, x));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for " + path);
}

void write_pixmap_gray(const std::string& path, int64_t h, int64_t w,
                       const std::vector<float>& plane) {
  FGSSL_CHECK(static_cast<int64_t>(plane.size()) == h * w, "write_pixmap_gray: plane size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> raw(plane.size());
  for (size_t i = 0; i < plane.size(); ++i) raw[i] = quantize(plane[i]);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace fgssl
