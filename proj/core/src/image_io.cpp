#include "idflow/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "idflow/error.hpp"

namespace idflow {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_be32(unsigned char* dst, uint32_t v) {
  dst[0] = static_cast<unsigned char>(v >> 24);
  dst[1] = static_cast<unsigned char>(v >> 16);
  dst[2] = static_cast<unsigned char>(v >> 8);
  dst[3] = static_cast<unsigned char>(v);
}

void write_chunk(std::FILE* f, const char type[4], const std::vector<unsigned char>& payload) {
  unsigned char len[4];
  put_be32(len, static_cast<uint32_t>(payload.size()));
  std::fwrite(len, 1, 4, f);
  std::fwrite(type, 1, 4, f);
  if (!payload.empty()) std::fwrite(payload.data(), 1, payload.size(), f);
  uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(type), 4);
  if (!payload.empty()) crc = crc32(crc, payload.data(), static_cast<uInt>(payload.size()));
  unsigned char crcb[4];
  put_be32(crcb, static_cast<uint32_t>(crc));
  std::fwrite(crcb, 1, 4, f);
}

int read_pgm_token(std::FILE* f) {
  // skips whitespace and '#' comments, returns the next integer
  int c = std::fgetc(f);
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    } else if (!std::isspace(c)) {
      break;
    }
    c = std::fgetc(f);
  }
  if (c == EOF) return -1;
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = std::fgetc(f);
  }
  return value;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<uint8_t>& gray) {
  if (gray.size() != static_cast<size_t>(width) * height)
    throw Error(ErrorKind::Shape, "pgm payload size mismatch");
  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::fwrite(header.data(), 1, header.size(), f.get());
  if (std::fwrite(gray.data(), 1, gray.size(), f.get()) != gray.size())
    throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<uint8_t> read_pgm(const std::filesystem::path& path, int* width, int* height) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[2];
  if (std::fread(magic, 1, 2, f.get()) != 2 || magic[0] != 'P' || magic[1] != '5')
    throw Error(ErrorKind::Format, path.string() + ": not a binary PGM");
  int w = read_pgm_token(f.get());
  int h = read_pgm_token(f.get());
  int maxval = read_pgm_token(f.get());
  if (w <= 0 || h <= 0 || maxval != 255)
    throw Error(ErrorKind::Format, path.string() + ": unsupported PGM header");
  std::vector<uint8_t> data(static_cast<size_t>(w) * h);
  if (std::fread(data.data(), 1, data.size(), f.get()) != data.size())
    throw Error(ErrorKind::Format, path.string() + ": truncated PGM payload");
  *width = w;
  *height = h;
  return data;
}

std::vector<uint8_t> normalize_to_bytes(const std::vector<float>& values) {
  std::vector<uint8_t> out(values.size(), 0);
  if (values.empty()) return out;
  auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  float mn = *mn_it, mx = *mx_it;
  if (mx <= mn) return out;
  float scale = 255.f / (mx - mn);
  for (size_t i = 0; i < values.size(); ++i)
    out[i] = static_cast<uint8_t>(std::clamp((values[i] - mn) * scale + 0.5f, 0.f, 255.f));
  return out;
}

void write_image_pgm(const std::filesystem::path& path, const Image& img) {
  write_pgm(path, img.width, img.height, normalize_to_bytes(img.data));
}

void write_png_rgb(const std::filesystem::path& path, int width, int height,
                   const std::vector<uint8_t>& rgb) {
  if (rgb.size() != static_cast<size_t>(width) * height * 3)
    throw Error(ErrorKind::Shape, "png payload size mismatch");

  // raw scanlines with filter byte 0
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<size_t>(height) * (static_cast<size_t>(width) * 3 + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const uint8_t* row = rgb.data() + static_cast<size_t>(y) * width * 3;
    raw.insert(raw.end(), row, row + static_cast<size_t>(width) * 3);
  }
  uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> comp(comp_size);
  if (compress2(comp.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error(ErrorKind::Io, "zlib compression failed");
  comp.resize(comp_size);

  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::fwrite(sig, 1, 8, f.get());

  std::vector<unsigned char> ihdr(13);
  put_be32(ihdr.data(), static_cast<uint32_t>(width));
  put_be32(ihdr.data() + 4, static_cast<uint32_t>(height));
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // color type: truecolor
  ihdr[10] = 0;  // compression
  ihdr[11] = 0;  // filter
  ihdr[12] = 0;  // interlace
  write_chunk(f.get(), "IHDR", ihdr);
  write_chunk(f.get(), "IDAT", comp);
  write_chunk(f.get(), "IEND", {});
}

}  // namespace idflow
