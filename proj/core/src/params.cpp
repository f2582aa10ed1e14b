#include "idflow/params.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

#include "idflow/error.hpp"

namespace idflow {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void write_le(std::FILE* f, T v) {
  unsigned char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xff);
  if (std::fwrite(buf, 1, sizeof(T), f) != sizeof(T))
    throw Error(ErrorKind::Io, "checkpoint write failed");
}

template <typename T>
T read_le(std::FILE* f) {
  unsigned char buf[sizeof(T)];
  if (std::fread(buf, 1, sizeof(T), f) != sizeof(T))
    throw Error(ErrorKind::Format, "checkpoint truncated");
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  if (std::fwrite("IDN1", 1, 4, f.get()) != 4) throw Error(ErrorKind::Io, "checkpoint write failed");
  write_le<uint32_t>(f.get(), static_cast<uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    if (name.size() > UINT16_MAX) throw Error(ErrorKind::Contract, "parameter name too long");
    write_le<uint16_t>(f.get(), static_cast<uint16_t>(name.size()));
    if (std::fwrite(name.data(), 1, name.size(), f.get()) != name.size())
      throw Error(ErrorKind::Io, "checkpoint write failed");
    const auto& shape = t.shape();
    write_le<uint8_t>(f.get(), static_cast<uint8_t>(shape.size()));
    for (int d : shape) write_le<uint32_t>(f.get(), static_cast<uint32_t>(d));
    static_assert(sizeof(float) == 4);
    const auto& v = t.values();
    if (std::fwrite(v.data(), 4, v.size(), f.get()) != v.size())
      throw Error(ErrorKind::Io, "checkpoint write failed");
  }
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[4];
  if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, "IDN1", 4) != 0)
    throw Error(ErrorKind::Format, path.string() + ": bad checkpoint magic");
  const uint32_t count = read_le<uint32_t>(f.get());
  ModelParams params;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = read_le<uint16_t>(f.get());
    std::string name(name_len, '\0');
    if (name_len && std::fread(name.data(), 1, name_len, f.get()) != name_len)
      throw Error(ErrorKind::Format, path.string() + ": checkpoint truncated");
    const uint8_t rank = read_le<uint8_t>(f.get());
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(read_le<uint32_t>(f.get()));
    std::vector<float> data(static_cast<size_t>(shape_numel(shape)));
    if (std::fread(data.data(), 4, data.size(), f.get()) != data.size())
      throw Error(ErrorKind::Format, path.string() + ": checkpoint truncated");
    params.add(name, Tensor::from_vector(std::move(shape), std::move(data), true));
  }
  return params;
}

}  // namespace idflow
