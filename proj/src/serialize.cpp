#include "lml/serialize.hpp"

#include <cstring>
#include <fstream>

#include "lml/errors.hpp"

namespace lml {

namespace {

constexpr uint32_t kTensorVersion = 1;
const char kMagic[4] = {'L', 'M', 'L', 'W'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, uint64_t& pos, const char* what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError(std::string("tensor file truncated reading ") + what, pos);
  pos += sizeof(T);
  return v;
}

}  // namespace

void save_tensors(const std::string& path, const NamedTensors& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  write_raw<uint32_t>(out, kTensorVersion);
  write_raw<uint32_t>(out, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) {
    write_raw<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_raw<uint32_t>(out, static_cast<uint32_t>(m.rows()));
    write_raw<uint32_t>(out, static_cast<uint32_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
  }
  if (!out) throw FormatError("short write to '" + path + "'");
}

NamedTensors load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor file '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic, not an LMLW tensor file", 0);
  }
  uint64_t pos = 4;
  const uint32_t version = read_raw<uint32_t>(in, pos, "version");
  if (version != kTensorVersion) {
    throw FormatError("unsupported tensor file version " + std::to_string(version), 4);
  }
  const uint32_t count = read_raw<uint32_t>(in, pos, "tensor count");
  NamedTensors tensors;
  tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = read_raw<uint32_t>(in, pos, "name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw FormatError("tensor file truncated reading name", pos);
    pos += name_len;
    const uint32_t rows = read_raw<uint32_t>(in, pos, "rows");
    const uint32_t cols = read_raw<uint32_t>(in, pos, "cols");
    Mat m(rows, cols);
    const auto bytes = sizeof(double) * static_cast<size_t>(m.size());
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw FormatError("tensor file truncated reading data of '" + name + "'", pos);
    pos += bytes;
    tensors.emplace_back(std::move(name), std::move(m));
  }
  return tensors;
}

const Mat& tensor_named(const NamedTensors& tensors, const std::string& name) {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw FormatError("tensor '" + name + "' missing from checkpoint");
}

uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "' for checksum");
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a(buf.data(), buf.size());
}

}  // namespace lml
