#include "swahr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

namespace swahr {

namespace {
constexpr char kMagic[4] = {'H', 'M', 'A', 'P'};
// caps keep a corrupt header from driving a huge allocation
constexpr uint32_t kMaxDim = 1u << 20;
constexpr uint64_t kMaxElements = 1ull << 29;

void put_u32(std::ostream& out, uint32_t v) {
  const char b[4] = {char(v & 0xff), char((v >> 8) & 0xff),
                     char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
  out.write(b, 4);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw tensor_format_error("tensor dump: truncated header");
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
         (uint32_t(b[3]) << 24);
}
}  // namespace

void dump_tensor(const Tensor3& t, std::ostream& out) {
  out.write(kMagic, 4);
  put_u32(out, uint32_t(t.channels()));
  put_u32(out, uint32_t(t.height()));
  put_u32(out, uint32_t(t.width()));
  // float32 little-endian payload; on the little-endian hosts we target this
  // is a straight memory image
  static_assert(sizeof(float) == 4);
  for (size_t i = 0; i < t.size(); ++i) {
    uint32_t bits;
    std::memcpy(&bits, t.data() + i, 4);
    put_u32(out, bits);
  }
  if (!out) throw tensor_format_error("tensor dump: write failed");
}

Tensor3 load_tensor(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw tensor_format_error("tensor dump: bad magic");
  }
  const uint32_t k = get_u32(in);
  const uint32_t h = get_u32(in);
  const uint32_t w = get_u32(in);
  if (k > kMaxDim || h > kMaxDim || w > kMaxDim ||
      uint64_t(k) * h * w > kMaxElements) {
    throw tensor_format_error("tensor dump: implausible shape " +
                              std::to_string(k) + "x" + std::to_string(h) +
                              "x" + std::to_string(w));
  }
  Tensor3 t{int(k), int(h), int(w)};
  for (size_t i = 0; i < t.size(); ++i) {
    const uint32_t bits = get_u32(in);
    std::memcpy(t.data() + i, &bits, 4);
  }
  return t;
}

void save_tensor(const Tensor3& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw tensor_format_error("cannot open for write: " + path);
  dump_tensor(t, f);
}

Tensor3 load_tensor_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw tensor_format_error("cannot open: " + path);
  return load_tensor(f);
}

void write_pgm(const Grid2D& g, std::ostream& out) {
  float lo = 0.0f, hi = 0.0f;
  if (!g.data.empty()) {
    lo = *std::min_element(g.data.begin(), g.data.end());
    hi = *std::max_element(g.data.begin(), g.data.end());
  }
  const float span = hi - lo;
  out << "P5\n" << g.width << " " << g.height << "\n255\n";
  std::string row(size_t(g.width), '\0');
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      float v = span > 0.0f ? (g.at(x, y) - lo) / span : 0.0f;
      int q = int(std::lround(v * 255.0f));
      row[size_t(x)] = char(std::clamp(q, 0, 255));
    }
    out.write(row.data(), row.size());
  }
  if (!out) throw tensor_format_error("pgm: write failed");
}

void save_pgm(const Grid2D& g, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw tensor_format_error("cannot open for write: " + path);
  write_pgm(g, f);
}

}  // namespace swahr
