#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "swahr/grid.hpp"

namespace swahr {

// Raised on bad magic, truncated payloads, or absurd headers.
class tensor_format_error : public std::runtime_error {
 public:
  explicit tensor_format_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Binary stack dump: magic "HMAP", then channels/height/width as u32
// little-endian, then channels*height*width float32 little-endian in
// row-major, channel-major order. Round-trips bit-exactly.
void dump_tensor(const Tensor3& t, std::ostream& out);
Tensor3 load_tensor(std::istream& in);

void save_tensor(const Tensor3& t, const std::string& path);
Tensor3 load_tensor_file(const std::string& path);

// Single-channel visualization: binary PGM (P5, maxval 255), min-max
// normalized. A constant grid maps to all zeros.
void write_pgm(const Grid2D& g, std::ostream& out);
void save_pgm(const Grid2D& g, const std::string& path);

}  // namespace swahr
