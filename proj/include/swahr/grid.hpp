#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace swahr {

// Dense row-major 2-D grid of float32. Indexing is (x, y) = (column, row),
// so at(x, y) reads data[y * width + x].
struct Grid2D {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Grid2D() = default;
  Grid2D(int h, int w, float fill = 0.0f)
      : height(h), width(w), data(size_t(h) * size_t(w), fill) {}

  float at(int x, int y) const { return data[size_t(y) * width + x]; }
  float& at(int x, int y) { return data[size_t(y) * width + x]; }
  size_t size() const { return data.size(); }
};

// K same-shape channels stored contiguously, channel-major. One type backs
// every per-pixel field in the pipeline; the aliases below name the roles.
// Storage is float32 (matches the binary dump format); loss and gradient
// arithmetic happens in double on top of it.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int channels, int height, int width, float fill = 0.0f);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  size_t plane() const { return size_t(height_) * size_t(width_); }
  size_t size() const { return data_.size(); }

  size_t index(int k, int x, int y) const {
    return (size_t(k) * height_ + y) * width_ + x;
  }
  float operator()(int k, int x, int y) const { return data_[index(k, x, y)]; }
  float& operator()(int k, int x, int y) { return data_[index(k, x, y)]; }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float* channel_data(int k) { return data_.data() + size_t(k) * plane(); }
  const float* channel_data(int k) const {
    return data_.data() + size_t(k) * plane();
  }

  // copy of one channel, for single-grid consumers (PGM export etc.)
  Grid2D channel(int k) const;

  bool same_shape(const Tensor3& o) const {
    return channels_ == o.channels_ && height_ == o.height_ &&
           width_ == o.width_;
  }

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

using HeatmapStack = Tensor3;  // activations in [0, 1]
using ScaleField = Tensor3;    // per-pixel scale s > 0
using AlphaField = Tensor3;    // per-pixel alpha = 1/s - 1
using WeightField = Tensor3;   // per-pixel loss weights

// Boolean companion to a Tensor3, same shape and layout.
struct Mask3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  Mask3() = default;
  Mask3(int k, int h, int w, bool fill = false)
      : channels(k),
        height(h),
        width(w),
        data(size_t(k) * size_t(h) * size_t(w), fill ? 1 : 0) {}

  size_t index(int k, int x, int y) const {
    return (size_t(k) * height + y) * width + x;
  }
  bool at(int k, int x, int y) const { return data[index(k, x, y)] != 0; }
  void set(int k, int x, int y, bool v) { data[index(k, x, y)] = v ? 1 : 0; }
  size_t size() const { return data.size(); }
  size_t count() const;

  bool same_shape(const Tensor3& t) const {
    return channels == t.channels() && height == t.height() &&
           width == t.width();
  }
};

// Throws std::invalid_argument naming both shapes on mismatch.
void require_same_shape(const Tensor3& a, const Tensor3& b);
void require_same_shape(const Tensor3& a, const Mask3& m);

// Throws std::domain_error if any entry is non-finite or <= 0.
void validate_scale_field(const ScaleField& s);

// alpha = 1/s - 1 and back. Computed in double, rounded once to float, so a
// round trip stays within 1 ulp.
AlphaField alpha_from_scale(const ScaleField& s);
ScaleField scale_from_alpha(const AlphaField& a);

// Pixel-wise max of two same-shape stacks.
Tensor3 elementwise_max(const Tensor3& a, const Tensor3& b);

}  // namespace swahr
