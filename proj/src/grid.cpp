#include "swahr/grid.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "swahr/kernels.hpp"

namespace swahr {

Tensor3::Tensor3(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) {
    throw std::invalid_argument("Tensor3: negative dimension");
  }
  data_.assign(size_t(channels) * size_t(height) * size_t(width), fill);
}

Grid2D Tensor3::channel(int k) const {
  if (k < 0 || k >= channels_) {
    throw std::out_of_range("Tensor3::channel: index " + std::to_string(k) +
                            " out of [0, " + std::to_string(channels_) + ")");
  }
  Grid2D g(height_, width_);
  const float* src = channel_data(k);
  std::copy(src, src + plane(), g.data.begin());
  return g;
}

size_t Mask3::count() const {
  size_t n = 0;
  for (uint8_t v : data) n += (v != 0);
  return n;
}

namespace {
std::string shape_str(int k, int h, int w) {
  std::ostringstream os;
  os << k << "x" << h << "x" << w;
  return os.str();
}
}  // namespace

void require_same_shape(const Tensor3& a, const Tensor3& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(
        "shape mismatch: " + shape_str(a.channels(), a.height(), a.width()) +
        " vs " + shape_str(b.channels(), b.height(), b.width()));
  }
}

void require_same_shape(const Tensor3& a, const Mask3& m) {
  if (!m.same_shape(a)) {
    throw std::invalid_argument(
        "shape mismatch: " + shape_str(a.channels(), a.height(), a.width()) +
        " vs mask " + shape_str(m.channels, m.height, m.width));
  }
}

void validate_scale_field(const ScaleField& s) {
  const float* p = s.data();
  for (size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] <= 0.0f) {
      throw std::domain_error("scale field entry " + std::to_string(i) +
                              " is " + std::to_string(p[i]) +
                              "; scales must be finite and > 0");
    }
  }
}

AlphaField alpha_from_scale(const ScaleField& s) {
  validate_scale_field(s);
  AlphaField a(s.channels(), s.height(), s.width());
  const float* sp = s.data();
  float* ap = a.data();
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < (long long)s.size(); ++i) {
    ap[i] = float(1.0 / double(sp[i]) - 1.0);
  }
  return a;
}

ScaleField scale_from_alpha(const AlphaField& a) {
  ScaleField s(a.channels(), a.height(), a.width());
  const float* ap = a.data();
  float* sp = s.data();
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < (long long)a.size(); ++i) {
    const double denom = 1.0 + double(ap[i]);
    if (!(denom > 0.0)) {
      // cannot throw out of an omp region; poison and check after
      sp[i] = -1.0f;
    } else {
      sp[i] = float(1.0 / denom);
    }
  }
  validate_scale_field(s);
  return s;
}

Tensor3 elementwise_max(const Tensor3& a, const Tensor3& b) {
  require_same_shape(a, b);
  Tensor3 out(a.channels(), a.height(), a.width());
  const float* pa = a.data();
  const float* pb = b.data();
  float* po = out.data();
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < (long long)a.size(); ++i) {
    po[i] = pa[i] > pb[i] ? pa[i] : pb[i];
  }
  return out;
}

}  // namespace swahr
