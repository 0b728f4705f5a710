#include "swahr/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "swahr/kernels.hpp"

namespace swahr {

namespace {
struct Window {
  int x0, x1, y0, y1;
  bool empty;
};

// Integer cells with |i - x| <= 3 sigma0, clipped to the canvas.
Window support_window(float x, float y, float sigma0, int width, int height) {
  const double r = 3.0 * double(sigma0);
  Window w{};
  w.x0 = std::max(0, int(std::ceil(double(x) - r)));
  w.x1 = std::min(width - 1, int(std::floor(double(x) + r)));
  w.y0 = std::max(0, int(std::ceil(double(y) - r)));
  w.y1 = std::min(height - 1, int(std::floor(double(y) + r)));
  w.empty = w.x0 > w.x1 || w.y0 > w.y1;
  return w;
}

void check_encode_args(const std::vector<PersonInstance>& persons,
                       float sigma0, const StackShape& shape) {
  if (!(sigma0 > 0.0f)) {
    throw std::domain_error("encode: sigma0 must be > 0, got " +
                            std::to_string(sigma0));
  }
  if (shape.channels <= 0 || shape.height <= 0 || shape.width <= 0) {
    throw std::invalid_argument("encode: non-positive stack shape");
  }
  for (size_t p = 0; p < persons.size(); ++p) {
    if (int(persons[p].keypoints.size()) != shape.channels) {
      throw std::invalid_argument(
          "encode: person " + std::to_string(p) + " has " +
          std::to_string(persons[p].keypoints.size()) + " keypoints, stack has " +
          std::to_string(shape.channels) + " channels");
    }
  }
}
}  // namespace

HeatmapStack encode_gaussian(const std::vector<PersonInstance>& persons,
                             float sigma0, const StackShape& shape) {
  check_encode_args(persons, sigma0, shape);
  HeatmapStack out(shape.channels, shape.height, shape.width, 0.0f);
  const double inv2s2 = 1.0 / (2.0 * double(sigma0) * double(sigma0));
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (int k = 0; k < shape.channels; ++k) {
    for (const PersonInstance& person : persons) {
      const KeypointAnnotation& kp = person.keypoints[size_t(k)];
      if (kp.visibility == 0) continue;
      const Window w =
          support_window(kp.x, kp.y, sigma0, shape.width, shape.height);
      if (w.empty) continue;
      for (int j = w.y0; j <= w.y1; ++j) {
        const double dy = double(j) - double(kp.y);
        for (int i = w.x0; i <= w.x1; ++i) {
          const double dx = double(i) - double(kp.x);
          const float g = float(std::exp(-(dx * dx + dy * dy) * inv2s2));
          float& cell = out(k, i, j);
          if (g > cell) cell = g;
        }
      }
    }
  }
  return out;
}

Mask3 support_mask(const HeatmapStack& base) {
  Mask3 m(base.channels(), base.height(), base.width());
  const float* p = base.data();
  for (size_t i = 0; i < base.size(); ++i) m.data[i] = p[i] > 0.0f ? 1 : 0;
  return m;
}

double sahr_exact_value(double base, double s) {
  if (!(s > 0.0)) {
    throw std::domain_error("sahr_exact: scale must be > 0, got " +
                            std::to_string(s));
  }
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / s);
}

HeatmapStack sahr_exact(const HeatmapStack& base, const ScaleField& s) {
  require_same_shape(base, s);
  validate_scale_field(s);
  HeatmapStack out(base.channels(), base.height(), base.width());
  const float* bp = base.data();
  const float* sp = s.data();
  float* op = out.data();
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < (long long)base.size(); ++i) {
    const double b = double(bp[i]);
    op[i] = b <= 0.0 ? 0.0f : float(std::pow(b, 1.0 / double(sp[i])));
  }
  return out;
}

double sahr_taylor_value(double base, double alpha) {
  const double l = std::log(std::max(base, kLogFloor));
  const double t = 1.0 + alpha * l;
  return 0.5 * base * (1.0 + t * t);
}

double sahr_taylor_dalpha(double base, double alpha) {
  const double l = std::log(std::max(base, kLogFloor));
  return base * l * (1.0 + alpha * l);
}

HeatmapStack sahr_taylor(const HeatmapStack& base, const AlphaField& alpha) {
  require_same_shape(base, alpha);
  HeatmapStack out(base.channels(), base.height(), base.width());
  const float* bp = base.data();
  const float* ap = alpha.data();
  float* op = out.data();
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < (long long)base.size(); ++i) {
    op[i] = float(sahr_taylor_value(double(bp[i]), double(ap[i])));
  }
  return out;
}

double shr_scale_from_bbox(double bbox_width, double w_base) {
  if (!(bbox_width > 0.0)) {
    throw std::domain_error("shr scale: bbox width must be > 0, got " +
                            std::to_string(bbox_width));
  }
  if (!(w_base > 0.0)) {
    throw std::domain_error("shr scale: base width must be > 0, got " +
                            std::to_string(w_base));
  }
  return bbox_width / w_base;
}

Tensor3 rasterize_person_field(const std::vector<PersonInstance>& persons,
                               const std::vector<double>& values,
                               float background, float sigma0,
                               const StackShape& shape) {
  if (persons.size() != values.size()) {
    throw std::invalid_argument(
        "rasterize: " + std::to_string(persons.size()) + " persons vs " +
        std::to_string(values.size()) + " values");
  }
  check_encode_args(persons, sigma0, shape);
  Tensor3 field(shape.channels, shape.height, shape.width, background);
  // winner-takes-cell by Gaussian activation; >= makes the later person win
  // ties, matching the order-independent max merge of the activations
  Tensor3 best(shape.channels, shape.height, shape.width, 0.0f);
  const double inv2s2 = 1.0 / (2.0 * double(sigma0) * double(sigma0));
  const bool par = kernels::parallel_enabled();
#pragma omp parallel for schedule(static) if (par)
  for (int k = 0; k < shape.channels; ++k) {
    for (size_t p = 0; p < persons.size(); ++p) {
      const KeypointAnnotation& kp = persons[p].keypoints[size_t(k)];
      if (kp.visibility == 0) continue;
      const Window w =
          support_window(kp.x, kp.y, sigma0, shape.width, shape.height);
      if (w.empty) continue;
      for (int j = w.y0; j <= w.y1; ++j) {
        const double dy = double(j) - double(kp.y);
        for (int i = w.x0; i <= w.x1; ++i) {
          const double dx = double(i) - double(kp.x);
          const float g = float(std::exp(-(dx * dx + dy * dy) * inv2s2));
          if (g >= best(k, i, j)) {
            best(k, i, j) = g;
            field(k, i, j) = float(values[p]);
          }
        }
      }
    }
  }
  return field;
}

ScaleField rasterize_scale_field(const std::vector<PersonInstance>& persons,
                                 const std::vector<double>& scales,
                                 float sigma0, const StackShape& shape) {
  for (size_t p = 0; p < scales.size(); ++p) {
    if (!(scales[p] > 0.0)) {
      throw std::domain_error("rasterize: scale for person " +
                              std::to_string(p) + " must be > 0");
    }
  }
  return rasterize_person_field(persons, scales, 1.0f, sigma0, shape);
}

}  // namespace swahr
