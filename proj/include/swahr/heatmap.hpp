#pragma once

#include <cstdint>
#include <vector>

#include "swahr/grid.hpp"

namespace swahr {

// COCO-style visibility: 0 = not labeled (skipped when drawing),
// 1 = labeled but occluded, 2 = labeled and visible. 1 and 2 both draw.
struct KeypointAnnotation {
  float x = 0.0f;
  float y = 0.0f;
  int visibility = 0;
};

struct BBox {
  float x = 0.0f;
  float y = 0.0f;
  float w = 0.0f;
  float h = 0.0f;
};

struct PersonInstance {
  std::vector<KeypointAnnotation> keypoints;
  BBox bbox;
  float area = 0.0f;
  int image_id = 0;
};

struct StackShape {
  int channels = 0;
  int height = 0;
  int width = 0;
};

// Draws one Gaussian bump per labeled keypoint, channel k per keypoint
// index k. The bump value at integer cell (i, j) for a keypoint at (x, y)
// is exp(-((i-x)^2 + (j-y)^2) / (2 sigma0^2)), written only on the square
// window |i-x| <= 3 sigma0 and |j-y| <= 3 sigma0. Overlapping persons merge
// by pixel-wise max. Windows that miss the canvas entirely are skipped.
HeatmapStack encode_gaussian(const std::vector<PersonInstance>& persons,
                             float sigma0, const StackShape& shape);

// Cells where the ground-truth activation is strictly positive.
Mask3 support_mask(const HeatmapStack& base);

// Scale-adaptive target: base^(1/s) for base > 0, exact power form.
// Zero cells stay zero.
double sahr_exact_value(double base, double s);
HeatmapStack sahr_exact(const HeatmapStack& base, const ScaleField& s);

// Second-order expansion of the same transform around s = 1, written in
// alpha = 1/s - 1:  0.5 * base * (1 + (1 + alpha * ln(base))^2).
// ln is clamped at 1e-12 to keep zero cells finite (they stay zero because
// of the leading base factor).
double sahr_taylor_value(double base, double alpha);
HeatmapStack sahr_taylor(const HeatmapStack& base, const AlphaField& alpha);

// d/d_alpha of sahr_taylor_value at (base, alpha); used by the analytic
// loss gradients.
double sahr_taylor_dalpha(double base, double alpha);

// Heuristic per-person scale from the annotation box: bbox_width / w_base.
// Throws std::domain_error unless both inputs are > 0.
double shr_scale_from_bbox(double bbox_width, double w_base = 256.0);

// Per-pixel field holding values[p] on the support window of each keypoint
// of person p, `background` elsewhere. Cells claimed by several persons go
// to the one with the larger Gaussian activation; equal activations go to
// the later person, mirroring the max-merge in encode_gaussian.
Tensor3 rasterize_person_field(const std::vector<PersonInstance>& persons,
                               const std::vector<double>& values,
                               float background, float sigma0,
                               const StackShape& shape);

// rasterize_person_field with scales[p] per person and background 1.
ScaleField rasterize_scale_field(const std::vector<PersonInstance>& persons,
                                 const std::vector<double>& scales,
                                 float sigma0, const StackShape& shape);

inline constexpr double kLogFloor = 1e-12;

}  // namespace swahr
