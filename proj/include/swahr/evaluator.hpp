#pragma once

#include <string>
#include <vector>

#include "swahr/decoder.hpp"
#include "swahr/heatmap.hpp"

namespace swahr {

struct OksParams {
  // per-keypoint falloff constants; the similarity term for keypoint i is
  // exp(-d_i^2 / (2 * area * k_i^2))
  std::vector<double> k_consts;
  // area split boundaries, in squared pixels
  double medium_min = 32.0 * 32.0;
  double medium_max = 96.0 * 96.0;
};

// Uniform falloff, the default for synthetic scenes.
OksParams uniform_oks_params(int channels, double k = 0.1);
// COCO evaluator constants (twice the published per-keypoint sigmas),
// for 17-keypoint inputs.
OksParams coco_oks_params();

// Object keypoint similarity between one predicted pose and one annotated
// person: mean over the labeled ground-truth keypoints of the per-keypoint
// similarity; a missing prediction slot contributes 0. Returns 0 when the
// annotation has no labeled keypoints. The gt area is the spatial scale.
double oks(const PoseGroup& pred, const PersonInstance& gt,
           const OksParams& params);

struct APReport {
  bool valid = false;  // false when there are no ground-truth instances
  double ap = -1.0;    // mean over thresholds 0.50:0.05:0.95
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_m = -1.0;  // gt area in (32^2, 96^2]; -1 when the split is empty
  double ap_l = -1.0;  // gt area > 96^2
  double ar20 = -1.0;  // recall at <= 20 detections per image, mean over thresholds
  size_t gt_count = 0;
  size_t det_count = 0;
};

// COCO-style AP over parallel per-image lists: greedy score-descending
// matching per image and threshold, detections pooled across images,
// 101-point interpolated precision. Detections matched to a gt outside the
// active area split are ignored rather than counted as false positives.
APReport average_precision(
    const std::vector<std::vector<PoseGroup>>& preds_per_image,
    const std::vector<std::vector<PersonInstance>>& gts_per_image,
    const OksParams& params);

std::string report_to_json(const APReport& r);
// fixed-width table: AP, AP50, AP75, AP_M, AP_L, AR@20; -1.000 marks
// undefined entries
std::string report_table(const APReport& r);

}  // namespace swahr
