#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "swahr/heatmap.hpp"
#include "swahr/rng.hpp"

namespace swahr {

inline constexpr int kTemplateKeypoints = 17;

// Stick-figure keypoint template in COCO joint order, centered on the hip
// line, x right, y down, in pixels at unit scale.
const std::array<std::pair<float, float>, kTemplateKeypoints>&
skeleton_template();

// Tight width/height of the template at unit scale.
float template_width();
float template_height();

// Left/right channel index pairs of the COCO joint order.
const std::vector<std::pair<int, int>>& coco_flip_pairs();

struct SyntheticScene {
  int height = 0;
  int width = 0;
  std::vector<PersonInstance> persons;        // exact ground truth
  std::vector<PersonInstance> noisy_persons;  // what gets encoded
  std::vector<double> person_scales;          // sampled size multipliers
  double jitter_coeff = 0.0;
  uint64_t seed = 0;
};

struct SceneConfig {
  uint64_t seed = 0;
  int n_persons = 1;
  double scale_min = 1.0;
  double scale_max = 1.0;
  double jitter_coeff = 0.0;
  int height = 64;
  int width = 64;
};

// Places scaled template copies at uniform random centers, rejecting a
// placement whose bbox-center distance to an existing person is below half
// the mean of the two bbox widths. Throws std::runtime_error after 1000
// straight rejections (the canvas is too small for the request).
// noisy_persons = persons + N(0, (jitter_coeff * bbox_width)^2) per
// coordinate, clamped to the canvas.
SyntheticScene generate_scene(const SceneConfig& cfg);

// Fresh jitter draws around the given exact annotations; same noise model
// and clamping as generate_scene.
std::vector<PersonInstance> jitter_persons(
    const std::vector<PersonInstance>& persons, double jitter_coeff,
    int height, int width, Rng& rng);

// One affine draw applied to exact and noisy keypoints alike: rotation
// uniform in [-rotation_deg, rotation_deg] about the canvas center, scale
// uniform in [scale_min, scale_max] about the same center, translation
// uniform in [-translation, translation] per axis. hflip additionally
// mirrors x across the canvas and swaps the left/right channel pairs.
// Transformed keypoints are not clamped; bboxes and areas are recomputed.
SyntheticScene augment(const SyntheticScene& scene, double rotation_deg,
                       double scale_min, double scale_max, double translation,
                       bool hflip, uint64_t seed);

// Scene JSON: the annotation format for the noisy persons plus a parallel
// "true_annotations" array, the canvas shape, the seed, the jitter
// coefficient, and the per-person scales.
std::string scene_to_json(const SyntheticScene& scene);
SyntheticScene parse_scene(const std::string& json_text);
void save_scene(const SyntheticScene& scene, const std::string& path);
SyntheticScene load_scene(const std::string& path);

}  // namespace swahr
