#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "swahr/losses.hpp"
#include "swahr/synth.hpp"

namespace swahr {

struct FitConfig {
  LossVariant variant = LossVariant::base;
  float sigma0 = 2.0f;
  double lambda = 1.0;  // +inf freezes the scale field
  double gamma = 0.01;
  double learning_rate = 0.5;
  int steps = 5000;
  uint64_t seed = 0;
};

struct PersonScaleStat {
  int person = 0;
  double bbox_width = 0.0;
  double mean_scale = 0.0;  // mean of the fitted s over the person's support
};

struct FitResult {
  HeatmapStack final_pred;
  ScaleField final_scale;
  std::vector<LossReport> loss_curve;  // one report per step, pre-update
  std::vector<PersonScaleStat> per_person_mean_scale;
  // one entry per labeled (person, keypoint) pair, person-major: distance
  // in pixels from the decoded peak; a channel without a detection costs
  // the canvas diagonal
  std::vector<double> localization_errors;
};

class fit_divergence_error : public std::runtime_error {
 public:
  fit_divergence_error(int step, const std::string& what)
      : std::runtime_error(what), step(step) {}
  int step;
};

// Pixel value <-> unconstrained parameter. Predictions live in the open
// interval (-0.05, 1.05), so exact 0 and 1 targets are interior points.
double pred_from_param(double u);
double param_from_pred(double p);

// Direct gradient fit of a free per-pixel prediction (and, for the
// scale-adaptive variants, a free per-pixel alpha) to the scene's encoded
// target. The target is the encoding of the scene's noisy annotations, so
// label jitter reaches the optimizer exactly as mislabeled supervision.
// Parameter steps use the summed per-element gradient (n times the mean
// reduction reported in the loss curve); alpha moves at a fixed fraction
// of the learning rate. Throws fit_divergence_error when the loss leaves
// the finite range.
FitResult fit_direct(const SyntheticScene& scene, const FitConfig& cfg);

// alpha learning-rate fraction; keeps the alpha recursion contractive at
// the default learning rate and lambda
inline constexpr double kAlphaLrRatio = 0.25;

struct SweepRow {
  std::string param;
  std::string value;
  double mean_loc_err_px = 0.0;
  double ap = -1.0;
  double ap_m = -1.0;
  double ap_l = -1.0;
  int seed_count = 0;
};

// Runs fit_direct per (value, scene), decodes, groups with ground-truth
// tag fields, and pools evaluation across scenes. param is "lambda",
// "gamma" or "variant"; lambda accepts "inf". Rows come back in the given
// value order.
std::vector<SweepRow> ablation_sweep(const std::vector<SyntheticScene>& scenes,
                                     const FitConfig& base_cfg,
                                     const std::string& param,
                                     const std::vector<std::string>& values);

// header: param,value,mean_loc_err_px,ap,ap_m,ap_l,seed_count
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace swahr
