#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "swahr/evaluator.hpp"

using namespace swahr;

namespace {

PersonInstance make_gt(double x, double y, double area, int vis = 2) {
  PersonInstance p;
  p.keypoints.push_back({float(x), float(y), vis});
  p.bbox = {float(x - 1), float(y - 1), 2.0f, 2.0f};
  p.area = float(area);
  return p;
}

PoseGroup make_pred(double x, double y, double score) {
  PoseGroup g;
  Detection d;
  d.channel = 0;
  d.x = x;
  d.y = y;
  d.score = score;
  g.keypoints.push_back(d);
  g.group_score = score;
  return g;
}

const OksParams kP1 = uniform_oks_params(1, 0.1);

}  // namespace

TEST_CASE("oks of a perfect and a shifted single-keypoint pose") {
  auto gt = make_gt(10, 10, 100.0);
  CHECK(oks(make_pred(10, 10, 1.0), gt, kP1) == doctest::Approx(1.0));
  // area 100, k 0.1: denominator 2*area*k^2 = 2, offset (1,1) gives e^-1
  CHECK(oks(make_pred(11, 11, 1.0), gt, kP1) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(oks(make_pred(10 + std::sqrt(2.0), 10, 1.0), gt, kP1) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("oks is invariant to translation and to rescaling with area") {
  auto gt = make_gt(10, 10, 144.0);
  const double base = oks(make_pred(10.7, 9.4, 1.0), gt, kP1);
  auto gt_shift = make_gt(30, 25, 144.0);
  CHECK(oks(make_pred(30.7, 24.4, 1.0), gt_shift, kP1) ==
        doctest::Approx(base).epsilon(1e-9));
  // scale coordinates by 3 and area by 9
  auto gt_big = make_gt(30, 30, 144.0 * 9.0);
  CHECK(oks(make_pred(30 + 0.7 * 3, 30 - 0.6 * 3, 1.0), gt_big, kP1) ==
        doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("oks averages over labeled keypoints, missing slots count 0") {
  PersonInstance gt;
  gt.keypoints = {{10, 10, 2}, {20, 20, 2}, {5, 5, 0}};  // third unlabeled
  gt.area = 100.0f;
  const OksParams p3 = uniform_oks_params(3, 0.1);

  PoseGroup pred;
  Detection d;
  d.channel = 0; d.x = 10; d.y = 10; d.score = 1.0;
  pred.keypoints = {d, std::nullopt, std::nullopt};
  // exact on kp0, missing kp1, kp2 not labeled: (1 + 0) / 2
  CHECK(oks(pred, gt, p3) == doctest::Approx(0.5));

  PersonInstance unlabeled;
  unlabeled.keypoints = {{1, 1, 0}, {2, 2, 0}, {3, 3, 0}};
  unlabeled.area = 10.0f;
  CHECK(oks(pred, unlabeled, p3) == 0.0);
}

TEST_CASE("oks validates shape and area") {
  auto gt = make_gt(1, 1, 100.0);
  CHECK_THROWS_AS(oks(make_pred(1, 1, 1.0), gt, uniform_oks_params(2, 0.1)),
                  std::invalid_argument);
  auto bad = make_gt(1, 1, 0.0);
  CHECK_THROWS_AS(oks(make_pred(1, 1, 1.0), bad, kP1), std::domain_error);
}

TEST_CASE("coco falloff constants are twice the published sigmas") {
  const OksParams p = coco_oks_params();
  REQUIRE(p.k_consts.size() == 17);
  CHECK(p.k_consts[0] == doctest::Approx(0.052).epsilon(1e-12));   // nose
  CHECK(p.k_consts[5] == doctest::Approx(0.158).epsilon(1e-12));   // shoulder
  CHECK(p.k_consts[11] == doctest::Approx(0.214).epsilon(1e-12));  // hip
  CHECK(p.k_consts[16] == doctest::Approx(0.178).epsilon(1e-12));  // ankle
  CHECK(uniform_oks_params(4, 0.2).k_consts ==
        std::vector<double>{0.2, 0.2, 0.2, 0.2});
}

TEST_CASE("perfect detections give AP 1 everywhere") {
  std::vector<std::vector<PersonInstance>> gts = {
      {make_gt(10, 10, 2500.0), make_gt(40, 40, 2500.0)},
      {make_gt(20, 20, 2500.0)}};
  std::vector<std::vector<PoseGroup>> preds = {
      {make_pred(10, 10, 0.9), make_pred(40, 40, 0.8)},
      {make_pred(20, 20, 0.7)}};
  APReport r = average_precision(preds, gts, kP1);
  REQUIRE(r.valid);
  CHECK(r.ap == doctest::Approx(1.0));
  CHECK(r.ap50 == doctest::Approx(1.0));
  CHECK(r.ap75 == doctest::Approx(1.0));
  CHECK(r.ar20 == doctest::Approx(1.0));
  CHECK(r.ap_m == doctest::Approx(1.0));  // area 2500 is in the medium split
  CHECK(r.ap_l == -1.0);                  // no large gts
  CHECK(r.gt_count == 3);
  CHECK(r.det_count == 3);
}

TEST_CASE("no ground truth invalidates the report") {
  APReport r = average_precision({{make_pred(1, 1, 0.5)}}, {{}}, kP1);
  CHECK_FALSE(r.valid);
  CHECK(r.ap == -1.0);
  CHECK(r.ap50 == -1.0);
  CHECK(r.ar20 == -1.0);
}

TEST_CASE("no detections give AP 0 against real ground truth") {
  APReport r = average_precision({{}}, {{make_gt(5, 5, 100.0)}}, kP1);
  REQUIRE(r.valid);
  CHECK(r.ap == 0.0);
  CHECK(r.ar20 == 0.0);
  CHECK(r.det_count == 0);
  CHECK(r.gt_count == 1);
}

TEST_CASE("a confident false positive ranked first halves AP") {
  // the 0.95-scored pred misses, the 0.9-scored one is exact: every
  // precision-recall sweep sees FP then TP, so the envelope is 0.5
  std::vector<std::vector<PersonInstance>> gts = {{make_gt(10, 10, 100.0)}};
  std::vector<std::vector<PoseGroup>> preds = {
      {make_pred(50, 50, 0.95), make_pred(10, 10, 0.9)}};
  APReport r = average_precision(preds, gts, kP1);
  CHECK(r.ap == doctest::Approx(0.5));
  CHECK(r.ap50 == doctest::Approx(0.5));
  CHECK(r.ap75 == doctest::Approx(0.5));
  CHECK(r.ar20 == doctest::Approx(1.0));  // recall ignores the ranking

  // with the scores swapped the TP comes first and the FP costs nothing
  std::vector<std::vector<PoseGroup>> preds2 = {
      {make_pred(50, 50, 0.6), make_pred(10, 10, 0.9)}};
  APReport r2 = average_precision(preds2, gts, kP1);
  CHECK(r2.ap == doctest::Approx(1.0));
}

TEST_CASE("greedy matching hands the gt to the higher-scored detection") {
  // det B (score 0.9) has oks ~0.62: it takes the gt at low thresholds,
  // turning det A (score 0.8, oks ~0.99) into a false positive there; at
  // thresholds above 0.62 the roles flip and the TP ranks second
  auto gt = make_gt(10, 10, 100.0);
  const double d62 = std::sqrt(-2.0 * std::log(0.62));
  auto predB = make_pred(10 + d62, 10, 0.9);
  auto predA = make_pred(10.1, 10, 0.8);
  const double oksB = oks(predB, gt, kP1);
  const double oksA = oks(predA, gt, kP1);
  REQUIRE(oksB == doctest::Approx(0.62).epsilon(1e-9));
  REQUIRE(oksA > 0.95);

  APReport r = average_precision({{predB, predA}}, {{gt}}, kP1);
  // thresholds 0.50, 0.55, 0.60 -> AP_t = 1.0; the seven others -> 0.5
  CHECK(r.ap == doctest::Approx((3.0 * 1.0 + 7.0 * 0.5) / 10.0));
  CHECK(r.ap50 == doctest::Approx(1.0));
  CHECK(r.ap75 == doctest::Approx(0.5));
}

TEST_CASE("oks ties match the lower gt index") {
  // det a sits exactly between two gts with oks ~0.956 to both; the tie
  // goes to gt0. det b can only reach gt0 (its oks to gt1 is below 0.5),
  // so it always ends up a false positive. Had the tie gone to gt1, b
  // would match gt0 and the low thresholds would score a full recall.
  auto g0 = make_gt(10, 10, 10000.0);
  auto g1 = make_gt(16, 10, 10000.0);
  auto a = make_pred(13, 10, 0.9);
  auto b = make_pred(4, 10, 0.8);
  REQUIRE(oks(a, g0, kP1) == doctest::Approx(oks(a, g1, kP1)).epsilon(1e-12));
  REQUIRE(oks(a, g0, kP1) > 0.95);
  REQUIRE(oks(b, g0, kP1) > 0.8);
  REQUIRE(oks(b, g1, kP1) < 0.5);

  APReport r = average_precision({{a, b}}, {{g0, g1}}, kP1);
  // every threshold: a TP on gt0 at rank 1, b FP at rank 2, recall 0.5
  CHECK(r.ap == doctest::Approx(51.0 / 101.0));
  CHECK(r.ar20 == doctest::Approx(0.5));
}

TEST_CASE("area splits ignore matches outside the split") {
  auto med = make_gt(10, 10, 50.0 * 50.0);     // inside (32^2, 96^2]
  auto lrg = make_gt(60, 60, 120.0 * 120.0);   // > 96^2
  std::vector<std::vector<PoseGroup>> preds = {
      {make_pred(10, 10, 0.9), make_pred(60, 60, 0.8)}};
  APReport r = average_precision(preds, {{med, lrg}}, kP1);
  CHECK(r.ap == doctest::Approx(1.0));
  // in each split the other pred is matched to an out-of-split gt and is
  // ignored, not a false positive
  CHECK(r.ap_m == doctest::Approx(1.0));
  CHECK(r.ap_l == doctest::Approx(1.0));

  APReport small = average_precision({{make_pred(5, 5, 0.9)}},
                                     {{make_gt(5, 5, 100.0)}}, kP1);
  CHECK(small.ap_m == -1.0);  // area 100 is below the medium split
  CHECK(small.ap_l == -1.0);
  CHECK(small.ap == doctest::Approx(1.0));
}

TEST_CASE("image count mismatch is rejected") {
  CHECK_THROWS_AS(average_precision({{}}, {{}, {}}, kP1),
                  std::invalid_argument);
}

TEST_CASE("report serialization") {
  APReport r = average_precision({{make_pred(3, 3, 0.9)}},
                                 {{make_gt(3, 3, 100.0)}}, kP1);
  const std::string js = report_to_json(r);
  CHECK(js.find("\"ap\"") != std::string::npos);
  CHECK(js.find("\"ar20\"") != std::string::npos);
  const std::string table = report_table(r);
  CHECK(table.find("AP50") != std::string::npos);
  CHECK(table.find("1.000") != std::string::npos);
  CHECK(table.find("-1.000") != std::string::npos);  // empty splits
}
