#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "doctest.h"
#include "swahr/decoder.hpp"
#include "swahr/heatmap.hpp"

using namespace swahr;

namespace {
PersonInstance one_keypoint(float x, float y) {
  PersonInstance p;
  p.keypoints.push_back({x, y, 2});
  p.bbox = {x - 1, y - 1, 2, 2};
  p.area = 4.0f;
  return p;
}
}  // namespace

TEST_CASE("peaks are strict 3x3 maxima ordered by score then index") {
  HeatmapStack h{1, 8, 8};
  h(0, 2, 2) = 0.9f;
  h(0, 2, 3) = 0.5f;  // neighbor, not a peak
  h(0, 6, 6) = 0.95f;
  h(0, 5, 1) = 0.4f;
  auto peaks = find_peaks(h, 10, 0.0);
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[0].x == 6); CHECK(peaks[0].y == 6);
  CHECK(peaks[0].score == doctest::Approx(0.95));
  CHECK(peaks[1].x == 2); CHECK(peaks[1].y == 2);
  CHECK(peaks[2].x == 5); CHECK(peaks[2].y == 1);
}

TEST_CASE("equal-score peaks order by row-major cell index") {
  HeatmapStack h{1, 8, 8};
  h(0, 6, 1) = 0.5f;
  h(0, 1, 4) = 0.5f;
  auto peaks = find_peaks(h, 10, 0.0);
  REQUIRE(peaks.size() == 2);
  // y=1 row comes before y=4
  CHECK(peaks[0].y == 1);
  CHECK(peaks[1].y == 4);
}

TEST_CASE("constant channels and plateau edges yield no peaks") {
  HeatmapStack flat{1, 8, 8, 0.7f};
  CHECK(find_peaks(flat, 10, 0.0).empty());
  // two equal adjacent cells: neither is a strict maximum
  HeatmapStack h{1, 8, 8};
  h(0, 3, 3) = 0.8f;
  h(0, 4, 3) = 0.8f;
  CHECK(find_peaks(h, 10, 0.0).empty());
}

TEST_CASE("score floor and per-channel cap") {
  HeatmapStack h{2, 8, 8};
  h(0, 1, 1) = 0.9f;
  h(0, 5, 5) = 0.3f;
  h(1, 3, 3) = 0.2f;
  auto peaks = find_peaks(h, 10, 0.25);
  REQUIRE(peaks.size() == 2);  // the 0.2 one is floored away
  CHECK(peaks[0].channel == 0);
  CHECK(peaks[1].channel == 0);
  auto capped = find_peaks(h, 1, 0.0);
  REQUIRE(capped.size() == 2);  // one per channel
  CHECK(capped[0].score == doctest::Approx(0.9));
  CHECK(capped[1].channel == 1);
}

TEST_CASE("border cells can be peaks against in-bounds neighbors only") {
  HeatmapStack h{1, 4, 4};
  h(0, 0, 0) = 1.0f;
  h(0, 1, 0) = 0.2f;
  h(0, 0, 1) = 0.2f;
  h(0, 1, 1) = 0.2f;
  auto peaks = find_peaks(h, 10, 0.0);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].x == 0);
  CHECK(peaks[0].y == 0);
}

TEST_CASE("quarter-pixel refinement shifts toward the larger neighbor") {
  HeatmapStack h{1, 8, 8};
  h(0, 3, 4) = 1.0f;
  h(0, 4, 4) = 0.6f;
  h(0, 2, 4) = 0.4f;
  h(0, 3, 5) = 0.3f;
  h(0, 3, 3) = 0.5f;
  Detection d;
  d.channel = 0; d.x = 3; d.y = 4; d.score = 1.0;
  Detection r = refine_subpixel(h, d);
  CHECK(r.x == doctest::Approx(3.25));
  CHECK(r.y == doctest::Approx(3.75));
  CHECK(r.score == 1.0);
}

TEST_CASE("refinement leaves borders and ties alone") {
  HeatmapStack h{1, 4, 4};
  h(0, 0, 2) = 1.0f;
  h(0, 1, 2) = 0.5f;
  h(0, 0, 1) = 0.3f;
  h(0, 0, 3) = 0.6f;
  Detection d;
  d.x = 0; d.y = 2; d.score = 1.0;
  Detection r = refine_subpixel(h, d);
  CHECK(r.x == 0.0);  // x at the border: unshifted
  CHECK(r.y == doctest::Approx(2.25));

  HeatmapStack tie{1, 5, 5};
  tie(0, 2, 2) = 1.0f;  // all neighbors equal (zero)
  Detection c;
  c.x = 2; c.y = 2; c.score = 1.0;
  Detection rc = refine_subpixel(tie, c);
  CHECK(rc.x == 2.0);
  CHECK(rc.y == 2.0);
}

TEST_CASE("refinement recovers sub-cell gaussian centers within 0.25 px") {
  for (double fx : {10.2, 10.45, 9.8}) {
    auto h = encode_gaussian({one_keypoint(float(fx), 8.3f)}, 2.0f,
                             {1, 24, 24});
    auto peaks = find_peaks(h, 1, 0.1);
    REQUIRE(peaks.size() == 1);
    Detection r = refine_subpixel(h, peaks[0]);
    CHECK(std::abs(r.x - fx) <= 0.25 + 1e-9);
    CHECK(std::abs(r.y - 8.3) <= 0.25 + 1e-9);
  }
}

TEST_CASE("tags copy from the cell under the peak") {
  Tensor3 tags{1, 8, 8};
  tags(0, 3, 4) = 2.5f;
  Detection d;
  d.channel = 0; d.x = 3.25; d.y = 3.75; d.score = 1.0;
  auto out = attach_tags({d}, tags);
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].tag.has_value());
  CHECK(*out[0].tag == doctest::Approx(2.5));
}

TEST_CASE("aggregation at the native size is the identity / the mean") {
  HeatmapStack a{1, 4, 4};
  for (size_t i = 0; i < a.size(); ++i) a.data()[i] = float(i) * 0.01f;
  auto same = aggregate_heatmaps({a}, 4, 4);
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(same.data()[i] == doctest::Approx(a.data()[i]));

  HeatmapStack b{1, 4, 4, 0.5f};
  auto mean = aggregate_heatmaps({a, b}, 4, 4);
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(mean.data()[i] ==
          doctest::Approx(0.5 * (double(a.data()[i]) + 0.5)).epsilon(1e-6));
}

TEST_CASE("aggregation upsamples with half-pixel centers and edge clamp") {
  HeatmapStack a{1, 1, 2};
  a(0, 0, 0) = 0.0f;
  a(0, 1, 0) = 1.0f;
  auto up = aggregate_heatmaps({a}, 1, 4);
  // out x=0 maps to in x=-0.25 (clamped), x=1 to 0.25, x=2 to 0.75, x=3 to 1.25
  CHECK(up(0, 0, 0) == doctest::Approx(0.0));
  CHECK(up(0, 1, 0) == doctest::Approx(0.25));
  CHECK(up(0, 2, 0) == doctest::Approx(0.75));
  CHECK(up(0, 3, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(aggregate_heatmaps({}, 4, 4), std::invalid_argument);
  HeatmapStack two{2, 1, 2};
  CHECK_THROWS_AS(aggregate_heatmaps({a, two}, 1, 4), std::invalid_argument);
}

TEST_CASE("flip merge mirrors, swaps channels, and averages") {
  HeatmapStack pred{2, 1, 4};
  pred(0, 1, 0) = 1.0f;  // left joint at x=1
  pred(1, 3, 0) = 0.8f;  // right joint at x=3
  // a perfectly consistent flipped prediction: mirror x and swap channels
  HeatmapStack flipped{2, 1, 4};
  flipped(1, 2, 0) = 1.0f;  // mirrored left joint: channel 1, x = 3-1
  flipped(0, 0, 0) = 0.8f;
  auto merged = flip_merge(pred, flipped, {{0, 1}});
  for (size_t i = 0; i < pred.size(); ++i)
    CHECK(merged.data()[i] == doctest::Approx(pred.data()[i]));

  // merging a prediction with itself under an identity-consistent flip is
  // an involution check: applying the same merge twice changes nothing
  auto twice = flip_merge(merged, flipped, {{0, 1}});
  for (size_t i = 0; i < merged.size(); ++i)
    CHECK(twice.data()[i] == doctest::Approx(merged.data()[i]));
}

TEST_CASE("flip merge validates the channel permutation") {
  HeatmapStack pred{3, 2, 2};
  HeatmapStack fl{3, 2, 2};
  CHECK_NOTHROW(flip_merge(pred, fl, {{0, 1}}));  // channel 2 maps to itself
  CHECK_THROWS_AS(flip_merge(pred, fl, {{0, 1}, {1, 2}}),
                  std::invalid_argument);  // not an involution
  CHECK_THROWS_AS(flip_merge(pred, fl, {{0, 5}}), std::invalid_argument);
  HeatmapStack smaller{2, 2, 2};
  CHECK_THROWS_AS(flip_merge(pred, smaller, {{0, 1}}), std::invalid_argument);
}

TEST_CASE("tag grouping splits two persons and fills slots per channel") {
  std::vector<Detection> dets;
  auto add = [&](int ch, double x, double score, double tag) {
    Detection d;
    d.channel = ch; d.x = x; d.y = 1.0; d.score = score; d.tag = tag;
    dets.push_back(d);
  };
  add(0, 1.0, 0.9, 0.1);
  add(0, 5.0, 0.8, 2.0);
  add(1, 1.2, 0.7, 0.15);
  add(1, 5.1, 0.95, 1.9);
  auto groups = group_by_tags(dets, 2, 1.0);
  REQUIRE(groups.size() == 2);
  // group of the strongest channel-0 detection comes first
  REQUIRE(groups[0].keypoints[0].has_value());
  REQUIRE(groups[0].keypoints[1].has_value());
  CHECK(groups[0].keypoints[0]->x == doctest::Approx(1.0));
  CHECK(groups[0].keypoints[1]->x == doctest::Approx(1.2));
  CHECK(groups[1].keypoints[0]->x == doctest::Approx(5.0));
  CHECK(groups[1].keypoints[1]->x == doctest::Approx(5.1));
  CHECK(groups[0].group_score == doctest::Approx((0.9 + 0.7) / 2.0));
  // running-mean tags
  CHECK(groups[0].group_tag == doctest::Approx((0.1 + 0.15) / 2.0));
}

TEST_CASE("a detection beyond the tag threshold opens a new group") {
  std::vector<Detection> dets;
  Detection a;
  a.channel = 0; a.x = 1; a.y = 1; a.score = 0.9; a.tag = 0.0;
  Detection b;
  b.channel = 1; b.x = 2; b.y = 2; b.score = 0.8; b.tag = 3.0;
  dets = {a, b};
  auto groups = group_by_tags(dets, 2, 1.0);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].keypoints[0].has_value());
  CHECK_FALSE(groups[0].keypoints[1].has_value());
  CHECK_FALSE(groups[1].keypoints[0].has_value());
  CHECK(groups[1].keypoints[1].has_value());
}

TEST_CASE("a second same-channel detection cannot join a full group") {
  std::vector<Detection> dets;
  Detection a;
  a.channel = 0; a.x = 1; a.y = 1; a.score = 0.9; a.tag = 0.0;
  Detection b;
  b.channel = 0; b.x = 4; b.y = 4; b.score = 0.5; b.tag = 0.01;
  dets = {a, b};
  auto groups = group_by_tags(dets, 1, 1.0);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].keypoints[0]->x == doctest::Approx(1.0));
  CHECK(groups[1].keypoints[0]->x == doctest::Approx(4.0));
}

TEST_CASE("tag ties go to the older group") {
  std::vector<Detection> dets;
  Detection a;
  a.channel = 0; a.x = 1; a.y = 1; a.score = 0.9; a.tag = 0.0;
  Detection b;
  b.channel = 0; b.x = 4; b.y = 4; b.score = 0.5; b.tag = 2.0;
  Detection c;  // tag 1.0 is equidistant to both groups
  c.channel = 1; c.x = 2; c.y = 2; c.score = 0.8; c.tag = 1.0;
  dets = {a, b, c};
  auto groups = group_by_tags(dets, 2, 1.5);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].keypoints[1].has_value());
  CHECK_FALSE(groups[1].keypoints[1].has_value());
}

TEST_CASE("grouping requires tags and valid arguments") {
  Detection d;
  d.channel = 0; d.score = 0.5;  // no tag
  CHECK_THROWS_AS(group_by_tags({d}, 1, 1.0), std::invalid_argument);
  d.tag = 0.0;
  CHECK_THROWS_AS(group_by_tags({d}, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(group_by_tags({d}, 1, 0.0), std::invalid_argument);
  Detection oob;
  oob.channel = 7; oob.tag = 0.0;
  CHECK_THROWS_AS(group_by_tags({oob}, 2, 1.0), std::invalid_argument);
}

TEST_CASE("pose json round-trips groups") {
  std::vector<Detection> dets;
  Detection a;
  a.channel = 0; a.x = 1.25; a.y = 2.5; a.score = 0.9; a.tag = 0.0;
  Detection b;
  b.channel = 2; b.x = 3.0; b.y = 4.0; b.score = 0.4; b.tag = 0.1;
  auto groups = group_by_tags({a, b}, 3, 1.0);
  REQUIRE(groups.size() == 1);
  groups[0].image_id = 5;

  const std::string path = "poses_roundtrip.json";
  save_poses(groups, path);
  auto loaded = load_poses(path, 3);
  std::remove(path.c_str());
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].image_id == 5);
  REQUIRE(loaded[0].keypoints[0].has_value());
  CHECK_FALSE(loaded[0].keypoints[1].has_value());  // empty slot stays empty
  REQUIRE(loaded[0].keypoints[2].has_value());
  CHECK(loaded[0].keypoints[0]->x == doctest::Approx(1.25));
  CHECK(loaded[0].keypoints[2]->score == doctest::Approx(0.4));
  CHECK(loaded[0].group_score == doctest::Approx(groups[0].group_score));

  CHECK_THROWS(parse_poses(poses_to_json(groups), 4));  // wrong channel count
}
