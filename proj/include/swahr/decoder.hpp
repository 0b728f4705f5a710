#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swahr/grid.hpp"

namespace swahr {

struct Detection {
  int channel = 0;
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
  std::optional<double> tag;
};

struct PoseGroup {
  // one slot per channel; empty slot = keypoint not detected
  std::vector<std::optional<Detection>> keypoints;
  double group_score = 0.0;  // mean score of the present slots
  double group_tag = 0.0;    // running mean of member tags
  int image_id = 0;
};

// Strict 3x3 local maxima per channel (all eight neighbors smaller; border
// cells only compare in-bounds neighbors), score >= score_floor, strongest
// max_per_channel kept. Ordering: score descending, then row-major cell
// index ascending. A constant channel has no peaks.
std::vector<Detection> find_peaks(const HeatmapStack& pred,
                                  int max_per_channel, double score_floor);

// Quarter-pixel refinement: shift 0.25 along each axis toward the larger
// in-bounds neighbor. Equal neighbors or a border in that axis leave the
// coordinate unshifted.
Detection refine_subpixel(const HeatmapStack& pred, const Detection& det);

// Copies each detection's tag from the tag map cell under its peak
// (coordinates rounded to the nearest cell).
std::vector<Detection> attach_tags(const std::vector<Detection>& dets,
                                   const Tensor3& tag_maps);

// Bilinear resample of each stack to out_height x out_width (half-pixel
// centers, edge clamp), then pixel-wise mean. Channel counts must agree.
HeatmapStack aggregate_heatmaps(const std::vector<HeatmapStack>& stacks,
                                int out_height, int out_width);

// Average with a horizontally mirrored prediction: the flipped stack is
// mirrored back (x -> width-1-x) and channels are swapped by flip_pairs
// before averaging. flip_pairs must be an involution on [0, channels).
HeatmapStack flip_merge(const HeatmapStack& pred,
                        const HeatmapStack& pred_flipped,
                        const std::vector<std::pair<int, int>>& flip_pairs);

// Greedy 1-D tag grouping. Channels are processed in index order, within a
// channel by score descending. A detection joins the group whose running
// mean tag is nearest among groups with that channel still empty, if the
// distance is < tag_threshold; otherwise it starts a new group. Ties go to
// the older group.
std::vector<PoseGroup> group_by_tags(const std::vector<Detection>& dets,
                                     int channels, double tag_threshold);

// Pose JSON: array of {"image_id", "keypoints" (flat x, y, score triples,
// zeros for empty slots), "score"}. A slot is present iff its score > 0.
std::string poses_to_json(const std::vector<PoseGroup>& poses);
std::vector<PoseGroup> parse_poses(const std::string& json_text,
                                   int channels);
void save_poses(const std::vector<PoseGroup>& poses, const std::string& path);
std::vector<PoseGroup> load_poses(const std::string& path, int channels);

}  // namespace swahr
