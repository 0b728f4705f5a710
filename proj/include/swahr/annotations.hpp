#pragma once

#include <map>
#include <string>
#include <vector>

#include "swahr/heatmap.hpp"

namespace swahr {

// COCO-compatible annotation JSON: top-level object with an "annotations"
// array; each entry carries "keypoints" (flat x, y, v triples), "bbox"
// ([x, y, w, h]), "area", and "image_id". Unknown fields are ignored on
// read. All entries must agree on the keypoint count.
std::vector<PersonInstance> parse_annotations(const std::string& json_text);
std::vector<PersonInstance> load_annotations(const std::string& path);

std::string annotations_to_json(const std::vector<PersonInstance>& persons);
void save_annotations(const std::vector<PersonInstance>& persons,
                      const std::string& path);

// Split one flat pool by image_id, ascending. Keeps within-image order.
std::map<int, std::vector<PersonInstance>> group_by_image(
    const std::vector<PersonInstance>& persons);

// Tight axis-aligned box over the labeled keypoints (visibility > 0);
// area = w * h. Throws std::invalid_argument if none are labeled.
BBox keypoint_bbox(const PersonInstance& person);

}  // namespace swahr
