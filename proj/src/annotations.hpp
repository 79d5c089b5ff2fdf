#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mask.hpp"

namespace ureca {

struct RegionAnnotation {
    std::int64_t id = 0;
    RleMask rle;
    std::int64_t area = 0;
};

// One SA-1B-style per-image annotation file:
// {"image": {"image_id", "width", "height", "file_name"},
//  "annotations": [{"id", "segmentation": {"size":[h,w], "counts":[...]}, "area"}, ...]}
struct ImageAnnotations {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::string file_name;
    std::vector<RegionAnnotation> annotations;
};

ImageAnnotations parse_image_annotations(const nlohmann::json& doc);
ImageAnnotations load_image_annotations(const std::filesystem::path& path);

RleMask parse_rle(const nlohmann::json& seg);
nlohmann::ordered_json rle_to_json(const RleMask& rle);

// rle_decode with the annotation id prefixed onto any failure message.
BinaryMask decode_annotation(const RegionAnnotation& ann);

} // namespace ureca
