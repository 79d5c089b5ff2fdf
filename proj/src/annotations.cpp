#include "annotations.hpp"

#include <fstream>

namespace ureca {

namespace {

std::string id_to_string(const nlohmann::json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<std::int64_t>());
    }
    throw MalformedInput("image_id must be a string or integer");
}

} // namespace

RleMask parse_rle(const nlohmann::json& seg) {
    if (!seg.is_object() || !seg.contains("size") || !seg.contains("counts")) {
        throw MalformedInput("segmentation must be an object with \"size\" and \"counts\"");
    }
    const auto& size = seg.at("size");
    if (!size.is_array() || size.size() != 2) {
        throw MalformedInput("segmentation size must be [height, width]");
    }
    const auto& counts = seg.at("counts");
    if (counts.is_string()) {
        throw MalformedInput(
            "string-encoded (compressed) RLE counts are unsupported; expected uncompressed "
            "integer counts");
    }
    if (!counts.is_array()) {
        throw MalformedInput("counts must be an array of run lengths");
    }
    RleMask rle;
    rle.height = size.at(0).get<int>();
    rle.width = size.at(1).get<int>();
    for (const auto& c : counts) {
        if (!c.is_number_integer() && !c.is_number_unsigned()) {
            throw MalformedInput("counts must contain integers only");
        }
        rle.counts.push_back(c.get<std::int64_t>());
    }
    return rle;
}

nlohmann::ordered_json rle_to_json(const RleMask& rle) {
    return nlohmann::ordered_json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

ImageAnnotations parse_image_annotations(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("image")) {
        throw MalformedInput("annotation file must contain an \"image\" object");
    }
    const auto& img = doc.at("image");
    ImageAnnotations out;
    out.image_id = id_to_string(img.at("image_id"));
    out.width = img.at("width").get<int>();
    out.height = img.at("height").get<int>();
    if (img.contains("file_name")) {
        out.file_name = img.at("file_name").get<std::string>();
    }
    if (out.width < 1 || out.height < 1) {
        throw MalformedInput("image dimensions must be >= 1");
    }
    if (doc.contains("annotations")) {
        for (const auto& ann : doc.at("annotations")) {
            RegionAnnotation region;
            region.id = ann.at("id").get<std::int64_t>();
            try {
                region.rle = parse_rle(ann.at("segmentation"));
            } catch (const MalformedInput& e) {
                throw MalformedInput("annotation id " + std::to_string(region.id) + ": " +
                                     e.what());
            }
            if (ann.contains("area")) {
                region.area = ann.at("area").get<std::int64_t>();
            }
            out.annotations.push_back(std::move(region));
        }
    }
    return out;
}

BinaryMask decode_annotation(const RegionAnnotation& ann) {
    try {
        return rle_decode(ann.rle);
    } catch (const MalformedInput& e) {
        throw MalformedInput("annotation id " + std::to_string(ann.id) + ": " + e.what());
    }
}

ImageAnnotations load_image_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open annotation file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput("invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_image_annotations(doc);
}

} // namespace ureca
