#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "annotations.hpp"
#include "mask_tree.hpp"

namespace ureca {

struct CaptionRecord {
    std::string image_id;
    int node_id = 0;
    std::string stage; // short | dense | unique
    std::string text;
    std::string model_id;
    std::string prompt_sha256;
    std::int64_t created_at = 0; // UTC seconds
    std::string status = "ok";   // ok | verified | rejected
    bool unverified = false;     // verify-stage client failure left this record unchecked
};

nlohmann::ordered_json record_to_json(const CaptionRecord& r);
CaptionRecord record_from_json(const nlohmann::json& doc);

// Per-node outcome of one stage, cached in state.json so a resumed run never
// re-issues a completed call.
struct NodeResult {
    bool failed = false;
    std::string text;
    std::string model_id;
    std::string prompt_sha256;
    std::int64_t created_at = 0;
    std::string status = "ok";
    bool unverified = false;
    std::string error;
};

struct PipelineState {
    std::string image_id;
    int stage_cursor = 0; // highest fully completed stage (1=tree ... 5=verify)
    std::map<int, NodeResult> short_caps;
    std::map<int, NodeResult> dense_caps;
    std::map<int, NodeResult> unique_caps;
    bool groups_done = false;              // similarity grouping already computed
    std::map<int, std::vector<int>> groups; // node -> its group rotated node-first
    std::set<std::string> appended; // "<stage>/<node_id>" lines already in captions.jsonl
    std::vector<std::string> failures;

    bool done(const std::map<int, NodeResult>& stage, int node) const {
        return stage.count(node) > 0;
    }
};

void save_state(const PipelineState& state, const std::filesystem::path& path);
PipelineState load_state(const std::filesystem::path& path);

// captions.jsonl: one record per line, append-only, LF, UTF-8.
void append_jsonl_line(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Self-contained tree dump: node topology plus each node's RLE.
nlohmann::ordered_json tree_to_json(const MaskTree& tree, const std::vector<BinaryMask>& masks);
struct TreeWithMasks {
    MaskTree tree;
    std::vector<BinaryMask> masks; // indexed by mask_ref
};
TreeWithMasks tree_from_json(const nlohmann::json& doc);

// Dataset line: one image with its regions and per-stage captions.
struct DatasetRegion {
    int node_id = 0;
    std::optional<int> parent_id; // null for children of the root
    int depth = 0;
    RleMask rle;
    std::string short_caption;
    std::string dense_caption;
    std::string unique_caption;
    std::string status; // ok | verified | rejected | incomplete
};

struct DatasetRecord {
    std::string image_id;
    std::string image_path;
    int width = 0;
    int height = 0;
    std::vector<DatasetRegion> regions;
};

nlohmann::ordered_json dataset_record_to_json(const DatasetRecord& r);
DatasetRecord dataset_record_from_json(const nlohmann::json& doc);

// Joins <workdir>/<image_id>/{tree.json,state.json} into dataset lines.
// Returns the number of regions flagged incomplete (missing dense caption).
int export_dataset(const std::filesystem::path& workdir, const std::filesystem::path& out_path);

} // namespace ureca
