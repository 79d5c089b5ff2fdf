#include "store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>

namespace ureca {

nlohmann::ordered_json record_to_json(const CaptionRecord& r) {
    nlohmann::ordered_json doc;
    doc["image_id"] = r.image_id;
    doc["node_id"] = r.node_id;
    doc["stage"] = r.stage;
    doc["text"] = r.text;
    doc["model_id"] = r.model_id;
    doc["prompt_sha256"] = r.prompt_sha256;
    doc["created_at"] = r.created_at;
    doc["status"] = r.status;
    if (r.unverified) {
        doc["unverified"] = true;
    }
    return doc;
}

CaptionRecord record_from_json(const nlohmann::json& doc) {
    CaptionRecord r;
    r.image_id = doc.at("image_id").get<std::string>();
    r.node_id = doc.at("node_id").get<int>();
    r.stage = doc.at("stage").get<std::string>();
    r.text = doc.at("text").get<std::string>();
    r.model_id = doc.at("model_id").get<std::string>();
    r.prompt_sha256 = doc.at("prompt_sha256").get<std::string>();
    r.created_at = doc.at("created_at").get<std::int64_t>();
    r.status = doc.at("status").get<std::string>();
    r.unverified = doc.value("unverified", false);
    return r;
}

namespace {

nlohmann::ordered_json node_result_to_json(const NodeResult& n) {
    nlohmann::ordered_json doc;
    doc["failed"] = n.failed;
    doc["text"] = n.text;
    doc["model_id"] = n.model_id;
    doc["prompt_sha256"] = n.prompt_sha256;
    doc["created_at"] = n.created_at;
    doc["status"] = n.status;
    doc["unverified"] = n.unverified;
    doc["error"] = n.error;
    return doc;
}

NodeResult node_result_from_json(const nlohmann::json& doc) {
    NodeResult n;
    n.failed = doc.at("failed").get<bool>();
    n.text = doc.at("text").get<std::string>();
    n.model_id = doc.at("model_id").get<std::string>();
    n.prompt_sha256 = doc.at("prompt_sha256").get<std::string>();
    n.created_at = doc.at("created_at").get<std::int64_t>();
    n.status = doc.at("status").get<std::string>();
    n.unverified = doc.at("unverified").get<bool>();
    n.error = doc.at("error").get<std::string>();
    return n;
}

nlohmann::ordered_json stage_map_to_json(const std::map<int, NodeResult>& stage) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [node, result] : stage) {
        doc[std::to_string(node)] = node_result_to_json(result);
    }
    return doc;
}

std::map<int, NodeResult> stage_map_from_json(const nlohmann::json& doc) {
    std::map<int, NodeResult> out;
    for (const auto& [key, value] : doc.items()) {
        out[std::stoi(key)] = node_result_from_json(value);
    }
    return out;
}

} // namespace

void save_state(const PipelineState& state, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["image_id"] = state.image_id;
    doc["stage_cursor"] = state.stage_cursor;
    doc["short"] = stage_map_to_json(state.short_caps);
    doc["dense"] = stage_map_to_json(state.dense_caps);
    doc["unique"] = stage_map_to_json(state.unique_caps);
    doc["groups_done"] = state.groups_done;
    auto& groups = doc["groups"] = nlohmann::ordered_json::object();
    for (const auto& [node, group] : state.groups) {
        groups[std::to_string(node)] = group;
    }
    doc["appended"] = state.appended;
    doc["failures"] = state.failures;

    // write-then-rename keeps the checkpoint whole under interruption
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write checkpoint: " + tmp);
        }
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

PipelineState load_state(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open checkpoint: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw StateError("corrupt checkpoint " + path.string() + ": " + e.what());
    }
    PipelineState state;
    state.image_id = doc.at("image_id").get<std::string>();
    state.stage_cursor = doc.at("stage_cursor").get<int>();
    state.short_caps = stage_map_from_json(doc.at("short"));
    state.dense_caps = stage_map_from_json(doc.at("dense"));
    state.unique_caps = stage_map_from_json(doc.at("unique"));
    state.groups_done = doc.at("groups_done").get<bool>();
    for (const auto& [key, value] : doc.at("groups").items()) {
        state.groups[std::stoi(key)] = value.get<std::vector<int>>();
    }
    state.appended = doc.at("appended").get<std::set<std::string>>();
    state.failures = doc.at("failures").get<std::vector<std::string>>();
    return state;
}

void append_jsonl_line(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
    // concurrent image pipelines share one captions.jsonl; keep lines whole
    static std::mutex append_mutex;
    std::lock_guard<std::mutex> lock(append_mutex);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw IoError("cannot append to " + path.string());
    }
    out << doc.dump() << '\n';
    out.flush();
    if (!out) {
        throw IoError("short append to " + path.string());
    }
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<nlohmann::json> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw MalformedInput(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

nlohmann::ordered_json tree_to_json(const MaskTree& tree, const std::vector<BinaryMask>& masks) {
    nlohmann::ordered_json doc;
    doc["image_id"] = tree.image_id();
    doc["width"] = tree.width();
    doc["height"] = tree.height();
    doc["root_id"] = tree.root_id();
    auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes()) {
        nlohmann::ordered_json nd;
        nd["node_id"] = n.node_id;
        nd["mask_ref"] = n.mask_ref ? nlohmann::ordered_json(*n.mask_ref) : nullptr;
        nd["parent_id"] = n.parent_id ? nlohmann::ordered_json(*n.parent_id) : nullptr;
        nd["child_ids"] = n.child_ids;
        nd["depth"] = n.depth;
        nd["subtree_height"] = n.subtree_height;
        if (n.mask_ref) {
            nd["rle"] = rle_to_json(rle_encode(masks[static_cast<std::size_t>(*n.mask_ref)]));
        }
        nodes.push_back(std::move(nd));
    }
    return doc;
}

TreeWithMasks tree_from_json(const nlohmann::json& doc) {
    TreeWithMasks out;
    const int width = doc.at("width").get<int>();
    const int height = doc.at("height").get<int>();
    std::vector<MaskNode> nodes;
    int max_ref = -1;
    for (const auto& nd : doc.at("nodes")) {
        MaskNode n;
        n.node_id = nd.at("node_id").get<int>();
        if (!nd.at("mask_ref").is_null()) {
            n.mask_ref = nd.at("mask_ref").get<int>();
            max_ref = std::max(max_ref, *n.mask_ref);
        }
        if (!nd.at("parent_id").is_null()) {
            n.parent_id = nd.at("parent_id").get<int>();
        }
        n.child_ids = nd.at("child_ids").get<std::vector<int>>();
        n.depth = nd.at("depth").get<int>();
        n.subtree_height = nd.at("subtree_height").get<int>();
        nodes.push_back(std::move(n));
    }
    out.masks.assign(static_cast<std::size_t>(max_ref + 1), BinaryMask(1, 1));
    for (const auto& nd : doc.at("nodes")) {
        if (!nd.at("mask_ref").is_null()) {
            out.masks[nd.at("mask_ref").get<std::size_t>()] =
                rle_decode(parse_rle(nd.at("rle")));
        }
    }
    out.tree = MaskTree(doc.at("image_id").get<std::string>(), width, height, std::move(nodes));
    return out;
}

nlohmann::ordered_json dataset_record_to_json(const DatasetRecord& r) {
    nlohmann::ordered_json doc;
    doc["image_id"] = r.image_id;
    doc["image_path"] = r.image_path;
    doc["width"] = r.width;
    doc["height"] = r.height;
    auto& regions = doc["regions"] = nlohmann::ordered_json::array();
    for (const auto& region : r.regions) {
        nlohmann::ordered_json rd;
        rd["node_id"] = region.node_id;
        rd["parent_id"] = region.parent_id ? nlohmann::ordered_json(*region.parent_id) : nullptr;
        rd["depth"] = region.depth;
        rd["rle"] = rle_to_json(region.rle);
        rd["short_caption"] = region.short_caption;
        rd["dense_caption"] = region.dense_caption;
        rd["unique_caption"] = region.unique_caption;
        rd["status"] = region.status;
        regions.push_back(std::move(rd));
    }
    return doc;
}

DatasetRecord dataset_record_from_json(const nlohmann::json& doc) {
    DatasetRecord r;
    r.image_id = doc.at("image_id").get<std::string>();
    r.image_path = doc.at("image_path").get<std::string>();
    r.width = doc.at("width").get<int>();
    r.height = doc.at("height").get<int>();
    for (const auto& rd : doc.at("regions")) {
        DatasetRegion region;
        region.node_id = rd.at("node_id").get<int>();
        if (!rd.at("parent_id").is_null()) {
            region.parent_id = rd.at("parent_id").get<int>();
        }
        region.depth = rd.at("depth").get<int>();
        region.rle = parse_rle(rd.at("rle"));
        region.short_caption = rd.at("short_caption").get<std::string>();
        region.dense_caption = rd.at("dense_caption").get<std::string>();
        region.unique_caption = rd.at("unique_caption").get<std::string>();
        region.status = rd.at("status").get<std::string>();
        r.regions.push_back(std::move(region));
    }
    return r;
}

int export_dataset(const std::filesystem::path& workdir, const std::filesystem::path& out_path) {
    if (!std::filesystem::is_directory(workdir)) {
        throw IoError("workdir does not exist: " + workdir.string());
    }
    std::vector<std::filesystem::path> image_dirs;
    for (const auto& entry : std::filesystem::directory_iterator(workdir)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "tree.json")) {
            image_dirs.push_back(entry.path());
        }
    }
    std::sort(image_dirs.begin(), image_dirs.end());

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + out_path.string());
    }

    int incomplete = 0;
    for (const auto& dir : image_dirs) {
        nlohmann::json tree_doc;
        {
            std::ifstream in(dir / "tree.json");
            in >> tree_doc;
        }
        TreeWithMasks twm = tree_from_json(tree_doc);
        PipelineState state;
        if (std::filesystem::exists(dir / "state.json")) {
            state = load_state(dir / "state.json");
        }

        DatasetRecord record;
        record.image_id = twm.tree.image_id();
        record.image_path = tree_doc.value("image_path", std::string{});
        record.width = twm.tree.width();
        record.height = twm.tree.height();
        for (const auto& n : twm.tree.nodes()) {
            if (!n.mask_ref) {
                continue; // the root is not a region
            }
            DatasetRegion region;
            region.node_id = n.node_id;
            if (n.parent_id && *n.parent_id != MaskTree::kRootId) {
                region.parent_id = *n.parent_id;
            }
            region.depth = n.depth;
            region.rle = rle_encode(twm.masks[static_cast<std::size_t>(*n.mask_ref)]);
            auto text_of = [&](const std::map<int, NodeResult>& stage) -> std::string {
                const auto it = stage.find(n.node_id);
                return it != stage.end() && !it->second.failed ? it->second.text : std::string{};
            };
            region.short_caption = text_of(state.short_caps);
            region.dense_caption = text_of(state.dense_caps);
            region.unique_caption = text_of(state.unique_caps);
            const auto uit = state.unique_caps.find(n.node_id);
            if (region.dense_caption.empty()) {
                region.status = "incomplete";
                ++incomplete;
            } else if (uit != state.unique_caps.end() && !uit->second.failed) {
                region.status = uit->second.status;
            } else {
                region.status = "incomplete";
                ++incomplete;
            }
            record.regions.push_back(std::move(region));
        }
        out << dataset_record_to_json(record).dump() << '\n';
    }
    if (!out) {
        throw IoError("short write to " + out_path.string());
    }
    return incomplete;
}

} // namespace ureca
