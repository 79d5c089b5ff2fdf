#include "pipeline.hpp"

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <optional>
#include <thread>

#include "base64.hpp"
#include "render.hpp"
#include "sha256.hpp"
#include "similarity.hpp"

namespace ureca {

std::int64_t pipeline_now_utc() {
    if (const char* fixed = std::getenv("SOURCE_DATE_EPOCH")) {
        return std::strtoll(fixed, nullptr, 10);
    }
    return static_cast<std::int64_t>(std::time(nullptr));
}

std::string request_context_marker(const std::string& image_id, int node_id, TemplateId tpl) {
    return "[request-context image=" + image_id + " node=" + std::to_string(node_id) +
           " template=" + template_name(tpl) + "]";
}

namespace {

// Index-parallel map with bounded workers; per-task exceptions are captured.
template <typename Fn>
std::vector<std::string> parallel_run(int n, int max_threads, Fn&& fn) {
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    if (n == 0) {
        return errors;
    }
    const int workers = std::min(std::max(1, max_threads), n);
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < workers; ++t) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    return errors;
}

std::string bullet_list(const std::vector<std::string>& items) {
    if (items.empty()) {
        return kNoneSentinel;
    }
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) {
            out += '\n';
        }
        out += "- " + items[i];
    }
    return out;
}

class ImagePipeline {
  public:
    ImagePipeline(const ImageAnnotations& entry, const RgbImage& image, const RunConfig& cfg,
                  const PromptSet& prompts, PipelineClients clients)
        : entry_(entry), image_(image), cfg_(cfg), prompts_(prompts), clients_(clients) {
        image_dir_ = cfg_.workdir / entry_.image_id;
        captions_path_ = cfg_.workdir / "captions.jsonl";
    }

    PipelineOutcome run(bool refine_only) {
        std::filesystem::create_directories(image_dir_);
        stage1_tree();
        if (refine_only) {
            if (state_.stage_cursor < 3) {
                throw StateError("refine requires completed dense captions for image " +
                                 entry_.image_id);
            }
            reset_unique_stage();
        } else {
            stage2_short();
            stage3_dense();
        }
        stage4_unique();
        if (cfg_.verify) {
            verify_unique();
        }
        flush_unique_records();
        PipelineOutcome outcome{*tree_, failures_};
        return outcome;
    }

  private:
    // ---- stage 1: mask tree ------------------------------------------------

    void stage1_tree() {
        masks_.clear();
        for (std::size_t i = 0; i < entry_.annotations.size(); ++i) {
            BinaryMask m = decode_annotation(entry_.annotations[i]);
            if (m.width() != entry_.width || m.height() != entry_.height) {
                throw DimensionMismatch(
                    "annotation id " + std::to_string(entry_.annotations[i].id) +
                    " decodes to " + std::to_string(m.width()) + "x" +
                    std::to_string(m.height()) + ", image is " + std::to_string(entry_.width) +
                    "x" + std::to_string(entry_.height));
            }
            masks_.push_back(std::move(m));
        }
        tree_ = build_tree(entry_.image_id, entry_.width, entry_.height, masks_, cfg_.tree);

        const auto state_path = image_dir_ / "state.json";
        if (std::filesystem::exists(state_path)) {
            state_ = load_state(state_path);
            if (state_.image_id != entry_.image_id) {
                throw StateError("checkpoint belongs to image " + state_.image_id);
            }
        } else {
            state_.image_id = entry_.image_id;
        }

        const auto tree_path = image_dir_ / "tree.json";
        auto doc = tree_to_json(*tree_, masks_);
        doc["image_path"] = entry_.file_name;
        {
            const auto tmp = tree_path.string() + ".tmp";
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << doc.dump(2) << '\n';
            out.close();
            std::filesystem::rename(tmp, tree_path);
        }
        if (state_.stage_cursor < 1) {
            state_.stage_cursor = 1;
            save();
        }
    }

    // ---- stage 2: top-down short captions ----------------------------------

    void stage2_short() {
        const auto mains = main_objects(*tree_, cfg_.tree);
        for (int node : topdown_order(*tree_, mains)) {
            if (state_.short_caps.count(node)) {
                continue;
            }
            const auto& n = tree_->node(node);
            const int parent = *n.parent_id;
            if (parent != MaskTree::kRootId) {
                const auto pit = state_.short_caps.find(parent);
                if (pit == state_.short_caps.end() || pit->second.failed) {
                    fail_node(state_.short_caps, "short", node,
                              "ancestor short caption failed");
                    continue;
                }
            }
            const std::string parent_desc = parent == MaskTree::kRootId
                                                ? kWholeImageSentence
                                                : state_.short_caps.at(parent).text;
            std::vector<std::string> sibling_texts;
            for (int sib : siblings(*tree_, node)) {
                const auto sit = state_.short_caps.find(sib);
                if (sit != state_.short_caps.end() && !sit->second.failed) {
                    sibling_texts.push_back(sit->second.text);
                }
            }
            const std::string prompt =
                render_template(prompts_.get(TemplateId::top_down),
                                {{"parent_desc", parent_desc},
                                 {"sibling_descs", bullet_list(sibling_texts)}}) +
                "\n" + request_context_marker(entry_.image_id, node, TemplateId::top_down);

            const BinaryMask& target = mask_of(node);
            const RgbImage blurred = blur_outside(image_, target, cfg_.render.sigma);
            const RgbImage crop_view = crop_to_region(blurred, target, cfg_.render.margin);
            // Image-1 is the contoured context view, Image-2 the blurred crop,
            // matching the template's input description.
            RgbImage context_view =
                parent == MaskTree::kRootId
                    ? render_stage3_view(image_, target, cfg_.render)
                    : render_stage2_views(image_, target, mask_of(parent), cfg_.render).second;
            try {
                const std::string text = clients_.mllm->complete(
                    prompt, {png_b64(context_view), png_b64(crop_view)});
                complete_node(state_.short_caps, "short", node, text, cfg_.mllm.model, prompt);
            } catch (const HttpError& e) {
                fail_node(state_.short_caps, "short", node, e.what());
            }
        }
        if (state_.stage_cursor < 2) {
            state_.stage_cursor = 2;
            save();
        }
    }

    // ---- stage 3: bottom-up dense captions ---------------------------------

    void stage3_dense() {
        for (int node : bottomup_order(*tree_)) {
            if (state_.dense_caps.count(node)) {
                continue;
            }
            const auto& n = tree_->node(node);
            const auto sit = state_.short_caps.find(node);
            if (sit != state_.short_caps.end() && sit->second.failed) {
                fail_node(state_.dense_caps, "dense", node, "short caption failed");
                continue;
            }
            std::string own_short;
            if (node == MaskTree::kRootId) {
                own_short = kWholeImageSentence;
            } else if (sit != state_.short_caps.end()) {
                own_short = sit->second.text;
            } else {
                own_short = kNoShortSentinel; // node outside every main-object subtree
            }
            std::vector<std::string> child_texts;
            for (int child : n.child_ids) {
                const auto cit = state_.dense_caps.find(child);
                if (cit != state_.dense_caps.end() && !cit->second.failed) {
                    child_texts.push_back(cit->second.text);
                } else {
                    log("warning: dense prompt for node " + std::to_string(node) +
                        " omits child " + std::to_string(child) + " without a dense caption");
                }
            }
            const std::string prompt =
                render_template(prompts_.get(TemplateId::bottom_up),
                                {{"target_caption", own_short},
                                 {"child_descs", bullet_list(child_texts)}}) +
                "\n" + request_context_marker(entry_.image_id, node, TemplateId::bottom_up);
            const BinaryMask target = node == MaskTree::kRootId
                                          ? full_mask(entry_.width, entry_.height)
                                          : mask_of(node);
            try {
                const std::string text = clients_.mllm->complete(
                    prompt, {png_b64(render_stage3_view(image_, target, cfg_.render))});
                complete_node(state_.dense_caps, "dense", node, text, cfg_.mllm.model, prompt);
            } catch (const HttpError& e) {
                fail_node(state_.dense_caps, "dense", node, e.what());
            }
        }
        if (state_.stage_cursor < 3) {
            state_.stage_cursor = 3;
            save();
        }
    }

    // ---- stage 4: uniqueness refinement ------------------------------------

    void stage4_unique() {
        // candidates: every non-root node with a dense caption
        std::vector<int> candidates;
        for (const auto& n : tree_->nodes()) {
            if (n.node_id == MaskTree::kRootId) {
                continue;
            }
            const auto dit = state_.dense_caps.find(n.node_id);
            if (dit != state_.dense_caps.end() && !dit->second.failed) {
                candidates.push_back(n.node_id);
            }
        }

        if (!state_.groups_done) {
            std::vector<std::vector<int>> groups;
            if (clients_.embed && candidates.size() >= 2) {
                std::vector<std::optional<std::vector<double>>> embeddings(candidates.size());
                const auto errors = parallel_run(
                    static_cast<int>(candidates.size()), cfg_.embed_concurrency, [&](int i) {
                        const auto crop = crop_for_embedding(
                            image_, mask_of(candidates[static_cast<std::size_t>(i)]));
                        embeddings[static_cast<std::size_t>(i)] =
                            clients_.embed->embed_image(encode_png(crop));
                    });
                std::vector<int> embedded_ids;
                std::vector<std::vector<double>> embedded_vecs;
                for (std::size_t i = 0; i < candidates.size(); ++i) {
                    if (!errors[i].empty()) {
                        log("warning: embedding failed for node " +
                            std::to_string(candidates[i]) + ": " + errors[i]);
                    } else if (embeddings[i]) {
                        embedded_ids.push_back(candidates[i]);
                        embedded_vecs.push_back(std::move(*embeddings[i]));
                    }
                }
                groups = group_similar(embedded_ids, embedded_vecs, cfg_.sim);
            }
            state_.groups.clear();
            for (const auto& g : groups) {
                for (int member : g) {
                    state_.groups[member] = rotate_to_front(g, member);
                }
            }
            state_.groups_done = true;
            save();
        }
        const std::map<int, std::vector<int>>& group_of = state_.groups;

        // refinement calls for grouped nodes, batched under mllm_concurrency
        std::vector<int> todo;
        for (const auto& [node, group] : group_of) {
            (void)group;
            if (!state_.unique_caps.count(node)) {
                todo.push_back(node);
            }
        }
        struct RefineResult {
            std::string text;
            std::string prompt;
            std::string error;
        };
        for (std::size_t base = 0; base < todo.size();
             base += static_cast<std::size_t>(cfg_.mllm_concurrency)) {
            const int batch = static_cast<int>(
                std::min(static_cast<std::size_t>(cfg_.mllm_concurrency), todo.size() - base));
            std::vector<RefineResult> results(static_cast<std::size_t>(batch));
            const auto errors = parallel_run(batch, cfg_.mllm_concurrency, [&](int k) {
                const int node = todo[base + static_cast<std::size_t>(k)];
                auto& slot = results[static_cast<std::size_t>(k)];
                slot.prompt =
                    render_template(prompts_.get(TemplateId::uniqueness),
                                    {{"target_caption", state_.dense_caps.at(node).text}}) +
                    "\n" + request_context_marker(entry_.image_id, node, TemplateId::uniqueness);
                slot.text = clients_.mllm->complete(
                    slot.prompt, {png_b64(set_of_mark_view(group_of.at(node)))});
            });
            for (int k = 0; k < batch; ++k) {
                const int node = todo[base + static_cast<std::size_t>(k)];
                const auto& slot = results[static_cast<std::size_t>(k)];
                if (errors[static_cast<std::size_t>(k)].empty()) {
                    complete_node(state_.unique_caps, "unique", node, slot.text, cfg_.mllm.model,
                                  slot.prompt, /*defer_append=*/true);
                } else {
                    fail_node(state_.unique_caps, "unique", node,
                              errors[static_cast<std::size_t>(k)]);
                }
            }
        }

        // ungrouped nodes (the root included) copy their dense caption forward
        std::vector<int> all_nodes{MaskTree::kRootId};
        all_nodes.insert(all_nodes.end(), candidates.begin(), candidates.end());
        for (int node : all_nodes) {
            if (state_.unique_caps.count(node) || group_of.count(node)) {
                continue;
            }
            const auto dit = state_.dense_caps.find(node);
            if (dit == state_.dense_caps.end() || dit->second.failed) {
                fail_node(state_.unique_caps, "unique", node, "no dense caption to copy");
                continue;
            }
            NodeResult result;
            result.text = dit->second.text;
            result.model_id = dit->second.model_id;
            result.prompt_sha256 = dit->second.prompt_sha256;
            result.created_at = pipeline_now_utc();
            state_.unique_caps[node] = result;
            save();
        }
        if (state_.stage_cursor < 4) {
            state_.stage_cursor = 4;
            save();
        }
    }

    // ---- verification -------------------------------------------------------

    void verify_unique() {
        if (!clients_.judge) {
            throw InvalidArgument("verification requested without a judge client");
        }
        if (state_.stage_cursor >= 5) {
            return;
        }
        for (auto& [node, result] : state_.unique_caps) {
            if (result.failed || result.status != "ok" || result.unverified) {
                continue;
            }
            const std::string prompt =
                render_template(prompts_.get(TemplateId::verify),
                                {{"target_caption", result.text}}) +
                "\n" + request_context_marker(entry_.image_id, node, TemplateId::verify);
            const auto git = state_.groups.find(node);
            const std::vector<int> group =
                git != state_.groups.end() ? git->second : std::vector<int>{node};
            std::string image_b64;
            if (node == MaskTree::kRootId) {
                image_b64 = png_b64(
                    render_set_of_mark(image_, {full_mask(entry_.width, entry_.height)},
                                       cfg_.render));
            } else {
                image_b64 = png_b64(set_of_mark_view(group));
            }
            try {
                bool verified = false;
                // one re-ask on unparseable judge output, then rejected
                for (int ask = 0; ask < 2; ++ask) {
                    const std::string answer = clients_.judge->complete(prompt, {image_b64});
                    const auto verdict = parse_verdict(answer);
                    if (verdict) {
                        verified = verdict->first && verdict->second;
                        break;
                    }
                    if (ask == 1) {
                        log("judge output unparseable twice for node " + std::to_string(node));
                    }
                }
                result.status = verified ? "verified" : "rejected";
            } catch (const HttpError& e) {
                result.unverified = true; // left status=ok
                log("warning: verification unavailable for node " + std::to_string(node) + ": " +
                    e.what());
            }
            save();
        }
        state_.stage_cursor = 5;
        save();
    }

    static std::optional<std::pair<bool, bool>> parse_verdict(const std::string& answer) {
        nlohmann::json doc = nlohmann::json::parse(answer, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("accurate") ||
            !doc.contains("unique") || !doc.at("accurate").is_boolean() ||
            !doc.at("unique").is_boolean()) {
            return std::nullopt;
        }
        return std::make_pair(doc.at("accurate").get<bool>(), doc.at("unique").get<bool>());
    }

    // Unique records reach captions.jsonl only after their status is final.
    void flush_unique_records() {
        for (const auto& [node, result] : state_.unique_caps) {
            if (result.failed) {
                continue;
            }
            append_record("unique", node, result);
        }
        save();
    }

    void reset_unique_stage() {
        state_.unique_caps.clear();
        state_.groups.clear();
        state_.groups_done = false;
        for (auto it = state_.appended.begin(); it != state_.appended.end();) {
            if (it->rfind("unique/", 0) == 0) {
                it = state_.appended.erase(it);
            } else {
                ++it;
            }
        }
        state_.stage_cursor = 3;
        save();
    }

    // ---- shared helpers ------------------------------------------------------

    const BinaryMask& mask_of(int node) const {
        return masks_[static_cast<std::size_t>(*tree_->node(node).mask_ref)];
    }

    RgbImage set_of_mark_view(const std::vector<int>& group) const {
        std::vector<BinaryMask> group_masks;
        for (int id : group) {
            group_masks.push_back(mask_of(id));
        }
        return render_set_of_mark(image_, group_masks, cfg_.render);
    }

    std::string png_b64(const RgbImage& img) const {
        return base64_encode(encode_png(img));
    }

    void complete_node(std::map<int, NodeResult>& stage_map, const std::string& stage, int node,
                       const std::string& text, const std::string& model,
                       const std::string& prompt, bool defer_append = false) {
        NodeResult result;
        result.text = text;
        result.model_id = model;
        result.prompt_sha256 = sha256_hex(prompt);
        result.created_at = pipeline_now_utc();
        stage_map[node] = result;
        if (!defer_append && stage != "unique") {
            append_record(stage, node, result);
        }
        save();
    }

    void fail_node(std::map<int, NodeResult>& stage_map, const std::string& stage, int node,
                   const std::string& error) {
        NodeResult result;
        result.failed = true;
        result.error = error;
        result.created_at = pipeline_now_utc();
        stage_map[node] = result;
        ++failures_;
        log("stage " + stage + " failed for node " + std::to_string(node) + ": " + error);
        save();
    }

    void append_record(const std::string& stage, int node, const NodeResult& result) {
        const std::string key = stage + "/" + std::to_string(node);
        if (state_.appended.count(key)) {
            return;
        }
        CaptionRecord record;
        record.image_id = entry_.image_id;
        record.node_id = node;
        record.stage = stage;
        record.text = result.text;
        record.model_id = result.model_id;
        record.prompt_sha256 = result.prompt_sha256;
        record.created_at = result.created_at;
        record.status = result.status;
        record.unverified = result.unverified;
        append_jsonl_line(captions_path_, record_to_json(record));
        state_.appended.insert(key);
    }

    void log(const std::string& line) {
        state_.failures.push_back(line);
    }

    void save() {
        save_state(state_, image_dir_ / "state.json");
    }

    const ImageAnnotations& entry_;
    const RgbImage& image_;
    const RunConfig& cfg_;
    const PromptSet& prompts_;
    PipelineClients clients_;

    std::filesystem::path image_dir_;
    std::filesystem::path captions_path_;
    std::vector<BinaryMask> masks_;
    std::optional<MaskTree> tree_;
    PipelineState state_;
    int failures_ = 0;
};

} // namespace

PipelineOutcome run_pipeline(const ImageAnnotations& entry, const RgbImage& image,
                             const RunConfig& cfg, const PromptSet& prompts,
                             PipelineClients clients) {
    if (!clients.mllm) {
        throw InvalidArgument("pipeline requires an annotation client");
    }
    ImagePipeline pipeline(entry, image, cfg, prompts, clients);
    return pipeline.run(/*refine_only=*/false);
}

PipelineOutcome run_refine(const ImageAnnotations& entry, const RgbImage& image,
                           const RunConfig& cfg, const PromptSet& prompts,
                           PipelineClients clients) {
    if (!clients.mllm) {
        throw InvalidArgument("pipeline requires an annotation client");
    }
    ImagePipeline pipeline(entry, image, cfg, prompts, clients);
    return pipeline.run(/*refine_only=*/true);
}

} // namespace ureca
