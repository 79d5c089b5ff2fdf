#include "ureca_forge.h"

#include <cstring>
#include <fstream>
#include <mutex>

#include "annotations.hpp"
#include "clients.hpp"
#include "config.hpp"
#include "encoder.hpp"
#include "errors.hpp"
#include "image.hpp"
#include "mask.hpp"
#include "mask_tree.hpp"
#include "metrics.hpp"
#include "mock_server.hpp"
#include "pipeline.hpp"
#include "prompts.hpp"
#include "render.hpp"
#include "store.hpp"

struct uf_mask {
    ureca::BinaryMask value;
};
struct uf_config {
    ureca::Config value;
};
struct uf_weights {
    ureca::EncoderWeights value;
};
struct uf_tokens {
    ureca::MaskTokens value;
};
struct uf_server {
    std::unique_ptr<ureca::MockServer> value;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) {
    g_last_error = message;
}

template <typename Fn>
uf_status guarded(Fn&& fn) {
    try {
        fn();
        return UF_OK;
    } catch (const ureca::InvalidArgument& e) {
        set_error(e.what());
        return UF_ERR_INVALID_ARGUMENT;
    } catch (const ureca::MalformedInput& e) {
        set_error(e.what());
        return UF_ERR_MALFORMED_INPUT;
    } catch (const ureca::DimensionMismatch& e) {
        set_error(e.what());
        return UF_ERR_DIMENSION_MISMATCH;
    } catch (const ureca::EmptyRegion& e) {
        set_error(e.what());
        return UF_ERR_EMPTY_REGION;
    } catch (const ureca::IoError& e) {
        set_error(e.what());
        return UF_ERR_IO;
    } catch (const ureca::HttpError& e) {
        set_error(e.what());
        return UF_ERR_HTTP;
    } catch (const ureca::StateError& e) {
        set_error(e.what());
        return UF_ERR_STATE;
    } catch (const std::exception& e) {
        set_error(e.what());
        return UF_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return UF_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

uf_status require(bool cond, const char* message) {
    if (!cond) {
        set_error(message);
        return UF_ERR_INVALID_ARGUMENT;
    }
    return UF_OK;
}

} // namespace

extern "C" {

const char* uf_version(void) {
    return "0.1.0";
}

const char* uf_last_error(void) {
    return g_last_error.c_str();
}

void uf_string_free(char* s) {
    std::free(s);
}

/* ---- masks ----------------------------------------------------------- */

uf_status uf_mask_create(int32_t width, int32_t height, const uint8_t* bits, uf_mask** out) {
    if (const uf_status s = require(out != nullptr, "out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] {
        ureca::BinaryMask m(width, height);
        if (bits) {
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    if (bits[static_cast<std::size_t>(y) * width + x]) {
                        m.set(x, y, true);
                    }
                }
            }
        }
        *out = new uf_mask{std::move(m)};
    });
}

uf_status uf_mask_from_rle_json(const char* json_text, uf_mask** out) {
    if (const uf_status s = require(json_text && out, "json_text/out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::exception& e) {
            throw ureca::MalformedInput(std::string("invalid RLE JSON: ") + e.what());
        }
        *out = new uf_mask{ureca::rle_decode(ureca::parse_rle(doc))};
    });
}

uf_status uf_mask_to_rle_json(const uf_mask* mask, char** out_json) {
    if (const uf_status s = require(mask && out_json, "mask/out_json is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] {
        *out_json = dup_string(ureca::rle_to_json(ureca::rle_encode(mask->value)).dump());
    });
}

int32_t uf_mask_width(const uf_mask* mask) {
    return mask ? mask->value.width() : 0;
}

int32_t uf_mask_height(const uf_mask* mask) {
    return mask ? mask->value.height() : 0;
}

int64_t uf_mask_area(const uf_mask* mask) {
    return mask ? ureca::area(mask->value) : 0;
}

int uf_mask_get(const uf_mask* mask, int32_t x, int32_t y) {
    if (!mask || x < 0 || y < 0 || x >= mask->value.width() || y >= mask->value.height()) {
        return 0;
    }
    return mask->value.at(x, y) ? 1 : 0;
}

uf_status uf_mask_iou(const uf_mask* a, const uf_mask* b, double* out) {
    if (const uf_status s = require(a && b && out, "a/b/out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { *out = ureca::iou(a->value, b->value); });
}

uf_status uf_mask_containment(const uf_mask* a, const uf_mask* b, double* out) {
    if (const uf_status s = require(a && b && out, "a/b/out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { *out = ureca::containment(a->value, b->value); });
}

uf_status uf_mask_bounding_box(const uf_mask* mask, int32_t* x0, int32_t* y0, int32_t* x1,
                               int32_t* y1) {
    if (const uf_status s = require(mask && x0 && y0 && x1 && y1, "argument is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const ureca::PixelBox box = ureca::bounding_box(mask->value);
        *x0 = box.x0;
        *y0 = box.y0;
        *x1 = box.x1;
        *y1 = box.y1;
    });
}

uf_status uf_mask_resize(const uf_mask* mask, int32_t width, int32_t height, uf_mask** out) {
    if (const uf_status s = require(mask && out, "mask/out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] {
        *out = new uf_mask{ureca::resize_nearest(mask->value, width, height)};
    });
}

void uf_mask_free(uf_mask* mask) {
    delete mask;
}

/* ---- configuration ------------------------------------------------------ */

uf_status uf_config_create(uf_config** out) {
    if (const uf_status s = require(out != nullptr, "out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { *out = new uf_config{}; });
}

uf_status uf_config_load_file(uf_config* cfg, const char* path) {
    if (const uf_status s = require(cfg && path, "cfg/path is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { cfg->value.load_file(path); });
}

uf_status uf_config_set(uf_config* cfg, const char* dotted_key, const char* value) {
    if (const uf_status s = require(cfg && dotted_key && value, "cfg/key/value is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] { cfg->value.set_override(dotted_key, value); });
}

uf_status uf_config_get(const uf_config* cfg, const char* dotted_key, char** out_value) {
    if (const uf_status s = require(cfg && dotted_key && out_value, "cfg/key/out is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const auto v = cfg->value.get(dotted_key);
        *out_value = dup_string(v.value_or(""));
    });
}

void uf_config_free(uf_config* cfg) {
    delete cfg;
}

/* ---- encoder -------------------------------------------------------------- */

uf_status uf_weights_seeded(uint64_t seed, int32_t dim, int32_t token_len, uf_weights** out) {
    if (const uf_status s = require(out != nullptr, "out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { *out = new uf_weights{ureca::seeded_weights(seed, dim, token_len)}; });
}

uf_status uf_weights_load(const char* path, uf_weights** out) {
    if (const uf_status s = require(path && out, "path/out is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { *out = new uf_weights{ureca::load_weights(path)}; });
}

uf_status uf_weights_save(const uf_weights* weights, const char* path) {
    if (const uf_status s = require(weights && path, "weights/path is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { ureca::save_weights(weights->value, path); });
}

void uf_weights_free(uf_weights* weights) {
    delete weights;
}

uf_status uf_encode_mask(const uf_mask* mask, const uf_weights* weights, int32_t tile,
                         int32_t max_tiles, int with_global_tile, uf_tokens** out) {
    if (const uf_status s = require(mask && weights && out, "mask/weights/out is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        ureca::SplitConfig cfg;
        if (tile > 0) {
            cfg.tile = tile;
        }
        if (max_tiles > 0) {
            cfg.max_tiles = max_tiles;
        }
        cfg.global_tile = with_global_tile != 0;
        *out = new uf_tokens{
            ureca::encode(ureca::split_mask(mask->value, cfg), weights->value)};
    });
}

int32_t uf_tokens_rows(const uf_tokens* tokens) {
    return tokens ? tokens->value.rows : 0;
}

int32_t uf_tokens_dim(const uf_tokens* tokens) {
    return tokens ? tokens->value.dim : 0;
}

const float* uf_tokens_data(const uf_tokens* tokens) {
    return tokens ? tokens->value.data.data() : nullptr;
}

uf_status uf_tokens_save(const uf_tokens* tokens, const char* path) {
    if (const uf_status s = require(tokens && path, "tokens/path is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { ureca::save_tokens(tokens->value, path); });
}

void uf_tokens_free(uf_tokens* tokens) {
    delete tokens;
}

/* ---- toolkit commands ------------------------------------------------------ */

namespace {

using ureca::RunConfig;

std::vector<std::filesystem::path> collect_inputs(const std::filesystem::path& input_path) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(input_path)) {
        for (const auto& entry : std::filesystem::directory_iterator(input_path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw ureca::IoError("no .json annotation files under " + input_path.string());
        }
    } else if (std::filesystem::exists(input_path)) {
        files.push_back(input_path);
    } else {
        throw ureca::IoError("input not found: " + input_path.string());
    }
    return files;
}

ureca::PromptSet prompts_for(const RunConfig& run) {
    return run.prompts_dir.empty() ? ureca::PromptSet::embedded_defaults()
                                   : ureca::PromptSet::load_dir(run.prompts_dir);
}

ureca::RgbImage load_entry_image(const ureca::ImageAnnotations& entry,
                                 const std::filesystem::path& annotation_path,
                                 const char* images_dir) {
    if (entry.file_name.empty()) {
        throw ureca::MalformedInput("annotation for image " + entry.image_id +
                                    " lacks a file_name to load pixels from");
    }
    const std::filesystem::path base =
        images_dir ? std::filesystem::path(images_dir) : annotation_path.parent_path();
    return ureca::read_png(base / entry.file_name);
}

int annotate_images(const RunConfig& run, const char* input_path, const char* images_dir,
                    bool resume, bool fresh, bool refine_only) {
    const auto files = collect_inputs(input_path);
    const auto prompts = prompts_for(run);
    std::filesystem::create_directories(run.workdir);

    ureca::HttpMllmClient mllm(run.mllm);
    ureca::HttpMllmClient judge(run.judge);
    std::optional<ureca::HttpEmbeddingClient> embed;
    if (!run.embed.endpoint.empty()) {
        embed.emplace(run.embed);
    }
    ureca::PipelineClients clients;
    clients.mllm = &mllm;
    clients.judge = run.verify ? &judge : nullptr;
    clients.embed = embed ? &*embed : nullptr;

    struct Job {
        std::filesystem::path path;
        ureca::ImageAnnotations entry;
    };
    std::vector<Job> jobs;
    for (const auto& file : files) {
        Job job{file, ureca::load_image_annotations(file)};
        const auto state_path = run.workdir / job.entry.image_id / "state.json";
        if (!refine_only && std::filesystem::exists(state_path)) {
            if (fresh) {
                std::filesystem::remove_all(run.workdir / job.entry.image_id);
            } else if (!resume) {
                throw ureca::StateError("checkpoint exists for image " + job.entry.image_id +
                                        "; pass resume to continue or fresh to discard");
            }
        }
        jobs.push_back(std::move(job));
    }

    std::atomic<int> failures{0};
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(jobs.size());
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) {
                return;
            }
            try {
                const ureca::RgbImage image =
                    load_entry_image(jobs[i].entry, jobs[i].path, images_dir);
                const auto outcome =
                    refine_only
                        ? ureca::run_refine(jobs[i].entry, image, run, prompts, clients)
                        : ureca::run_pipeline(jobs[i].entry, image, run, prompts, clients);
                failures += outcome.failures;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int workers =
        std::min<std::size_t>(static_cast<std::size_t>(run.image_concurrency), jobs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i].empty()) {
            throw ureca::StateError("image " + jobs[i].entry.image_id + ": " + errors[i]);
        }
    }
    return failures.load();
}

} // namespace

uf_status uf_cmd_tree(const uf_config* cfg, const char* input_json_path,
                      const char* out_tree_json_path) {
    if (const uf_status s = require(cfg && input_json_path && out_tree_json_path,
                                    "cfg/input/output is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const RunConfig run = RunConfig::resolve(cfg->value);
        const auto entry = ureca::load_image_annotations(input_json_path);
        std::vector<ureca::BinaryMask> masks;
        for (const auto& ann : entry.annotations) {
            ureca::BinaryMask m = ureca::decode_annotation(ann);
            if (m.width() != entry.width || m.height() != entry.height) {
                throw ureca::DimensionMismatch(
                    "annotation id " + std::to_string(ann.id) + " decodes to " +
                    std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                    ", image is " + std::to_string(entry.width) + "x" +
                    std::to_string(entry.height));
            }
            masks.push_back(std::move(m));
        }
        const auto tree =
            ureca::build_tree(entry.image_id, entry.width, entry.height, masks, run.tree);
        auto doc = ureca::tree_to_json(tree, masks);
        doc["image_path"] = entry.file_name;
        std::ofstream out(out_tree_json_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ureca::IoError(std::string("cannot write ") + out_tree_json_path);
        }
        out << doc.dump(2) << '\n';
    });
}

uf_status uf_cmd_render(const uf_config* cfg, const char* input_json_path,
                        const char* image_path, const char* out_dir) {
    if (const uf_status s =
            require(cfg && input_json_path && image_path && out_dir, "argument is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const RunConfig run = RunConfig::resolve(cfg->value);
        const auto entry = ureca::load_image_annotations(input_json_path);
        const ureca::RgbImage image = ureca::read_png(image_path);
        if (image.width() != entry.width || image.height() != entry.height) {
            throw ureca::DimensionMismatch("image file is " + std::to_string(image.width()) +
                                           "x" + std::to_string(image.height()) +
                                           ", annotations say " + std::to_string(entry.width) +
                                           "x" + std::to_string(entry.height));
        }
        std::vector<ureca::BinaryMask> masks;
        for (const auto& ann : entry.annotations) {
            masks.push_back(ureca::decode_annotation(ann));
        }
        const auto tree =
            ureca::build_tree(entry.image_id, entry.width, entry.height, masks, run.tree);
        const auto dir = std::filesystem::path(out_dir) / entry.image_id;
        std::filesystem::create_directories(dir);
        for (const auto& node : tree.nodes()) {
            if (!node.mask_ref) {
                continue;
            }
            const auto& target = masks[static_cast<std::size_t>(*node.mask_ref)];
            const std::string stem = std::to_string(node.node_id);
            const ureca::RgbImage blurred = blur_outside(image, target, run.render.sigma);
            ureca::write_png(crop_to_region(blurred, target, run.render.margin),
                             dir / (stem + "_crop.png"));
            if (*node.parent_id == ureca::MaskTree::kRootId) {
                ureca::write_png(render_stage3_view(image, target, run.render),
                                 dir / (stem + "_context.png"));
            } else {
                const auto& parent =
                    masks[static_cast<std::size_t>(*tree.node(*node.parent_id).mask_ref)];
                ureca::write_png(
                    render_stage2_views(image, target, parent, run.render).second,
                    dir / (stem + "_context.png"));
            }
            ureca::write_png(render_stage3_view(image, target, run.render),
                             dir / (stem + "_contour.png"));
        }
    });
}

uf_status uf_cmd_annotate(const uf_config* cfg, const char* input_path, const char* images_dir,
                          int resume, int fresh, int* out_failures) {
    if (const uf_status s = require(cfg && input_path, "cfg/input is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const RunConfig run = RunConfig::resolve(cfg->value);
        const int failures =
            annotate_images(run, input_path, images_dir, resume != 0, fresh != 0, false);
        if (out_failures) {
            *out_failures = failures;
        }
    });
}

uf_status uf_cmd_refine(const uf_config* cfg, const char* input_path, const char* images_dir,
                        int* out_failures) {
    if (const uf_status s = require(cfg && input_path, "cfg/input is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const RunConfig run = RunConfig::resolve(cfg->value);
        const int failures = annotate_images(run, input_path, images_dir, true, false, true);
        if (out_failures) {
            *out_failures = failures;
        }
    });
}

uf_status uf_cmd_encode(const uf_config* cfg, const char* mask_json_path,
                        const char* weights_path, const char* out_tokens_path) {
    if (const uf_status s = require(cfg && mask_json_path && weights_path && out_tokens_path,
                                    "argument is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const RunConfig run = RunConfig::resolve(cfg->value);
        std::ifstream in(mask_json_path);
        if (!in) {
            throw ureca::IoError(std::string("cannot open ") + mask_json_path);
        }
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ureca::MalformedInput(std::string("invalid RLE JSON: ") + e.what());
        }
        const ureca::BinaryMask mask = ureca::rle_decode(ureca::parse_rle(doc));
        const ureca::EncoderWeights weights = ureca::load_weights(weights_path);
        ureca::save_tokens(ureca::encode(ureca::split_mask(mask, run.split), weights),
                           out_tokens_path);
    });
}

uf_status uf_cmd_eval(const uf_config* cfg, const char* pred_jsonl, const char* ref_jsonl,
                      const char* out_report_json, int percent, char** out_summary) {
    if (const uf_status s =
            require(cfg && pred_jsonl && ref_jsonl && out_report_json, "argument is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const RunConfig run = RunConfig::resolve(cfg->value);
        const auto preds = ureca::load_caption_jsonl(pred_jsonl);
        const auto refs = ureca::load_caption_jsonl(ref_jsonl);
        std::optional<ureca::HttpEmbeddingClient> embedder;
        if (const auto endpoint = cfg->value.get("eval.bert_endpoint");
            endpoint && !endpoint->empty()) {
            ureca::ClientConfig client = run.embed;
            client.endpoint = *endpoint;
            embedder.emplace(client);
        }
        const auto report =
            ureca::evaluate_corpus(preds, refs, embedder ? &*embedder : nullptr);
        const auto doc = ureca::report_to_json(report, percent != 0);
        std::ofstream out(out_report_json, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ureca::IoError(std::string("cannot write ") + out_report_json);
        }
        out << doc.dump(2) << '\n';
        if (out_summary) {
            *out_summary = dup_string(doc.at("mean").dump());
        }
    });
}

uf_status uf_cmd_export(const uf_config* cfg, const char* out_dataset_jsonl,
                        int* out_warning_count) {
    if (const uf_status s = require(cfg && out_dataset_jsonl, "cfg/output is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        const RunConfig run = RunConfig::resolve(cfg->value);
        const int warnings = ureca::export_dataset(run.workdir, out_dataset_jsonl);
        if (out_warning_count) {
            *out_warning_count = warnings;
        }
    });
}

/* ---- mock server -------------------------------------------------------- */

uf_status uf_mock_server_start(const char* script_json_path, const char* host, int port,
                               const char* log_path, uint64_t seed, uf_server** out) {
    if (const uf_status s = require(script_json_path && out, "script/out is NULL");
        s != UF_OK) {
        return s;
    }
    return guarded([&] {
        auto server = std::make_unique<ureca::MockServer>(
            ureca::MockScript::load(script_json_path), seed);
        if (log_path) {
            server->set_log_file(log_path);
        }
        server->start(host ? host : "127.0.0.1", port);
        *out = new uf_server{std::move(server)};
    });
}

int uf_mock_server_port(const uf_server* server) {
    return server ? server->value->port() : 0;
}

int uf_mock_server_running(const uf_server* server) {
    return server && server->value->running() ? 1 : 0;
}

uf_status uf_mock_server_wait(uf_server* server) {
    if (const uf_status s = require(server != nullptr, "server is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { server->value->wait(); });
}

uf_status uf_mock_server_stop(uf_server* server) {
    if (const uf_status s = require(server != nullptr, "server is NULL"); s != UF_OK) {
        return s;
    }
    return guarded([&] { server->value->stop(); });
}

void uf_mock_server_free(uf_server* server) {
    delete server;
}

} // extern "C"
