// Command-line front end. Talks to the toolkit exclusively through the C API.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ureca_forge.h"

namespace {

struct ConfigHandle {
    uf_config* cfg = nullptr;
    ConfigHandle() {
        uf_config_create(&cfg);
    }
    ~ConfigHandle() {
        uf_config_free(cfg);
    }
};

int fail(const char* what, uf_status status) {
    std::fprintf(stderr, "error: %s: %s\n", what, uf_last_error());
    return status == UF_ERR_HTTP ? 2 : 1;
}

volatile std::sig_atomic_t g_stop_requested = 0;

void handle_signal(int) {
    g_stop_requested = 1; // the serve loop polls; nothing unsafe happens here
}

// CLI flags land in the override layer so they beat config-file values.
struct KeyedOption {
    std::string key;
    std::string value;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Region caption curation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    bool verbose = false;
    std::vector<KeyedOption> overrides;
    auto keyed = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                     const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides.push_back({key, v}); },
            help);
    };

    app.add_option("--config", config_path, "config file (fallback: $URECA_FORGE_CONFIG)");
    app.add_flag("--verbose", verbose, "chatty progress output");
    keyed(&app, "--workdir", "workdir", "working directory for checkpoints and outputs");
    keyed(&app, "--seed", "seed", "seed for encoder weights and mock jitter");

    // tree
    auto* tree = app.add_subcommand("tree", "build a mask tree from per-image annotations");
    std::string tree_input, tree_out;
    tree->add_option("--input", tree_input, "SA-1B-style annotation JSON")->required();
    tree->add_option("--out", tree_out, "output tree JSON")->required();
    keyed(tree, "--tau-contain", "tree.tau_contain", "containment threshold");
    keyed(tree, "--tau-dup", "tree.tau_dup", "duplicate IoU threshold");
    keyed(tree, "--main-depth", "tree.main_depth_threshold", "main-object subtree height");

    // render
    auto* render = app.add_subcommand("render", "write per-node prompt views as PNGs");
    std::string render_input, render_image, render_out;
    render->add_option("--input", render_input, "annotation JSON")->required();
    render->add_option("--image", render_image, "source image (PNG)")->required();
    render->add_option("--out-dir", render_out, "output directory")->required();
    keyed(render, "--sigma", "render.sigma", "context blur strength");
    keyed(render, "--thickness", "render.thickness", "contour thickness (0 = auto)");
    keyed(render, "--margin", "render.margin", "crop margin fraction");

    // annotate / refine
    auto* annotate = app.add_subcommand("annotate", "run caption stages 2-4 (+verify)");
    std::string ann_input, ann_images;
    bool ann_resume = false, ann_fresh = false, ann_verify = false;
    annotate->add_option("--input", ann_input, "annotation JSON or directory")->required();
    annotate->add_option("--images-dir", ann_images, "directory holding the image files");
    annotate->add_flag("--resume", ann_resume, "continue from existing checkpoints");
    annotate->add_flag("--fresh", ann_fresh, "discard existing checkpoints first");
    annotate->add_flag("--verify", ann_verify, "run the judge verification pass");
    keyed(annotate, "--mllm-endpoint", "mllm.endpoint", "annotation model endpoint");
    keyed(annotate, "--embed-endpoint", "embed.endpoint", "embedding service endpoint");
    keyed(annotate, "--judge-endpoint", "judge.endpoint", "verification judge endpoint");
    keyed(annotate, "--prompts-dir", "prompts.dir", "directory overriding prompt templates");

    auto* refine = app.add_subcommand("refine", "re-run stage 4 on completed dense captions");
    std::string ref_input, ref_images;
    refine->add_option("--input", ref_input, "annotation JSON or directory")->required();
    refine->add_option("--images-dir", ref_images, "directory holding the image files");
    keyed(refine, "--mllm-endpoint", "mllm.endpoint", "annotation model endpoint");
    keyed(refine, "--embed-endpoint", "embed.endpoint", "embedding service endpoint");
    keyed(refine, "--prompts-dir", "prompts.dir", "directory overriding prompt templates");

    // encode
    auto* encode = app.add_subcommand("encode", "tokenize a mask with the dynamic encoder");
    std::string enc_mask, enc_weights, enc_out, enc_save_weights;
    bool enc_seeded = false;
    encode->add_option("--mask", enc_mask, "RLE JSON ({\"size\":[h,w],\"counts\":[...]})")
        ->required();
    encode->add_option("--weights", enc_weights, "weight file (header + f32 data)");
    encode->add_flag("--init-seeded", enc_seeded, "derive weights from --seed instead");
    encode->add_option("--save-weights", enc_save_weights, "also write the weights used");
    encode->add_option("--out", enc_out, "output token file")->required();
    keyed(encode, "--tile", "split.tile", "sub-mask tile side");
    keyed(encode, "--max-tiles", "split.max_tiles", "grid tile budget");
    keyed(encode, "--dim", "encoder.dim", "token embedding width");
    keyed(encode, "--token-len", "encoder.token_len", "tokens per tile (4/8/16)");

    // eval
    auto* eval = app.add_subcommand("eval", "score candidate captions against references");
    std::string eval_pred, eval_ref, eval_out, eval_bert;
    bool eval_percent = false;
    eval->add_option("--pred", eval_pred, "prediction JSONL")->required();
    eval->add_option("--ref", eval_ref, "reference JSONL")->required();
    eval->add_option("--out", eval_out, "report JSON")->required();
    eval->add_option("--bert-endpoint", eval_bert, "token-embedding endpoint for BERTScore");
    eval->add_flag("--percent", eval_percent, "report scores x100");

    // export
    auto* exp = app.add_subcommand("export", "join checkpoints into dataset JSONL");
    std::string exp_out;
    exp->add_option("--out", exp_out, "output dataset JSONL")->required();

    // mock-server
    auto* mock = app.add_subcommand("mock-server", "serve scripted inference responses");
    std::string mock_script, mock_host = "127.0.0.1", mock_log;
    int mock_port = 0;
    std::uint64_t mock_seed = 0;
    mock->add_option("--script", mock_script, "mock script JSON")->required();
    mock->add_option("--port", mock_port, "port (0 = ephemeral)");
    mock->add_option("--host", mock_host, "bind host");
    mock->add_option("--log", mock_log, "request log JSONL");
    mock->add_option("--seed", mock_seed, "jitter seed");

    CLI11_PARSE(app, argc, argv);

    ConfigHandle config;
    if (config_path.empty()) {
        if (const char* env = std::getenv("URECA_FORGE_CONFIG")) {
            config_path = env;
        }
    }
    if (!config_path.empty()) {
        if (uf_status s = uf_config_load_file(config.cfg, config_path.c_str()); s != UF_OK) {
            return fail("loading config", s);
        }
    }
    if (verbose) {
        uf_config_set(config.cfg, "verbose", "true");
    }
    for (const auto& kv : overrides) {
        uf_config_set(config.cfg, kv.key.c_str(), kv.value.c_str());
    }

    if (tree->parsed()) {
        if (uf_status s = uf_cmd_tree(config.cfg, tree_input.c_str(), tree_out.c_str());
            s != UF_OK) {
            return fail("tree", s);
        }
        if (verbose) {
            std::fprintf(stderr, "wrote %s\n", tree_out.c_str());
        }
        return 0;
    }

    if (render->parsed()) {
        if (uf_status s = uf_cmd_render(config.cfg, render_input.c_str(), render_image.c_str(),
                                        render_out.c_str());
            s != UF_OK) {
            return fail("render", s);
        }
        return 0;
    }

    if (annotate->parsed()) {
        if (ann_verify) {
            uf_config_set(config.cfg, "verify", "true");
        }
        int failures = 0;
        if (uf_status s =
                uf_cmd_annotate(config.cfg, ann_input.c_str(),
                                ann_images.empty() ? nullptr : ann_images.c_str(),
                                ann_resume ? 1 : 0, ann_fresh ? 1 : 0, &failures);
            s != UF_OK) {
            return fail("annotate", s);
        }
        if (failures > 0) {
            std::fprintf(stderr, "annotate finished with %d failed node(s)\n", failures);
            return 2;
        }
        return 0;
    }

    if (refine->parsed()) {
        int failures = 0;
        if (uf_status s = uf_cmd_refine(config.cfg, ref_input.c_str(),
                                        ref_images.empty() ? nullptr : ref_images.c_str(),
                                        &failures);
            s != UF_OK) {
            return fail("refine", s);
        }
        return failures > 0 ? 2 : 0;
    }

    if (encode->parsed()) {
        if (enc_weights.empty() && !enc_seeded) {
            std::fprintf(stderr, "error: encode needs --weights or --init-seeded\n");
            return 1;
        }
        std::string weights_path = enc_weights;
        if (enc_seeded) {
            char* seed_str = nullptr;
            uf_config_get(config.cfg, "seed", &seed_str);
            char* dim_str = nullptr;
            uf_config_get(config.cfg, "encoder.dim", &dim_str);
            char* len_str = nullptr;
            uf_config_get(config.cfg, "encoder.token_len", &len_str);
            const std::uint64_t seed =
                seed_str && *seed_str ? std::strtoull(seed_str, nullptr, 10) : 0;
            const int dim = dim_str && *dim_str ? std::atoi(dim_str) : 64;
            const int token_len = len_str && *len_str ? std::atoi(len_str) : 8;
            uf_string_free(seed_str);
            uf_string_free(dim_str);
            uf_string_free(len_str);
            uf_weights* weights = nullptr;
            if (uf_status s = uf_weights_seeded(seed, dim, token_len, &weights); s != UF_OK) {
                return fail("seeding weights", s);
            }
            weights_path = enc_save_weights.empty() ? enc_out + ".weights" : enc_save_weights;
            uf_status s = uf_weights_save(weights, weights_path.c_str());
            uf_weights_free(weights);
            if (s != UF_OK) {
                return fail("saving weights", s);
            }
        }
        if (uf_status s = uf_cmd_encode(config.cfg, enc_mask.c_str(), weights_path.c_str(),
                                        enc_out.c_str());
            s != UF_OK) {
            return fail("encode", s);
        }
        return 0;
    }

    if (eval->parsed()) {
        if (!eval_bert.empty()) {
            uf_config_set(config.cfg, "eval.bert_endpoint", eval_bert.c_str());
        }
        char* summary = nullptr;
        if (uf_status s = uf_cmd_eval(config.cfg, eval_pred.c_str(), eval_ref.c_str(),
                                      eval_out.c_str(), eval_percent ? 1 : 0, &summary);
            s != UF_OK) {
            return fail("eval", s);
        }
        std::printf("%s\n", summary);
        uf_string_free(summary);
        return 0;
    }

    if (exp->parsed()) {
        int warnings = 0;
        if (uf_status s = uf_cmd_export(config.cfg, exp_out.c_str(), &warnings); s != UF_OK) {
            return fail("export", s);
        }
        if (warnings > 0) {
            std::fprintf(stderr, "export finished with %d incomplete region(s)\n", warnings);
        }
        return 0;
    }

    if (mock->parsed()) {
        uf_server* server = nullptr;
        if (uf_status s = uf_mock_server_start(mock_script.c_str(), mock_host.c_str(),
                                               mock_port, mock_log.empty() ? nullptr
                                                                           : mock_log.c_str(),
                                               mock_seed, &server);
            s != UF_OK) {
            return fail("mock-server", s);
        }
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        std::printf("listening on %d\n", uf_mock_server_port(server));
        std::fflush(stdout);
        while (!g_stop_requested && uf_mock_server_running(server)) {
            struct timespec nap {0, 50 * 1000 * 1000};
            nanosleep(&nap, nullptr);
        }
        uf_mock_server_stop(server);
        uf_mock_server_free(server);
        return 0;
    }

    return 1;
}
