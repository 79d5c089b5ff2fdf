/* ureca_forge.h — C API of the region-caption curation toolkit.
 *
 * Every function that can fail returns a uf_status; UF_OK means success and
 * anything else leaves a human-readable message in uf_last_error() (per
 * thread). Objects returned through out-parameters are owned by the caller
 * and released with the matching *_free function. Strings returned through
 * char** out-parameters are released with uf_string_free().
 */
#ifndef URECA_FORGE_H
#define URECA_FORGE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uf_status {
    UF_OK = 0,
    UF_ERR_INVALID_ARGUMENT = 1,
    UF_ERR_MALFORMED_INPUT = 2,
    UF_ERR_DIMENSION_MISMATCH = 3,
    UF_ERR_EMPTY_REGION = 4,
    UF_ERR_IO = 5,
    UF_ERR_HTTP = 6,
    UF_ERR_STATE = 7,
    UF_ERR_INTERNAL = 8
} uf_status;

const char* uf_version(void);
const char* uf_last_error(void);
void uf_string_free(char* s);

/* ---- binary masks ----------------------------------------------------- */

typedef struct uf_mask uf_mask;

/* bits: row-major, one byte per pixel, nonzero = set; NULL = all clear. */
uf_status uf_mask_create(int32_t width, int32_t height, const uint8_t* bits, uf_mask** out);
/* json_text: {"size":[height,width],"counts":[...]} uncompressed RLE. */
uf_status uf_mask_from_rle_json(const char* json_text, uf_mask** out);
uf_status uf_mask_to_rle_json(const uf_mask* mask, char** out_json);
int32_t uf_mask_width(const uf_mask* mask);
int32_t uf_mask_height(const uf_mask* mask);
int64_t uf_mask_area(const uf_mask* mask);
/* 1 if the pixel is set, 0 if clear or out of range. */
int uf_mask_get(const uf_mask* mask, int32_t x, int32_t y);
uf_status uf_mask_iou(const uf_mask* a, const uf_mask* b, double* out);
uf_status uf_mask_containment(const uf_mask* a, const uf_mask* b, double* out);
/* Tightest box around the set pixels, half-open on x1/y1. */
uf_status uf_mask_bounding_box(const uf_mask* mask, int32_t* x0, int32_t* y0, int32_t* x1,
                               int32_t* y1);
uf_status uf_mask_resize(const uf_mask* mask, int32_t width, int32_t height, uf_mask** out);
void uf_mask_free(uf_mask* mask);

/* ---- configuration ----------------------------------------------------- */

typedef struct uf_config uf_config;

uf_status uf_config_create(uf_config** out);
uf_status uf_config_load_file(uf_config* cfg, const char* path);
/* Explicit overrides (CLI flags) beat file values, which beat defaults. */
uf_status uf_config_set(uf_config* cfg, const char* dotted_key, const char* value);
/* Resolved value or empty string when the key falls back to a default. */
uf_status uf_config_get(const uf_config* cfg, const char* dotted_key, char** out_value);
void uf_config_free(uf_config* cfg);

/* ---- mask encoder -------------------------------------------------------- */

typedef struct uf_weights uf_weights;
typedef struct uf_tokens uf_tokens;

uf_status uf_weights_seeded(uint64_t seed, int32_t dim, int32_t token_len, uf_weights** out);
uf_status uf_weights_load(const char* path, uf_weights** out);
uf_status uf_weights_save(const uf_weights* weights, const char* path);
void uf_weights_free(uf_weights* weights);

/* tile 0 / max_tiles 0 fall back to the configured defaults (448 / 12). */
uf_status uf_encode_mask(const uf_mask* mask, const uf_weights* weights, int32_t tile,
                         int32_t max_tiles, int with_global_tile, uf_tokens** out);
int32_t uf_tokens_rows(const uf_tokens* tokens);
int32_t uf_tokens_dim(const uf_tokens* tokens);
/* Row-major rows x dim floats, owned by the tokens object. */
const float* uf_tokens_data(const uf_tokens* tokens);
uf_status uf_tokens_save(const uf_tokens* tokens, const char* path);
void uf_tokens_free(uf_tokens* tokens);

/* ---- toolkit commands (the CLI surface) --------------------------------- */

/* Stage 1: build the mask tree from a per-image annotation JSON. */
uf_status uf_cmd_tree(const uf_config* cfg, const char* input_json_path,
                      const char* out_tree_json_path);

/* Render per-node prompt views to <out_dir>/<image_id>/<node>_<view>.png. */
uf_status uf_cmd_render(const uf_config* cfg, const char* input_json_path,
                        const char* image_path, const char* out_dir);

/* Stages 2-4 (+ verification when configured). input_path: one annotation
 * JSON or a directory of them; image file paths resolve against images_dir
 * (or the annotation directory when images_dir is NULL). resume continues
 * from checkpoints; fresh wipes them first. *out_failures receives the count
 * of nodes whose caption calls failed. */
uf_status uf_cmd_annotate(const uf_config* cfg, const char* input_path, const char* images_dir,
                          int resume, int fresh, int* out_failures);

/* Stage-4-only rerun over completed dense captions. */
uf_status uf_cmd_refine(const uf_config* cfg, const char* input_path, const char* images_dir,
                        int* out_failures);

/* Tokenize one mask: RLE JSON in, header+f32 token file out. */
uf_status uf_cmd_encode(const uf_config* cfg, const char* mask_json_path,
                        const char* weights_path, const char* out_tokens_path);

/* Score predictions against references; both JSONL keyed by image_id/node_id.
 * bert_endpoint may be NULL (BERTScore omitted). out_summary (optional)
 * receives the corpus means as a JSON string. */
uf_status uf_cmd_eval(const uf_config* cfg, const char* pred_jsonl, const char* ref_jsonl,
                      const char* out_report_json, int percent, char** out_summary);

/* Join workdir checkpoints into dataset JSONL; returns incomplete-region count. */
uf_status uf_cmd_export(const uf_config* cfg, const char* out_dataset_jsonl,
                        int* out_warning_count);

/* ---- mock inference server ---------------------------------------------- */

typedef struct uf_server uf_server;

/* port 0 binds an ephemeral port; log_path (optional) receives request JSONL. */
uf_status uf_mock_server_start(const char* script_json_path, const char* host, int port,
                               const char* log_path, uint64_t seed, uf_server** out);
int uf_mock_server_port(const uf_server* server);
/* 1 while the serve loop is alive (0 after a POST /_shutdown or stop). */
int uf_mock_server_running(const uf_server* server);
/* Blocks until the server exits (a POST /_shutdown or uf_mock_server_stop). */
uf_status uf_mock_server_wait(uf_server* server);
uf_status uf_mock_server_stop(uf_server* server);
void uf_mock_server_free(uf_server* server);

#ifdef __cplusplus
}
#endif

#endif /* URECA_FORGE_H */
