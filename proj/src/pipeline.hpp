#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "annotations.hpp"
#include "clients.hpp"
#include "config.hpp"
#include "image.hpp"
#include "prompts.hpp"
#include "store.hpp"

namespace ureca {

// Fixed prose for the implicit whole-image root and for empty context slots.
inline constexpr const char* kWholeImageSentence =
    "The entire image, covering every visible object and the background.";
inline constexpr const char* kNoneSentinel = "(none)";
inline constexpr const char* kNoShortSentinel = "(no short description available)";

struct PipelineClients {
    MllmClient* mllm = nullptr;
    MllmClient* judge = nullptr;    // only consulted when cfg.verify is on
    EmbeddingClient* embed = nullptr;
};

struct PipelineOutcome {
    MaskTree tree;
    int failures = 0;
};

// UTC seconds; honors SOURCE_DATE_EPOCH so deterministic runs stay byte-stable.
std::int64_t pipeline_now_utc();

// Trailing context line appended to every composed prompt; lets scripted
// backends key their responses on image/node/template.
std::string request_context_marker(const std::string& image_id, int node_id, TemplateId tpl);

// Stages 1-4 (and verification when configured) for one image, checkpointing
// to <workdir>/<image_id>/state.json after every completed node and appending
// finished records to <workdir>/captions.jsonl. Re-running resumes: completed
// calls are never re-issued and lines are never re-appended.
PipelineOutcome run_pipeline(const ImageAnnotations& entry, const RgbImage& image,
                             const RunConfig& cfg, const PromptSet& prompts,
                             PipelineClients clients);

// Stage-4-only rerun: drops prior unique captions for the image and refines
// again on top of the existing dense captions.
PipelineOutcome run_refine(const ImageAnnotations& entry, const RgbImage& image,
                           const RunConfig& cfg, const PromptSet& prompts,
                           PipelineClients clients);

} // namespace ureca
