#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "clients.hpp"
#include "encoder.hpp"
#include "mask_tree.hpp"
#include "render.hpp"
#include "similarity.hpp"

namespace ureca {

// Two-layer key-value store: explicit overrides (CLI flags) beat file values,
// file values beat built-in defaults. Keys are flat with dotted sections.
class Config {
  public:
    void load_file(const std::filesystem::path& path);
    void set_override(const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& key) const;

    const std::map<std::string, std::string>& file_values() const { return file_values_; }
    const std::map<std::string, std::string>& overrides() const { return overrides_; }

  private:
    std::map<std::string, std::string> file_values_;
    std::map<std::string, std::string> overrides_;
};

struct RunConfig {
    std::filesystem::path workdir = "workdir";
    std::uint64_t seed = 0;
    bool verbose = false;
    bool verify = false;

    ClientConfig mllm;  // model defaults to "annotator"
    ClientConfig judge; // model defaults to "judge"
    ClientConfig embed; // model defaults to "embedder"

    TreeParams tree;
    SplitConfig split;
    int encoder_dim = 64;
    int encoder_token_len = 8;
    RenderParams render;
    SimilarityParams sim;

    int embed_concurrency = 8;
    int mllm_concurrency = 4;
    int image_concurrency = 1;

    std::filesystem::path prompts_dir; // empty: embedded defaults

    static RunConfig resolve(const Config& cfg);
};

} // namespace ureca
