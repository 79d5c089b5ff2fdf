#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mask.hpp"

namespace ureca {

struct SplitConfig {
    int tile = 448;          // sub-mask side length
    int max_tiles = 12;      // grid tile budget (global tile excluded)
    bool global_tile = true; // append a whole-mask tile after the grid

    void validate() const;
};

// Result of the dynamic splitting step. Grid tiles are emitted row-major; when
// global_tile is on, one extra tile (the whole mask resized to tile x tile)
// follows them. tiles.size() is the sub-mask count fed to the encoder.
struct SubMaskGrid {
    std::vector<BinaryMask> tiles;
    int rows = 0;
    int cols = 0;
    int orig_w = 0;
    int orig_h = 0;
    bool has_global = false;
    bool resized = false; // true when the mask was shrunk to fit max_tiles
    int work_w = 0;       // mask size actually tiled (differs from orig when resized)
    int work_h = 0;

    int count() const { return static_cast<int>(tiles.size()); }
};

SubMaskGrid split_mask(const BinaryMask& mask, const SplitConfig& cfg);

struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;

    std::size_t element_count() const;
};

inline constexpr std::array<int, 5> kConvChannels{1, 16, 32, 64, 128};

// Conv stack (4 layers, 3x3 stride 2, pad 1) plus a two-layer projection with a
// ReLU between the affine maps. token_len selects the pooled cell count per tile.
struct EncoderWeights {
    std::vector<Tensor> tensors; // fixed order: convN.weight/bias..., proj1.*, proj2.*
    int dim = 0;                 // D, token embedding width
    int token_len = 0;           // L in {4, 8, 16}

    const Tensor& tensor(const std::string& name) const;
    void validate() const; // shape consistency + finiteness, before any compute
};

EncoderWeights seeded_weights(std::uint64_t seed, int dim, int token_len);
void save_weights(const EncoderWeights& w, const std::filesystem::path& path);
EncoderWeights load_weights(const std::filesystem::path& path);

struct MaskTokens {
    int rows = 0; // N = N_s * L
    int dim = 0;  // D
    std::vector<float> data;

    float at(int row, int col) const {
        return data[static_cast<std::size_t>(row) * dim + col];
    }
};

MaskTokens encode(const SubMaskGrid& grid, const EncoderWeights& w);
void save_tokens(const MaskTokens& t, const std::filesystem::path& path);
MaskTokens load_tokens(const std::filesystem::path& path);

// splitmix64 step; the seeded-weight stream is fully determined by it.
std::uint64_t splitmix64_next(std::uint64_t& state);

} // namespace ureca
