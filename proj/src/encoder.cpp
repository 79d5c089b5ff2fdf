#include "encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace ureca {

void SplitConfig::validate() const {
    if (tile < 16) {
        throw InvalidArgument("tile must be >= 16");
    }
    if (tile % 16 != 0) {
        throw InvalidArgument("tile must be divisible by 16 (four stride-2 layers)");
    }
    if (max_tiles < 1) {
        throw InvalidArgument("max_tiles must be >= 1");
    }
}

namespace {

BinaryMask pad_to(const BinaryMask& m, int w, int h) {
    BinaryMask out(w, h); // pad value 0
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

BinaryMask cut_tile(const BinaryMask& padded, int tx, int ty, int tile) {
    BinaryMask out(tile, tile);
    for (int y = 0; y < tile; ++y) {
        for (int x = 0; x < tile; ++x) {
            if (padded.at(tx * tile + x, ty * tile + y)) {
                out.set(x, y, true);
            }
        }
    }
    return out;
}

int grid_count(int extent, int tile) {
    return (extent + tile - 1) / tile;
}

} // namespace

SubMaskGrid split_mask(const BinaryMask& mask, const SplitConfig& cfg) {
    cfg.validate();
    SubMaskGrid grid;
    grid.orig_w = mask.width();
    grid.orig_h = mask.height();

    BinaryMask work = mask;
    int cols = grid_count(work.width(), cfg.tile);
    int rows = grid_count(work.height(), cfg.tile);
    if (rows * cols > cfg.max_tiles) {
        // Shrink with one aspect-preserving scale chosen so the grid fits. Among
        // all fitting (rows, cols) budgets pick the one that keeps the mask largest.
        double best_scale = 0.0;
        for (int r = 1; r <= cfg.max_tiles; ++r) {
            for (int c = 1; r * c <= cfg.max_tiles; ++c) {
                const double s =
                    std::min({1.0, static_cast<double>(c) * cfg.tile / mask.width(),
                              static_cast<double>(r) * cfg.tile / mask.height()});
                best_scale = std::max(best_scale, s);
            }
        }
        const int new_w = std::max(1, static_cast<int>(mask.width() * best_scale));
        const int new_h = std::max(1, static_cast<int>(mask.height() * best_scale));
        work = resize_nearest(mask, new_w, new_h);
        cols = grid_count(new_w, cfg.tile);
        rows = grid_count(new_h, cfg.tile);
        grid.resized = true;
    }
    grid.rows = rows;
    grid.cols = cols;
    grid.work_w = work.width();
    grid.work_h = work.height();

    const BinaryMask padded = pad_to(work, cols * cfg.tile, rows * cfg.tile);
    for (int ty = 0; ty < rows; ++ty) {
        for (int tx = 0; tx < cols; ++tx) {
            grid.tiles.push_back(cut_tile(padded, tx, ty, cfg.tile));
        }
    }
    if (cfg.global_tile) {
        grid.tiles.push_back(resize_nearest(mask, cfg.tile, cfg.tile));
        grid.has_global = true;
    }
    return grid;
}

std::size_t Tensor::element_count() const {
    std::size_t n = 1;
    for (int d : shape) {
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

const Tensor& EncoderWeights::tensor(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) {
            return t;
        }
    }
    throw InvalidArgument("missing tensor: " + name);
}

namespace {

std::vector<std::pair<std::string, std::vector<int>>> expected_shapes(int dim) {
    std::vector<std::pair<std::string, std::vector<int>>> out;
    for (int layer = 0; layer < 4; ++layer) {
        const int cin = kConvChannels[static_cast<std::size_t>(layer)];
        const int cout = kConvChannels[static_cast<std::size_t>(layer) + 1];
        out.push_back({"conv" + std::to_string(layer + 1) + ".weight", {cout, cin, 3, 3}});
        out.push_back({"conv" + std::to_string(layer + 1) + ".bias", {cout}});
    }
    out.push_back({"proj1.weight", {dim, kConvChannels.back()}});
    out.push_back({"proj1.bias", {dim}});
    out.push_back({"proj2.weight", {dim, dim}});
    out.push_back({"proj2.bias", {dim}});
    return out;
}

} // namespace

void EncoderWeights::validate() const {
    if (dim < 1) {
        throw InvalidArgument("embedding dim must be >= 1");
    }
    if (token_len != 4 && token_len != 8 && token_len != 16) {
        throw InvalidArgument("token_len must be one of {4, 8, 16}");
    }
    const auto expected = expected_shapes(dim);
    if (tensors.size() != expected.size()) {
        throw InvalidArgument("expected " + std::to_string(expected.size()) + " tensors, have " +
                              std::to_string(tensors.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& t = tensors[i];
        if (t.name != expected[i].first || t.shape != expected[i].second) {
            throw InvalidArgument("tensor " + std::to_string(i) + " (" + t.name +
                                  ") has an unexpected name or shape");
        }
        if (t.data.size() != t.element_count()) {
            throw InvalidArgument("tensor " + t.name + " data length mismatch");
        }
        for (float v : t.data) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("tensor " + t.name + " contains a non-finite value");
            }
        }
    }
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

EncoderWeights seeded_weights(std::uint64_t seed, int dim, int token_len) {
    EncoderWeights w;
    w.dim = dim;
    w.token_len = token_len;
    std::uint64_t state = seed;
    for (const auto& [name, shape] : expected_shapes(dim)) {
        Tensor t;
        t.name = name;
        t.shape = shape;
        t.data.resize(t.element_count());
        for (auto& v : t.data) {
            const double u =
                static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53; // [0,1)
            v = static_cast<float>(u * 0.1 - 0.05);
        }
        w.tensors.push_back(std::move(t));
    }
    w.validate();
    return w;
}

namespace {

void write_tensor_file(const std::filesystem::path& path, const nlohmann::ordered_json& header,
                       const std::vector<const Tensor*>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    const std::string line = header.dump();
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.put('\n');
    for (const Tensor* t : tensors) {
        static_assert(sizeof(float) == 4);
        out.write(reinterpret_cast<const char*>(t->data.data()),
                  static_cast<std::streamsize>(t->data.size() * 4));
    }
    if (!out) {
        throw IoError("short write: " + path.string());
    }
}

struct TensorFile {
    nlohmann::ordered_json header;
    std::vector<Tensor> tensors;
};

TensorFile read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw MalformedInput("missing header line in " + path.string());
    }
    TensorFile file;
    try {
        file.header = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput("invalid header JSON in " + path.string() + ": " + e.what());
    }
    if (!file.header.contains("tensors") || !file.header.at("tensors").is_object()) {
        throw MalformedInput("header lacks a \"tensors\" object in " + path.string());
    }
    for (const auto& [name, shape] : file.header.at("tensors").items()) {
        Tensor t;
        t.name = name;
        for (const auto& d : shape) {
            t.shape.push_back(d.get<int>());
        }
        t.data.resize(t.element_count());
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * 4));
        if (static_cast<std::size_t>(in.gcount()) != t.data.size() * 4) {
            throw MalformedInput("truncated tensor data for " + t.name + " in " + path.string());
        }
        for (float v : t.data) {
            if (!std::isfinite(v)) {
                throw MalformedInput("non-finite value in tensor " + t.name);
            }
        }
        file.tensors.push_back(std::move(t));
    }
    return file;
}

} // namespace

void save_weights(const EncoderWeights& w, const std::filesystem::path& path) {
    w.validate();
    nlohmann::ordered_json header;
    header["dim"] = w.dim;
    header["token_len"] = w.token_len;
    auto& tensors = header["tensors"] = nlohmann::ordered_json::object();
    std::vector<const Tensor*> ptrs;
    for (const auto& t : w.tensors) {
        tensors[t.name] = t.shape;
        ptrs.push_back(&t);
    }
    write_tensor_file(path, header, ptrs);
}

EncoderWeights load_weights(const std::filesystem::path& path) {
    TensorFile file = read_tensor_file(path);
    if (!file.header.contains("dim") || !file.header.contains("token_len")) {
        throw MalformedInput("weight header must carry dim and token_len");
    }
    EncoderWeights w;
    w.dim = file.header.at("dim").get<int>();
    w.token_len = file.header.at("token_len").get<int>();
    w.tensors = std::move(file.tensors);
    w.validate();
    return w;
}

void save_tokens(const MaskTokens& t, const std::filesystem::path& path) {
    nlohmann::ordered_json header;
    header["dim"] = t.dim;
    header["rows"] = t.rows;
    header["tensors"] = {{"tokens", {t.rows, t.dim}}};
    Tensor tensor{"tokens", {t.rows, t.dim}, t.data};
    write_tensor_file(path, header, {&tensor});
}

MaskTokens load_tokens(const std::filesystem::path& path) {
    TensorFile file = read_tensor_file(path);
    if (file.tensors.size() != 1 || file.tensors[0].shape.size() != 2) {
        throw MalformedInput("token file must carry a single rank-2 tensor");
    }
    MaskTokens t;
    t.rows = file.tensors[0].shape[0];
    t.dim = file.tensors[0].shape[1];
    t.data = std::move(file.tensors[0].data);
    return t;
}

namespace {

// One 3x3 stride-2 pad-1 conv layer with ReLU. in: cin x s x s, out: cout x s/2 x s/2.
void conv_layer(const std::vector<float>& in, int cin, int s, const Tensor& weight,
                const Tensor& bias, std::vector<float>& out) {
    const int so = s / 2;
    const int cout = weight.shape[0];
    out.assign(static_cast<std::size_t>(cout) * so * so, 0.0f);
    for (int oc = 0; oc < cout; ++oc) {
        const float b = bias.data[static_cast<std::size_t>(oc)];
        for (int oy = 0; oy < so; ++oy) {
            for (int ox = 0; ox < so; ++ox) {
                float acc = b;
                for (int ic = 0; ic < cin; ++ic) {
                    const float* wbase =
                        weight.data.data() + ((static_cast<std::size_t>(oc) * cin + ic) * 9);
                    const float* ibase = in.data() + static_cast<std::size_t>(ic) * s * s;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = 2 * oy + ky - 1;
                        if (iy < 0 || iy >= s) {
                            continue;
                        }
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = 2 * ox + kx - 1;
                            if (ix < 0 || ix >= s) {
                                continue;
                            }
                            acc += wbase[ky * 3 + kx] *
                                   ibase[static_cast<std::size_t>(iy) * s + ix];
                        }
                    }
                }
                out[(static_cast<std::size_t>(oc) * so + oy) * so + ox] = std::max(0.0f, acc);
            }
        }
    }
}

} // namespace

MaskTokens encode(const SubMaskGrid& grid, const EncoderWeights& w) {
    w.validate();
    if (grid.tiles.empty()) {
        throw InvalidArgument("sub-mask grid has no tiles");
    }
    const int tile = grid.tiles[0].width();
    for (const auto& t : grid.tiles) {
        if (t.width() != tile || t.height() != tile) {
            throw InvalidArgument("all tiles must share one square size");
        }
    }
    if (tile < 16 || tile % 16 != 0) {
        throw InvalidArgument("tile side must be a positive multiple of 16");
    }

    const int L = w.token_len;
    const int D = w.dim;
    MaskTokens tokens;
    tokens.rows = grid.count() * L;
    tokens.dim = D;
    tokens.data.reserve(static_cast<std::size_t>(tokens.rows) * D);

    const Tensor& p1w = w.tensor("proj1.weight");
    const Tensor& p1b = w.tensor("proj1.bias");
    const Tensor& p2w = w.tensor("proj2.weight");
    const Tensor& p2b = w.tensor("proj2.bias");

    std::vector<float> buf_a, buf_b;
    for (const auto& tile_mask : grid.tiles) {
        buf_a.assign(static_cast<std::size_t>(tile) * tile, 0.0f);
        for (int y = 0; y < tile; ++y) {
            for (int x = 0; x < tile; ++x) {
                buf_a[static_cast<std::size_t>(y) * tile + x] = tile_mask.at(x, y) ? 1.0f : 0.0f;
            }
        }
        int s = tile;
        for (int layer = 0; layer < 4; ++layer) {
            const std::string id = std::to_string(layer + 1);
            conv_layer(buf_a, kConvChannels[static_cast<std::size_t>(layer)], s,
                       w.tensor("conv" + id + ".weight"), w.tensor("conv" + id + ".bias"), buf_b);
            buf_a.swap(buf_b);
            s /= 2;
        }

        // buf_a: 128 x s x s feature map; pool the s*s cells down to L bins.
        const int cells = s * s;
        const int C = kConvChannels.back();
        for (int bin = 0; bin < L; ++bin) {
            const int start = static_cast<int>(static_cast<std::int64_t>(bin) * cells / L);
            const int end = static_cast<int>(
                (static_cast<std::int64_t>(bin + 1) * cells + L - 1) / L);
            std::vector<float> pooled(static_cast<std::size_t>(C), 0.0f);
            for (int c = start; c < end; ++c) {
                for (int ch = 0; ch < C; ++ch) {
                    pooled[static_cast<std::size_t>(ch)] +=
                        buf_a[static_cast<std::size_t>(ch) * cells + c];
                }
            }
            const float inv = 1.0f / static_cast<float>(end - start);
            for (auto& v : pooled) {
                v *= inv;
            }
            // two-layer projection, ReLU between the affine maps
            std::vector<float> hidden(static_cast<std::size_t>(D), 0.0f);
            for (int o = 0; o < D; ++o) {
                float acc = p1b.data[static_cast<std::size_t>(o)];
                const float* row = p1w.data.data() + static_cast<std::size_t>(o) * C;
                for (int i = 0; i < C; ++i) {
                    acc += row[i] * pooled[static_cast<std::size_t>(i)];
                }
                hidden[static_cast<std::size_t>(o)] = std::max(0.0f, acc);
            }
            for (int o = 0; o < D; ++o) {
                float acc = p2b.data[static_cast<std::size_t>(o)];
                const float* row = p2w.data.data() + static_cast<std::size_t>(o) * D;
                for (int i = 0; i < D; ++i) {
                    acc += row[i] * hidden[static_cast<std::size_t>(i)];
                }
                tokens.data.push_back(acc);
            }
        }
    }
    return tokens;
}

} // namespace ureca
