#include "mask.hpp"

#include <algorithm>
#include <numeric>

namespace ureca {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw InvalidArgument("mask dimensions must be >= 1, got " + std::to_string(width) + "x" +
                              std::to_string(height));
    }
}

void check_same_dims(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw DimensionMismatch("mask dimension mismatch: " + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                "x" + std::to_string(b.height()));
    }
}

} // namespace

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    check_dims(width, height);
    bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    check_dims(width, height);
    if (bits_.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidArgument("bit buffer length " + std::to_string(bits_.size()) +
                              " does not equal width*height = " +
                              std::to_string(static_cast<std::size_t>(width) * height));
    }
    for (auto& b : bits_) {
        b = b ? 1 : 0;
    }
}

BinaryMask rle_decode(const RleMask& rle) {
    check_dims(rle.width, rle.height);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        if (rle.counts[i] < 0) {
            throw MalformedInput("negative run length at index " + std::to_string(i));
        }
        if (rle.counts[i] == 0 && i != 0) {
            throw MalformedInput("zero-length interior run at index " + std::to_string(i));
        }
        total += rle.counts[i];
    }
    const std::int64_t expected = static_cast<std::int64_t>(rle.width) * rle.height;
    if (total != expected) {
        throw MalformedInput("run-sum mismatch: expected " + std::to_string(expected) +
                             " pixels, counts sum to " + std::to_string(total));
    }
    BinaryMask mask(rle.width, rle.height);
    std::int64_t pos = 0;
    bool value = false; // first run counts zeros
    for (std::int64_t run : rle.counts) {
        if (value) {
            for (std::int64_t k = 0; k < run; ++k) {
                const std::int64_t idx = pos + k;
                // column-major: index = col*height + row
                mask.set(static_cast<int>(idx / rle.height), static_cast<int>(idx % rle.height),
                         true);
            }
        }
        pos += run;
        value = !value;
    }
    return mask;
}

RleMask rle_encode(const BinaryMask& mask) {
    RleMask rle;
    rle.height = mask.height();
    rle.width = mask.width();
    const std::int64_t n = static_cast<std::int64_t>(mask.width()) * mask.height();
    bool cur = false;
    std::int64_t run = 0;
    for (std::int64_t idx = 0; idx < n; ++idx) {
        const bool v =
            mask.at(static_cast<int>(idx / mask.height()), static_cast<int>(idx % mask.height()));
        if (v == cur) {
            ++run;
        } else {
            rle.counts.push_back(run);
            cur = v;
            run = 1;
        }
    }
    rle.counts.push_back(run);
    return rle;
}

std::int64_t area(const BinaryMask& mask) {
    return std::accumulate(mask.bits().begin(), mask.bits().end(), std::int64_t{0});
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a, b);
    std::int64_t inter = 0;
    std::int64_t uni = 0;
    const auto& ab = a.bits();
    const auto& bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        inter += ab[i] & bb[i];
        uni += ab[i] | bb[i];
    }
    if (uni == 0) {
        return 0.0; // both empty; 0 keeps sort comparators total
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double containment(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a, b);
    std::int64_t inter = 0;
    std::int64_t area_a = 0;
    const auto& ab = a.bits();
    const auto& bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        inter += ab[i] & bb[i];
        area_a += ab[i];
    }
    if (area_a == 0) {
        return 0.0;
    }
    return static_cast<double>(inter) / static_cast<double>(area_a);
}

PixelBox bounding_box(const BinaryMask& mask) {
    int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) {
        throw EmptyRegion("bounding_box of an empty mask");
    }
    return PixelBox{x0, y0, x1 + 1, y1 + 1};
}

BinaryMask resize_nearest(const BinaryMask& mask, int w, int h) {
    check_dims(w, h);
    if (w == mask.width() && h == mask.height()) {
        return mask;
    }
    BinaryMask out(w, h);
    // pixel-center sampling: src = floor((dst + 0.5) * src_extent / dst_extent)
    for (int y = 0; y < h; ++y) {
        int sy = static_cast<int>((y + 0.5) * mask.height() / h);
        sy = std::min(sy, mask.height() - 1);
        for (int x = 0; x < w; ++x) {
            int sx = static_cast<int>((x + 0.5) * mask.width() / w);
            sx = std::min(sx, mask.width() - 1);
            out.set(x, y, mask.at(sx, sy));
        }
    }
    return out;
}

BinaryMask full_mask(int width, int height) {
    BinaryMask m(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            m.set(x, y, true);
        }
    }
    return m;
}

BinaryMask rect_mask(int width, int height, const PixelBox& box) {
    BinaryMask m(width, height);
    for (int y = std::max(0, box.y0); y < std::min(height, box.y1); ++y) {
        for (int x = std::max(0, box.x0); x < std::min(width, box.x1); ++x) {
            m.set(x, y, true);
        }
    }
    return m;
}

} // namespace ureca
