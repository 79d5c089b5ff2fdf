#pragma once

#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace ureca {

// Axis-aligned pixel box, inclusive-exclusive on x1/y1.
struct PixelBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool operator==(const PixelBox&) const = default;
};

// Dense binary mask, one byte per pixel, row-major.
class BinaryMask {
  public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty_dims() const { return width_ == 0 || height_ == 0; }

    bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) {
        bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
    }

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    bool operator==(const BinaryMask&) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_; // values 0 or 1
};

// COCO uncompressed RLE: column-major pixel order, first run counts zeros.
struct RleMask {
    int height = 0;
    int width = 0;
    std::vector<std::int64_t> counts;
};

BinaryMask rle_decode(const RleMask& rle);
RleMask rle_encode(const BinaryMask& mask);

std::int64_t area(const BinaryMask& mask);
double iou(const BinaryMask& a, const BinaryMask& b);
double containment(const BinaryMask& a, const BinaryMask& b);
PixelBox bounding_box(const BinaryMask& mask);
BinaryMask resize_nearest(const BinaryMask& mask, int w, int h);

// Convenience builders used across tests and fixtures.
BinaryMask full_mask(int width, int height);
BinaryMask rect_mask(int width, int height, const PixelBox& box);

} // namespace ureca
