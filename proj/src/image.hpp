#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ureca {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const Rgb&) const = default;
};

// 8-bit RGB image, row-major, no alpha.
class RgbImage {
  public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = Rgb{});

    int width() const { return width_; }
    int height() const { return height_; }

    Rgb at(int x, int y) const {
        const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
        return Rgb{pixels_[i], pixels_[i + 1], pixels_[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
    }

    const std::vector<std::uint8_t>& pixels() const { return pixels_; }
    std::vector<std::uint8_t>& pixels() { return pixels_; }

    bool operator==(const RgbImage&) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_; // 3 bytes per pixel
};

std::vector<std::uint8_t> encode_png(const RgbImage& img);
RgbImage decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const RgbImage& img, const std::filesystem::path& path);
RgbImage read_png(const std::filesystem::path& path);

} // namespace ureca
