#pragma once

#include <array>
#include <utility>

#include "image.hpp"
#include "mask.hpp"

namespace ureca {

using ColorSpec = Rgb;

inline constexpr ColorSpec kTargetYellow{255, 255, 0};
inline constexpr ColorSpec kTargetBlue{0, 0, 255};

// Distinct palette for set-of-mark indices 1..k (cycled mod 8).
inline constexpr std::array<ColorSpec, 8> kMarkPalette{{
    {255, 0, 0},
    {0, 200, 0},
    {255, 128, 0},
    {255, 0, 255},
    {0, 255, 255},
    {255, 255, 255},
    {128, 0, 255},
    {150, 75, 0},
}};

struct RenderParams {
    double sigma = 8.0;   // context blur strength
    int thickness = 0;    // contour thickness in pixels; 0 = auto from image size
    double margin = 0.10; // crop margin as a fraction of the longer box side

    int effective_thickness(int width, int height) const;
};

RgbImage gaussian_blur(const RgbImage& img, double sigma);
RgbImage blur_outside(const RgbImage& img, const BinaryMask& mask, double sigma);
RgbImage draw_contour(const RgbImage& img, const BinaryMask& mask, ColorSpec color,
                      int thickness);
RgbImage crop_to_region(const RgbImage& img, const BinaryMask& mask, double margin_frac);

// Crop box used by crop_to_region (exposed so callers can crop masks consistently).
PixelBox region_crop_box(const BinaryMask& mask, double margin_frac);

// Stage-2 prompt views: {blurred target crop, parent crop with yellow target contour}.
std::pair<RgbImage, RgbImage> render_stage2_views(const RgbImage& img, const BinaryMask& target,
                                                  const BinaryMask& parent,
                                                  const RenderParams& params = {});

// Stage-3 prompt view: full image with the target contoured yellow, no blur.
RgbImage render_stage3_view(const RgbImage& img, const BinaryMask& target,
                            const RenderParams& params = {});

// Stage-4 set-of-mark composite: member 0 is the target (blue); each member gets a
// contour, a 1px bounding box and its index digit at the box center, painter's order.
RgbImage render_set_of_mark(const RgbImage& img, const std::vector<BinaryMask>& group,
                            const RenderParams& params = {});

} // namespace ureca
