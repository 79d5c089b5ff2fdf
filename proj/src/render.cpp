#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ureca {

namespace {

void check_dims(const RgbImage& img, const BinaryMask& mask) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw DimensionMismatch("image is " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + ", mask is " +
                                std::to_string(mask.width()) + "x" +
                                std::to_string(mask.height()));
    }
}

// clang-format off
constexpr const char* kDigitRows[10][7] = {
    {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "},
    {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "},
    {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"},
    {"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "},
    {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "},
    {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "},
    {"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "},
    {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "},
    {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "},
    {" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "},
};
// clang-format on

void paint_cell(RgbImage& img, int x, int y, int scale, ColorSpec color) {
    for (int dy = 0; dy < scale; ++dy) {
        for (int dx = 0; dx < scale; ++dx) {
            const int px = x + dx;
            const int py = y + dy;
            if (px >= 0 && px < img.width() && py >= 0 && py < img.height()) {
                img.set(px, py, color);
            }
        }
    }
}

void draw_label(RgbImage& img, const std::string& text, int cx, int cy, int scale,
                ColorSpec color) {
    const int n = static_cast<int>(text.size());
    const int block_w = (5 * n + (n - 1)) * scale;
    const int block_h = 7 * scale;
    int x0 = cx - block_w / 2;
    int y0 = cy - block_h / 2;
    x0 = std::clamp(x0, 0, std::max(0, img.width() - block_w));
    y0 = std::clamp(y0, 0, std::max(0, img.height() - block_h));
    for (int i = 0; i < n; ++i) {
        const int d = text[static_cast<std::size_t>(i)] - '0';
        const int gx = x0 + i * 6 * scale;
        for (int row = 0; row < 7; ++row) {
            for (int col = 0; col < 5; ++col) {
                if (kDigitRows[d][row][col] == '#') {
                    paint_cell(img, gx + col * scale, y0 + row * scale, scale, color);
                }
            }
        }
    }
}

void draw_box_outline(RgbImage& img, const PixelBox& box, ColorSpec color) {
    for (int x = box.x0; x < box.x1; ++x) {
        img.set(x, box.y0, color);
        img.set(x, box.y1 - 1, color);
    }
    for (int y = box.y0; y < box.y1; ++y) {
        img.set(box.x0, y, color);
        img.set(box.x1 - 1, y, color);
    }
}

} // namespace

int RenderParams::effective_thickness(int width, int height) const {
    if (thickness >= 1) {
        return thickness;
    }
    return std::max(2, static_cast<int>(std::ceil(0.004 * std::max(width, height))));
}

RgbImage gaussian_blur(const RgbImage& img, double sigma) {
    if (sigma <= 0.0) {
        throw InvalidArgument("sigma must be > 0");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        sum += w;
    }
    for (auto& w : kernel) {
        w /= sum;
    }

    const int width = img.width();
    const int height = img.height();
    std::vector<double> tmp(static_cast<std::size_t>(width) * height * 3);
    // horizontal pass, edge-clamped
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc[3] = {0, 0, 0};
            for (int k = -radius; k <= radius; ++k) {
                const int sx = std::clamp(x + k, 0, width - 1);
                const Rgb p = img.at(sx, y);
                const double w = kernel[static_cast<std::size_t>(k + radius)];
                acc[0] += w * p.r;
                acc[1] += w * p.g;
                acc[2] += w * p.b;
            }
            const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
            tmp[i] = acc[0];
            tmp[i + 1] = acc[1];
            tmp[i + 2] = acc[2];
        }
    }
    // vertical pass
    RgbImage out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc[3] = {0, 0, 0};
            for (int k = -radius; k <= radius; ++k) {
                const int sy = std::clamp(y + k, 0, height - 1);
                const std::size_t i = (static_cast<std::size_t>(sy) * width + x) * 3;
                const double w = kernel[static_cast<std::size_t>(k + radius)];
                acc[0] += w * tmp[i];
                acc[1] += w * tmp[i + 1];
                acc[2] += w * tmp[i + 2];
            }
            out.set(x, y,
                    Rgb{static_cast<std::uint8_t>(std::llround(std::clamp(acc[0], 0.0, 255.0))),
                        static_cast<std::uint8_t>(std::llround(std::clamp(acc[1], 0.0, 255.0))),
                        static_cast<std::uint8_t>(std::llround(std::clamp(acc[2], 0.0, 255.0)))});
        }
    }
    return out;
}

RgbImage blur_outside(const RgbImage& img, const BinaryMask& mask, double sigma) {
    check_dims(img, mask);
    RgbImage out = gaussian_blur(img, sigma);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (mask.at(x, y)) {
                out.set(x, y, img.at(x, y)); // in-mask pixels stay byte-identical
            }
        }
    }
    return out;
}

RgbImage draw_contour(const RgbImage& img, const BinaryMask& mask, ColorSpec color,
                      int thickness) {
    check_dims(img, mask);
    if (thickness < 1) {
        throw InvalidArgument("thickness must be >= 1");
    }
    if (area(mask) == 0) {
        throw EmptyRegion("draw_contour on an empty mask");
    }
    // boundary = set pixels 4-adjacent to an unset or out-of-frame pixel
    std::vector<std::pair<int, int>> boundary;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            const bool edge = x == 0 || x == mask.width() - 1 || y == 0 ||
                              y == mask.height() - 1 || !mask.at(x - 1, y) || !mask.at(x + 1, y) ||
                              !mask.at(x, y - 1) || !mask.at(x, y + 1);
            if (edge) {
                boundary.emplace_back(x, y);
            }
        }
    }
    RgbImage out = img;
    const int r = thickness - 1;
    for (auto [bx, by] : boundary) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                const int x = bx + dx;
                const int y = by + dy;
                if (x >= 0 && x < out.width() && y >= 0 && y < out.height()) {
                    out.set(x, y, color);
                }
            }
        }
    }
    return out;
}

PixelBox region_crop_box(const BinaryMask& mask, double margin_frac) {
    if (margin_frac < 0.0) {
        throw InvalidArgument("margin_frac must be >= 0");
    }
    const PixelBox box = bounding_box(mask);
    const int margin =
        static_cast<int>(std::llround(margin_frac * std::max(box.width(), box.height())));
    return PixelBox{std::max(0, box.x0 - margin), std::max(0, box.y0 - margin),
                    std::min(mask.width(), box.x1 + margin),
                    std::min(mask.height(), box.y1 + margin)};
}

RgbImage crop_to_region(const RgbImage& img, const BinaryMask& mask, double margin_frac) {
    check_dims(img, mask);
    const PixelBox box = region_crop_box(mask, margin_frac);
    RgbImage out(box.width(), box.height());
    for (int y = 0; y < box.height(); ++y) {
        for (int x = 0; x < box.width(); ++x) {
            out.set(x, y, img.at(box.x0 + x, box.y0 + y));
        }
    }
    return out;
}

std::pair<RgbImage, RgbImage> render_stage2_views(const RgbImage& img, const BinaryMask& target,
                                                  const BinaryMask& parent,
                                                  const RenderParams& params) {
    check_dims(img, target);
    check_dims(img, parent);
    if (containment(target, parent) == 0.0) {
        throw InvalidArgument("target and parent masks are disjoint");
    }
    const int t = params.effective_thickness(img.width(), img.height());
    const RgbImage blurred = blur_outside(img, target, params.sigma);
    RgbImage view1 = crop_to_region(blurred, target, params.margin);
    RgbImage view2 =
        crop_to_region(draw_contour(blurred, target, kTargetYellow, t), parent, params.margin);
    return {std::move(view1), std::move(view2)};
}

RgbImage render_stage3_view(const RgbImage& img, const BinaryMask& target,
                            const RenderParams& params) {
    return draw_contour(img, target, kTargetYellow,
                        params.effective_thickness(img.width(), img.height()));
}

RgbImage render_set_of_mark(const RgbImage& img, const std::vector<BinaryMask>& group,
                            const RenderParams& params) {
    if (group.empty()) {
        throw InvalidArgument("set-of-mark group must be non-empty");
    }
    const int t = params.effective_thickness(img.width(), img.height());
    const int label_scale = std::max(2, t);
    RgbImage out = img;
    for (std::size_t i = 0; i < group.size(); ++i) {
        const BinaryMask& m = group[i];
        check_dims(img, m);
        if (area(m) == 0) {
            throw EmptyRegion("set-of-mark member " + std::to_string(i) + " is empty");
        }
        const ColorSpec color = i == 0 ? kTargetBlue : kMarkPalette[(i - 1) % kMarkPalette.size()];
        out = draw_contour(out, m, color, t);
        const PixelBox box = bounding_box(m);
        draw_box_outline(out, box, color);
        draw_label(out, std::to_string(i), (box.x0 + box.x1) / 2, (box.y0 + box.y1) / 2,
                   label_scale, color);
    }
    return out;
}

} // namespace ureca
