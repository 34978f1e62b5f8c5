#pragma once

#include <cstdint>
#include <vector>

#include "patchfill/common.hpp"

namespace pf {

// Row-major, interleaved float image. Values are nominally in [0,1] for
// RGB/gray content; guide planes reuse the container with their own ranges.
struct PlaneImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    PlaneImage() = default;
    PlaneImage(int w, int h, int c, float fill = 0.f) { reset(w, h, c, fill); }

    void reset(int w, int h, int c, float fill = 0.f) {
        PF_ASSERT(w > 0 && h > 0 && c > 0, "PlaneImage dims must be positive");
        width = w;
        height = h;
        channels = c;
        data.assign(static_cast<size_t>(w) * h * c, fill);
    }

    bool empty() const { return data.empty(); }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    int long_edge() const { return width > height ? width : height; }

    float& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    const float* row(int y) const { return &data[static_cast<size_t>(y) * width * channels]; }
    float* row(int y) { return &data[static_cast<size_t>(y) * width * channels]; }

    uint64_t content_hash() const {
        uint64_t h = fnv1a(&width, sizeof width);
        h = fnv1a(&height, sizeof height, h);
        h = fnv1a(&channels, sizeof channels, h);
        return fnv1a(data.data(), data.size() * sizeof(float), h);
    }
};

// Binary hole mask; 1 = hole (to be synthesized), 0 = kept content.
struct HoleMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    HoleMask() = default;
    HoleMask(int w, int h, uint8_t fill = 0) { reset(w, h, fill); }

    void reset(int w, int h, uint8_t fill = 0) {
        PF_ASSERT(w > 0 && h > 0, "HoleMask dims must be positive");
        width = w;
        height = h;
        data.assign(static_cast<size_t>(w) * h, fill);
    }

    bool empty() const { return data.empty(); }
    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    size_t hole_count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v != 0;
        return n;
    }
};

struct CropRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const CropRect&) const = default;
};

// Coarse-to-fine pyramid. Level 0 is native resolution; each level halves the
// previous one with ceil rounding until the long edge would drop below
// min_edge. Masks follow the image levels with the any-rule.
struct ImagePyramid {
    std::vector<PlaneImage> images;  // index 0 = finest
    std::vector<HoleMask> masks;

    int depth() const { return static_cast<int>(images.size()); }
};

float luminance(float r, float g, float b);
PlaneImage to_luminance(const PlaneImage& rgb);

// 2x box downsample; odd trailing row/column averages the partial block.
PlaneImage downsample_box2(const PlaneImage& img);
HoleMask downsample_mask_any2(const HoleMask& mask);

// Exact inverse partner of downsample_box2 for the same ceil-halved dims:
// every fine pixel copies src(x/2, y/2). Requires fw in {2*src.w-1, 2*src.w}
// and likewise for fh.
PlaneImage upsample_nearest2(const PlaneImage& img, int fw, int fh);
HoleMask upsample_mask_nearest2(const HoleMask& mask, int fw, int fh);

// Center-aligned samplers for arbitrary target sizes.
PlaneImage resize_bilinear(const PlaneImage& img, int w, int h);
PlaneImage resize_nearest(const PlaneImage& img, int w, int h);
// Area average with exact fractional box coverage (intended for downscale).
PlaneImage resize_area(const PlaneImage& img, int w, int h);
HoleMask resize_mask_nearest(const HoleMask& mask, int w, int h);
// Target pixel is hole iff any source pixel under its coverage box is hole.
HoleMask resize_mask_any(const HoleMask& mask, int w, int h);

ImagePyramid build_pyramid(const PlaneImage& image, const HoleMask& mask, int min_edge);

// synth wins inside the hole, base outside.
PlaneImage composite(const PlaneImage& base, const PlaneImage& synth, const HoleMask& mask);

// Chebyshev dilation by radius r (r >= 0).
HoleMask dilate_mask(const HoleMask& mask, int radius);

// Tight bounding box of hole pixels; false when the mask is empty.
bool mask_bbox(const HoleMask& mask, CropRect* out);

// Separable Gaussian with clamp-to-edge padding. ksize <= 0 selects
// round(5*sigma) forced odd.
PlaneImage gaussian_blur(const PlaneImage& img, double sigma, int ksize = 0);

PlaneImage extract_crop(const PlaneImage& img, const CropRect& rect);
HoleMask extract_mask_crop(const HoleMask& mask, const CropRect& rect);

}  // namespace pf
