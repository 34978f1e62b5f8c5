#include "patchfill/image.hpp"

#include <algorithm>
#include <cmath>

namespace pf {

float luminance(float r, float g, float b) {
    return 0.299f * r + 0.587f * g + 0.114f * b;
}

PlaneImage to_luminance(const PlaneImage& rgb) {
    if (rgb.channels == 1) return rgb;
    PF_CHECK(rgb.channels >= 3, "to_luminance expects 1 or 3+ channels");
    PlaneImage out(rgb.width, rgb.height, 1);
    const size_t n = rgb.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const float* p = &rgb.data[i * rgb.channels];
        out.data[i] = luminance(p[0], p[1], p[2]);
    }
    return out;
}

static int ceil_half(int v) { return (v + 1) / 2; }

PlaneImage downsample_box2(const PlaneImage& img) {
    const int w = ceil_half(img.width), h = ceil_half(img.height), c = img.channels;
    PlaneImage out(w, h, c);
    for (int y = 0; y < h; ++y) {
        const int y0 = 2 * y, y1 = std::min(2 * y + 1, img.height - 1);
        const int ny = (y1 > y0) ? 2 : 1;
        for (int x = 0; x < w; ++x) {
            const int x0 = 2 * x, x1 = std::min(2 * x + 1, img.width - 1);
            const int nx = (x1 > x0) ? 2 : 1;
            const float inv = 1.f / static_cast<float>(nx * ny);
            for (int k = 0; k < c; ++k) {
                float s = img.at(x0, y0, k);
                if (nx == 2) s += img.at(x1, y0, k);
                if (ny == 2) {
                    s += img.at(x0, y1, k);
                    if (nx == 2) s += img.at(x1, y1, k);
                }
                out.at(x, y, k) = s * inv;
            }
        }
    }
    return out;
}

HoleMask downsample_mask_any2(const HoleMask& mask) {
    const int w = ceil_half(mask.width), h = ceil_half(mask.height);
    HoleMask out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = 2 * y, y1 = std::min(2 * y + 1, mask.height - 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = 2 * x, x1 = std::min(2 * x + 1, mask.width - 1);
            out.at(x, y) = mask.at(x0, y0) || mask.at(x1, y0) || mask.at(x0, y1) ||
                           mask.at(x1, y1);
        }
    }
    return out;
}

PlaneImage upsample_nearest2(const PlaneImage& img, int fw, int fh) {
    PF_ASSERT(fw == 2 * img.width || fw == 2 * img.width - 1, "upsample_nearest2 width");
    PF_ASSERT(fh == 2 * img.height || fh == 2 * img.height - 1, "upsample_nearest2 height");
    PlaneImage out(fw, fh, img.channels);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x)
            for (int k = 0; k < img.channels; ++k)
                out.at(x, y, k) = img.at(x / 2, y / 2, k);
    return out;
}

HoleMask upsample_mask_nearest2(const HoleMask& mask, int fw, int fh) {
    PF_ASSERT(fw == 2 * mask.width || fw == 2 * mask.width - 1, "upsample_mask_nearest2 width");
    PF_ASSERT(fh == 2 * mask.height || fh == 2 * mask.height - 1, "upsample_mask_nearest2 height");
    HoleMask out(fw, fh);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x) out.at(x, y) = mask.at(x / 2, y / 2);
    return out;
}

PlaneImage resize_bilinear(const PlaneImage& img, int w, int h) {
    PF_ASSERT(w > 0 && h > 0, "resize_bilinear target dims");
    if (w == img.width && h == img.height) return img;
    PlaneImage out(w, h, img.channels);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = std::min(y0 + 1, img.height - 1);
        y0 = std::max(y0, 0);
        if (y1 < y0) y1 = y0;
        for (int x = 0; x < w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = std::min(x0 + 1, img.width - 1);
            x0 = std::max(x0, 0);
            if (x1 < x0) x1 = x0;
            for (int k = 0; k < img.channels; ++k) {
                double top = img.at(x0, y0, k) + wx * (img.at(x1, y0, k) - img.at(x0, y0, k));
                double bot = img.at(x0, y1, k) + wx * (img.at(x1, y1, k) - img.at(x0, y1, k));
                out.at(x, y, k) = static_cast<float>(top + wy * (bot - top));
            }
        }
    }
    return out;
}

PlaneImage resize_nearest(const PlaneImage& img, int w, int h) {
    PF_ASSERT(w > 0 && h > 0, "resize_nearest target dims");
    if (w == img.width && h == img.height) return img;
    PlaneImage out(w, h, img.channels);
    for (int y = 0; y < h; ++y) {
        int sy = std::min(static_cast<int>((y + 0.5) * img.height / h), img.height - 1);
        for (int x = 0; x < w; ++x) {
            int sx = std::min(static_cast<int>((x + 0.5) * img.width / w), img.width - 1);
            for (int k = 0; k < img.channels; ++k) out.at(x, y, k) = img.at(sx, sy, k);
        }
    }
    return out;
}

// One axis of the separable area average: dst index -> (src index, weight).
namespace {
struct AxisTap {
    int start;
    std::vector<float> w;
};

std::vector<AxisTap> area_taps(int src, int dst) {
    std::vector<AxisTap> taps(static_cast<size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        const double a = i * scale, b = (i + 1) * scale;
        int i0 = static_cast<int>(std::floor(a));
        int i1 = std::min(static_cast<int>(std::ceil(b)), src);
        AxisTap& t = taps[static_cast<size_t>(i)];
        t.start = i0;
        double total = 0;
        for (int s = i0; s < i1; ++s) {
            double cover = std::min<double>(b, s + 1) - std::max<double>(a, s);
            t.w.push_back(static_cast<float>(cover));
            total += cover;
        }
        const float inv = static_cast<float>(1.0 / total);
        for (float& v : t.w) v *= inv;
    }
    return taps;
}
}  // namespace

PlaneImage resize_area(const PlaneImage& img, int w, int h) {
    PF_ASSERT(w > 0 && h > 0, "resize_area target dims");
    if (w == img.width && h == img.height) return img;
    const auto tx = area_taps(img.width, w);
    const auto ty = area_taps(img.height, h);
    const int c = img.channels;
    PlaneImage mid(w, img.height, c);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < w; ++x) {
            const AxisTap& t = tx[static_cast<size_t>(x)];
            for (int k = 0; k < c; ++k) {
                float s = 0;
                for (size_t j = 0; j < t.w.size(); ++j)
                    s += t.w[j] * img.at(t.start + static_cast<int>(j), y, k);
                mid.at(x, y, k) = s;
            }
        }
    PlaneImage out(w, h, c);
    for (int y = 0; y < h; ++y) {
        const AxisTap& t = ty[static_cast<size_t>(y)];
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) {
                float s = 0;
                for (size_t j = 0; j < t.w.size(); ++j)
                    s += t.w[j] * mid.at(x, t.start + static_cast<int>(j), k);
                out.at(x, y, k) = s;
            }
    }
    return out;
}

HoleMask resize_mask_nearest(const HoleMask& mask, int w, int h) {
    PF_ASSERT(w > 0 && h > 0, "resize_mask_nearest target dims");
    if (w == mask.width && h == mask.height) return mask;
    HoleMask out(w, h);
    for (int y = 0; y < h; ++y) {
        int sy = std::min(static_cast<int>((y + 0.5) * mask.height / h), mask.height - 1);
        for (int x = 0; x < w; ++x) {
            int sx = std::min(static_cast<int>((x + 0.5) * mask.width / w), mask.width - 1);
            out.at(x, y) = mask.at(sx, sy);
        }
    }
    return out;
}

HoleMask resize_mask_any(const HoleMask& mask, int w, int h) {
    PF_ASSERT(w > 0 && h > 0, "resize_mask_any target dims");
    if (w == mask.width && h == mask.height) return mask;
    HoleMask out(w, h);
    const int64_t sw = mask.width, sh = mask.height;
    for (int y = 0; y < h; ++y) {
        int y0 = static_cast<int>(static_cast<int64_t>(y) * sh / h);
        int y1 = static_cast<int>((static_cast<int64_t>(y + 1) * sh + h - 1) / h);
        y1 = std::min(y1, mask.height);
        for (int x = 0; x < w; ++x) {
            int x0 = static_cast<int>(static_cast<int64_t>(x) * sw / w);
            int x1 = static_cast<int>((static_cast<int64_t>(x + 1) * sw + w - 1) / w);
            x1 = std::min(x1, mask.width);
            uint8_t hit = 0;
            for (int yy = y0; yy < y1 && !hit; ++yy)
                for (int xx = x0; xx < x1; ++xx)
                    if (mask.at(xx, yy)) {
                        hit = 1;
                        break;
                    }
            out.at(x, y) = hit;
        }
    }
    return out;
}

ImagePyramid build_pyramid(const PlaneImage& image, const HoleMask& mask, int min_edge) {
    PF_CHECK(min_edge >= 1, "pyramid min_edge must be >= 1");
    PF_CHECK(image.width == mask.width && image.height == mask.height,
             "pyramid: image and mask dims differ");
    PF_CHECK(image.long_edge() >= min_edge, "pyramid: image smaller than min_edge");
    ImagePyramid pyr;
    pyr.images.push_back(image);
    pyr.masks.push_back(mask);
    while (ceil_half(pyr.images.back().long_edge()) >= min_edge) {
        pyr.images.push_back(downsample_box2(pyr.images.back()));
        pyr.masks.push_back(downsample_mask_any2(pyr.masks.back()));
    }
    return pyr;
}

PlaneImage composite(const PlaneImage& base, const PlaneImage& synth, const HoleMask& mask) {
    PF_CHECK(base.width == synth.width && base.height == synth.height &&
                 base.channels == synth.channels,
             "composite: base/synth dims differ");
    PF_CHECK(base.width == mask.width && base.height == mask.height,
             "composite: mask dims differ");
    PlaneImage out = base;
    const int c = base.channels;
    for (int y = 0; y < base.height; ++y)
        for (int x = 0; x < base.width; ++x)
            if (mask.at(x, y))
                for (int k = 0; k < c; ++k) out.at(x, y, k) = synth.at(x, y, k);
    return out;
}

HoleMask dilate_mask(const HoleMask& mask, int radius) {
    PF_ASSERT(radius >= 0, "dilate_mask radius");
    if (radius == 0) return mask;
    HoleMask mid(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            uint8_t v = 0;
            const int x0 = std::max(0, x - radius), x1 = std::min(mask.width - 1, x + radius);
            for (int xx = x0; xx <= x1 && !v; ++xx) v = mask.at(xx, y);
            mid.at(x, y) = v;
        }
    HoleMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            uint8_t v = 0;
            const int y0 = std::max(0, y - radius), y1 = std::min(mask.height - 1, y + radius);
            for (int yy = y0; yy <= y1 && !v; ++yy) v = mid.at(x, yy);
            out.at(x, y) = v;
        }
    return out;
}

bool mask_bbox(const HoleMask& mask, CropRect* out) {
    int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return false;
    if (out) *out = CropRect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    return true;
}

PlaneImage gaussian_blur(const PlaneImage& img, double sigma, int ksize) {
    PF_ASSERT(sigma > 0, "gaussian_blur sigma");
    if (ksize <= 0) ksize = static_cast<int>(std::lround(5 * sigma)) | 1;
    if (ksize % 2 == 0) ++ksize;
    const int r = ksize / 2;
    std::vector<float> kern(static_cast<size_t>(ksize));
    double total = 0;
    for (int i = -r; i <= r; ++i) {
        double v = std::exp(-(static_cast<double>(i) * i) / (2 * sigma * sigma));
        kern[static_cast<size_t>(i + r)] = static_cast<float>(v);
        total += v;
    }
    for (float& v : kern) v = static_cast<float>(v / total);

    const int w = img.width, h = img.height, c = img.channels;
    PlaneImage mid(w, h, c), out(w, h, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) {
                float s = 0;
                for (int i = -r; i <= r; ++i) {
                    int xx = std::clamp(x + i, 0, w - 1);
                    s += kern[static_cast<size_t>(i + r)] * img.at(xx, y, k);
                }
                mid.at(x, y, k) = s;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) {
                float s = 0;
                for (int i = -r; i <= r; ++i) {
                    int yy = std::clamp(y + i, 0, h - 1);
                    s += kern[static_cast<size_t>(i + r)] * mid.at(x, yy, k);
                }
                out.at(x, y, k) = s;
            }
    return out;
}

PlaneImage extract_crop(const PlaneImage& img, const CropRect& rect) {
    PF_CHECK(rect.width > 0 && rect.height > 0 && rect.x >= 0 && rect.y >= 0 &&
                 rect.x + rect.width <= img.width && rect.y + rect.height <= img.height,
             "extract_crop: rect out of bounds");
    PlaneImage out(rect.width, rect.height, img.channels);
    for (int y = 0; y < rect.height; ++y)
        for (int x = 0; x < rect.width; ++x)
            for (int k = 0; k < img.channels; ++k)
                out.at(x, y, k) = img.at(rect.x + x, rect.y + y, k);
    return out;
}

HoleMask extract_mask_crop(const HoleMask& mask, const CropRect& rect) {
    PF_CHECK(rect.width > 0 && rect.height > 0 && rect.x >= 0 && rect.y >= 0 &&
                 rect.x + rect.width <= mask.width && rect.y + rect.height <= mask.height,
             "extract_mask_crop: rect out of bounds");
    HoleMask out(rect.width, rect.height);
    for (int y = 0; y < rect.height; ++y)
        for (int x = 0; x < rect.width; ++x) out.at(x, y) = mask.at(rect.x + x, rect.y + y);
    return out;
}

}  // namespace pf
