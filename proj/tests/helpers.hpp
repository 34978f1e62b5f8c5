#pragma once

// Shared fixtures for the test suites: synthetic images, masks, guides, and a
// scratch-directory guard.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "patchfill/guides.hpp"
#include "patchfill/image.hpp"
#include "patchfill/synthesis.hpp"

namespace testutil {

using namespace pf;

class TempDir {
  public:
    TempDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "patchfill-test-XXXXXX").string();
        char* got = mkdtemp(tmpl.data());
        PF_CHECK(got != nullptr, "mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (std::filesystem::path(path_) / name).string();
    }

  private:
    std::string path_;
};

// Smooth random texture: sums of seeded sinusoids, distinct per channel.
inline PlaneImage make_texture(int w, int h, uint64_t seed) {
    PlaneImage img(w, h, 3);
    Rng rng(mix_seed(seed, 0x7e57));
    double fx[6], fy[6], ph[6], amp[6];
    for (int k = 0; k < 6; ++k) {
        fx[k] = rng.uniform(0.05, 0.45);
        fy[k] = rng.uniform(0.05, 0.45);
        ph[k] = rng.uniform(0.0, 6.28318);
        amp[k] = rng.uniform(0.05, 0.18);
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = 0.5;
                for (int k = c; k < 6; k += 3)
                    v += amp[k] * std::sin(fx[k] * x + fy[k] * y + ph[k] + c);
                img.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
    return img;
}

// Texture that repeats with the given tile period in both axes; tile cells
// are seeded random values quantized to the 8-bit grid so PNG round-trips
// are exact.
inline PlaneImage make_periodic(int w, int h, int period, uint64_t seed) {
    PlaneImage tile(period, period, 3);
    Rng rng(mix_seed(seed, 0x7113));
    for (float& v : tile.data) v = static_cast<float>(rng.below(256)) / 255.f;
    PlaneImage img(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = tile.at(x % period, y % period, c);
    return img;
}

inline HoleMask rect_mask(int w, int h, int x0, int y0, int rw, int rh) {
    HoleMask m(w, h, 0);
    for (int y = y0; y < y0 + rh; ++y)
        for (int x = x0; x < x0 + rw; ++x) m.at(x, y) = 1;
    return m;
}

// Plausible native-resolution guide set derived from the image itself:
// structure = blurred luminance, depth = normalized vertical gradient,
// segmentation = two labels split at the vertical midline.
inline GuideSet make_guides(const PlaneImage& img) {
    GuideSet g;
    GuideChannel& s = g.channels[0];
    s.kind = GuideKind::Structure;
    s.comparison = GuideComparison::Euclidean;
    s.data = to_luminance(gaussian_blur(img, 1.5));

    GuideChannel& d = g.channels[1];
    d.kind = GuideKind::Depth;
    d.comparison = GuideComparison::Euclidean;
    d.data = PlaneImage(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            d.data.at(x, y) = img.height > 1 ? static_cast<float>(y) / (img.height - 1) : 0.5f;

    GuideChannel& l = g.channels[2];
    l.kind = GuideKind::Segmentation;
    l.comparison = GuideComparison::LabelMismatch;
    l.data = PlaneImage(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) l.data.at(x, y) = x < img.width / 2 ? 0.f : 1.f;
    return g;
}

// A conforming coarse fill built from a full (ground-truth-like) image:
// resampled to 512 on the long edge with the aspect preserved.
inline CoarseFill make_coarse(const PlaneImage& full) {
    CoarseFill c;
    int cw, ch;
    if (full.width >= full.height) {
        cw = 512;
        ch = std::max<int>(1, static_cast<int>(std::lround(512.0 * full.height / full.width)));
    } else {
        ch = 512;
        cw = std::max<int>(1, static_cast<int>(std::lround(512.0 * full.width / full.height)));
    }
    c.image = full.width <= cw ? resize_bilinear(full, cw, ch) : resize_area(full, cw, ch);
    c.provenance = "test";
    return c;
}

// Constant-gray conforming coarse fill (deliberately uninformative).
inline CoarseFill make_flat_coarse(int native_w, int native_h, float value) {
    CoarseFill c;
    int cw, ch;
    if (native_w >= native_h) {
        cw = 512;
        ch = std::max<int>(1, static_cast<int>(std::lround(512.0 * native_h / native_w)));
    } else {
        ch = 512;
        cw = std::max<int>(1, static_cast<int>(std::lround(512.0 * native_w / native_h)));
    }
    c.image = PlaneImage(cw, ch, 3, value);
    c.provenance = "flat";
    return c;
}

inline double psnr_region(const PlaneImage& a, const PlaneImage& b, const HoleMask& region) {
    double sum = 0;
    size_t n = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            if (!region.at(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
                sum += d * d;
                ++n;
            }
        }
    if (n == 0 || sum == 0) return 99.0;
    return 10.0 * std::log10(static_cast<double>(n) / sum);
}

inline bool same_pixels(const PlaneImage& a, const PlaneImage& b) {
    return a.width == b.width && a.height == b.height && a.channels == b.channels &&
           a.data == b.data;
}

}  // namespace testutil
