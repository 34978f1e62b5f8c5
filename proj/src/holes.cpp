#include "patchfill/holes.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "patchfill/image_io.hpp"

namespace pf {

namespace {

// Rasterize a capsule (segment dilated by `radius`) into a side*side buffer.
// Returns the number of newly set pixels.
size_t raster_capsule(std::vector<uint8_t>& buf, int side, double x0, double y0, double x1,
                      double y1, double radius) {
    const int lx = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - radius)));
    const int ly = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - radius)));
    const int hx = std::min(side - 1, static_cast<int>(std::ceil(std::max(x0, x1) + radius)));
    const int hy = std::min(side - 1, static_cast<int>(std::ceil(std::max(y0, y1) + radius)));
    const double dx = x1 - x0, dy = y1 - y0;
    const double len2 = dx * dx + dy * dy;
    const double r2 = radius * radius;
    size_t added = 0;
    for (int y = ly; y <= hy; ++y)
        for (int x = lx; x <= hx; ++x) {
            double t = 0;
            if (len2 > 0) t = std::clamp(((x - x0) * dx + (y - y0) * dy) / len2, 0.0, 1.0);
            const double px = x0 + t * dx - x, py = y0 + t * dy - y;
            if (px * px + py * py > r2) continue;
            uint8_t& cell = buf[static_cast<size_t>(y) * side + x];
            if (!cell) {
                cell = 1;
                ++added;
            }
        }
    return added;
}

}  // namespace

HoleMask freeform_mask(int width, int height, const HoleSpec& spec) {
    spec.stroke.validate();
    PF_CHECK(spec.bbox_side >= 16, "bounding box too small");
    PF_CHECK(spec.bbox_side <= width && spec.bbox_side <= height,
             "bounding box does not fit in the image");
    const int side = spec.bbox_side;
    const double target = spec.target_area;
    PF_CHECK(target > 0, "hole target area must be positive");
    PF_CHECK(target <= 0.9 * side * side, "hole target area exceeds bounding-box capacity");

    Rng rng(spec.seed);
    const int bx = static_cast<int>(rng.below(static_cast<uint64_t>(width - side + 1)));
    const int by = static_cast<int>(rng.below(static_cast<uint64_t>(height - side + 1)));

    const double scale = side / 512.0;
    // keep single-segment increments small relative to the target so the
    // accumulate-until-reached loop cannot badly overshoot
    const double radius_cap = std::max(2.0, std::sqrt(0.1 * target));

    std::vector<uint8_t> best;
    double best_diff = -1;
    for (int attempt = 0; attempt < 50; ++attempt) {
        std::vector<uint8_t> local(static_cast<size_t>(side) * side, 0);
        double area = 0;
        for (int strokes = 0; strokes < 64 && area < target; ++strokes) {
            const int waypoints = static_cast<int>(
                rng.range(spec.stroke.min_waypoints, spec.stroke.max_waypoints));
            double px = rng.uniform(0.0, side - 1.0);
            double py = rng.uniform(0.0, side - 1.0);
            for (int k = 1; k < waypoints && area < target; ++k) {
                double r = rng.uniform(spec.stroke.min_radius, spec.stroke.max_radius) * scale;
                r = std::clamp(r, 1.0, radius_cap);
                double step =
                    rng.uniform(spec.stroke.min_step_frac, spec.stroke.max_step_frac) * side;
                step = std::min(step, std::max(4.0, 0.3 * target / (2.0 * r)));
                const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
                const double nx = std::clamp(px + std::cos(ang) * step, 0.0, side - 1.0);
                const double ny = std::clamp(py + std::sin(ang) * step, 0.0, side - 1.0);
                area += static_cast<double>(raster_capsule(local, side, px, py, nx, ny, r));
                px = nx;
                py = ny;
            }
        }
        const double diff = std::abs(area - target);
        if (best_diff < 0 || diff < best_diff) {
            best_diff = diff;
            best = std::move(local);
        }
        if (best_diff <= 0.4 * target) break;
    }
    PF_ASSERT(best_diff <= 0.4 * target, "hole generator missed the target area");

    HoleMask out(width, height);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            if (best[static_cast<size_t>(y) * side + x]) out.at(bx + x, by + y) = 1;
    return out;
}

HoleMask object_mask(int width, int height, const HoleSpec& spec,
                     const std::string& library_dir) {
    namespace fs = std::filesystem;
    PF_CHECK(spec.bbox_side >= 16, "bounding box too small");
    PF_CHECK(spec.bbox_side <= width && spec.bbox_side <= height,
             "bounding box does not fit in the image");

    std::error_code ec;
    fs::directory_iterator it(library_dir, ec);
    PF_CHECK(!ec, "cannot read mask library directory: " + library_dir);
    std::vector<std::string> files;
    for (const auto& entry : it)
        if (entry.is_regular_file()) files.push_back(entry.path().string());
    PF_CHECK(!files.empty(), "mask library is empty: " + library_dir);
    std::sort(files.begin(), files.end());

    Rng rng(spec.seed);
    const std::string& chosen = files[rng.below(files.size())];
    const HoleMask lib = read_png_mask(chosen);
    CropRect bbox;
    PF_CHECK(mask_bbox(lib, &bbox), "library mask has no hole pixels: " + chosen);

    // tight hole content, scaled so the long side fills the box
    HoleMask tight = extract_mask_crop(lib, bbox);
    const int side = spec.bbox_side;
    const double s = static_cast<double>(side) / std::max(tight.width, tight.height);
    const int nw = std::clamp(static_cast<int>(std::lround(tight.width * s)), 1, side);
    const int nh = std::clamp(static_cast<int>(std::lround(tight.height * s)), 1, side);
    HoleMask scaled = resize_mask_nearest(tight, nw, nh);
    PF_CHECK(scaled.hole_count() > 0, "library mask vanished when scaled: " + chosen);

    const int bx = static_cast<int>(rng.below(static_cast<uint64_t>(width - side + 1)));
    const int by = static_cast<int>(rng.below(static_cast<uint64_t>(height - side + 1)));
    const int ox = static_cast<int>(rng.below(static_cast<uint64_t>(side - nw + 1)));
    const int oy = static_cast<int>(rng.below(static_cast<uint64_t>(side - nh + 1)));

    HoleMask out(width, height);
    for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x)
            if (scaled.at(x, y)) out.at(bx + ox + x, by + oy + y) = 1;
    return out;
}

SampledHole sample_benchmark_hole(int width, int height, const HoleSpec& base,
                                  const std::string& library_dir, uint64_t seed) {
    Rng rng(mix_seed(seed, 0x601d));
    SampledHole out;
    HoleSpec spec = base;
    spec.seed = mix_seed(seed, 0xa3ea);
    if (rng.below(2) == 0) {
        out.kind = HoleKind::FreeForm;
        spec.kind = out.kind;
        out.mask = freeform_mask(width, height, spec);
    } else {
        out.kind = HoleKind::ObjectShape;
        spec.kind = out.kind;
        out.mask = object_mask(width, height, spec, library_dir);
    }
    return out;
}

HoleSpec scaled_hole_spec(int width, int height, double area_fraction, uint64_t seed) {
    PF_CHECK(width >= 16 && height >= 16, "image too small for hole generation");
    PF_CHECK(area_fraction > 0 && area_fraction < 1, "hole area fraction must be in (0,1)");
    HoleSpec spec;
    const int long_edge = std::max(width, height);
    const int side = static_cast<int>(std::lround(512.0 * long_edge / 1024.0));
    spec.bbox_side = std::clamp(side, 16, std::min(width, height));
    const double area = area_fraction * width * height;
    spec.target_area = std::min(area, 0.85 * spec.bbox_side * spec.bbox_side);
    spec.seed = seed;
    return spec;
}

}  // namespace pf
