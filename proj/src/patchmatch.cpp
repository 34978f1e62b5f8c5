#include "patchfill/patchmatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "patchfill/image_io.hpp"
#include "patchfill/parallel.hpp"

namespace pf {

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();
constexpr int kMaxRowLanes = 31 * 3;  // patch_size cap × RGB

struct FitSums {
    double t = 0, s = 0, tt = 0, ss = 0, st = 0;
};

void fit_channel(const FitSums& f, double n, const PatchParams& p, double* g_out,
                 double* b_out) {
    const double denom = n * f.ss - f.s * f.s;
    double g = 1.0;
    if (denom > 1e-12) g = (n * f.st - f.s * f.t) / denom;
    g = std::clamp(g, p.gain_min, p.gain_max);
    double b = std::clamp((f.t - g * f.s) / n, p.bias_min, p.bias_max);
    *g_out = g;
    *b_out = b;
}

// Σ (t - g·s - b)² expanded in the accumulated sums; exact for clamped g, b.
double fit_residual(const FitSums& f, double n, double g, double b) {
    const double rss =
        f.tt - 2 * g * f.st - 2 * b * f.t + g * g * f.ss + 2 * g * b * f.s + n * b * b;
    return rss < 0 ? 0 : rss;
}

// RGB gain/bias distance in one pass: lane-wise sums over interleaved rows,
// folded into per-channel fit sums afterwards. Double accumulation keeps the
// "distance 0 within 1e-6" contract for exactly-compensable pairs.
double rgb_term_gainbias(const PlaneImage& img, int tx, int ty, int sx, int sy, int r,
                         const PatchParams& p, GainBias* gb_out) {
    const int L = (2 * r + 1) * 3;
    double at[kMaxRowLanes], as[kMaxRowLanes], att[kMaxRowLanes], ass[kMaxRowLanes],
        ast[kMaxRowLanes];
    for (int i = 0; i < L; ++i) at[i] = as[i] = att[i] = ass[i] = ast[i] = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        const float* t = img.row(ty + dy) + (tx - r) * 3;
        const float* s = img.row(sy + dy) + (sx - r) * 3;
        for (int i = 0; i < L; ++i) {
            const double tv = t[i], sv = s[i];
            at[i] += tv;
            as[i] += sv;
            att[i] += tv * tv;
            ass[i] += sv * sv;
            ast[i] += tv * sv;
        }
    }
    const double n = static_cast<double>(2 * r + 1) * (2 * r + 1);
    double total = 0;
    for (int c = 0; c < 3; ++c) {
        FitSums f;
        for (int i = c; i < L; i += 3) {
            f.t += at[i];
            f.s += as[i];
            f.tt += att[i];
            f.ss += ass[i];
            f.st += ast[i];
        }
        double g, b;
        fit_channel(f, n, p, &g, &b);
        total += fit_residual(f, n, g, b);
        if (gb_out) {
            gb_out->gain[c] = static_cast<float>(g);
            gb_out->bias[c] = static_cast<float>(b);
        }
    }
    return total;
}

double rgb_term_plain(const PlaneImage& img, int tx, int ty, int sx, int sy, int r,
                      double bound) {
    const int L = (2 * r + 1) * 3;
    double acc = 0;
    for (int dy = -r; dy <= r; ++dy) {
        const float* t = img.row(ty + dy) + (tx - r) * 3;
        const float* s = img.row(sy + dy) + (sx - r) * 3;
        double row = 0;
        for (int i = 0; i < L; ++i) {
            const double d = static_cast<double>(t[i]) - s[i];
            row += d * d;
        }
        acc += row;
        if (acc > bound) return acc;
    }
    return acc;
}

double guide_term_euclid(const PlaneImage& g, int tx, int ty, int sx, int sy, int r,
                         double bound) {
    const int L = 2 * r + 1;
    double acc = 0;
    for (int dy = -r; dy <= r; ++dy) {
        const float* t = g.row(ty + dy) + (tx - r);
        const float* s = g.row(sy + dy) + (sx - r);
        double row = 0;
        for (int i = 0; i < L; ++i) {
            const double d = static_cast<double>(t[i]) - s[i];
            row += d * d;
        }
        acc += row;
        if (acc > bound) return acc;
    }
    return acc;
}

double guide_term_label(const PlaneImage& g, int tx, int ty, int sx, int sy, int r) {
    const int L = 2 * r + 1;
    int mismatches = 0;
    for (int dy = -r; dy <= r; ++dy) {
        const float* t = g.row(ty + dy) + (tx - r);
        const float* s = g.row(sy + dy) + (sx - r);
        for (int i = 0; i < L; ++i) mismatches += t[i] != s[i];
    }
    return mismatches;
}

}  // namespace

float view_patch_distance(const StackView& v, int tx, int ty, int sx, int sy,
                          const PatchParams& params, bool gainbias, float cutoff,
                          GainBias* gb) {
    const int r = params.patch_size / 2;
    double dist;
    if (gainbias) {
        dist = v.rgb_weight * rgb_term_gainbias(*v.rgb, tx, ty, sx, sy, r, params, gb);
    } else {
        if (gb) *gb = GainBias{};
        const double bound =
            cutoff < kInf ? static_cast<double>(cutoff) / v.rgb_weight : kInf;
        dist = v.rgb_weight * rgb_term_plain(*v.rgb, tx, ty, sx, sy, r, bound);
    }
    for (int gi = 0; gi < v.n_guides; ++gi) {
        if (dist > cutoff) break;
        const double w = v.guide_weight[gi];
        if (v.guide_is_label[gi]) {
            const double cost2 = static_cast<double>(v.mismatch_cost) * v.mismatch_cost;
            dist += w * cost2 * guide_term_label(*v.guide[gi], tx, ty, sx, sy, r);
        } else {
            const double bound = cutoff < kInf ? (cutoff - dist) / w : kInf;
            dist += w * guide_term_euclid(*v.guide[gi], tx, ty, sx, sy, r, bound);
        }
    }
    return static_cast<float>(dist);
}

GainBias fit_patch_gain_bias(const PlaneImage& rgb, int tx, int ty, int sx, int sy,
                             const PatchParams& params) {
    GainBias gb;
    rgb_term_gainbias(rgb, tx, ty, sx, sy, params.patch_size / 2, params, &gb);
    return gb;
}

PatchCost weighted_patch_distance(const GuideStack& gs, int tx, int ty, int sx, int sy,
                                  const PatchParams& params, bool gainbias) {
    params.validate();
    const PlaneImage& st = gs.stack;
    const int r = params.patch_size / 2;
    PF_CHECK(tx >= r && ty >= r && tx < st.width - r && ty < st.height - r,
             "target patch out of bounds");
    PF_CHECK(sx >= r && sy >= r && sx < st.width - r && sy < st.height - r,
             "source patch out of bounds");
    const int C = st.channels;
    PF_ASSERT(static_cast<int>(gs.weights.per_channel.size()) == C,
              "weights do not match stack channels");
    PF_ASSERT(static_cast<int>(gs.comparisons.size()) == C,
              "comparisons do not match stack channels");

    const double n = static_cast<double>(2 * r + 1) * (2 * r + 1);
    PatchCost out;
    double total = 0;
    for (int c = 0; c < C; ++c) {
        const double w = gs.weights.per_channel[static_cast<size_t>(c)];
        if (gs.comparisons[static_cast<size_t>(c)] == GuideComparison::LabelMismatch) {
            int mism = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    mism += st.at(tx + dx, ty + dy, c) != st.at(sx + dx, sy + dy, c);
            total += w * gs.mismatch_cost * gs.mismatch_cost * mism;
        } else if (c < 3 && gainbias) {
            FitSums f;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double tv = st.at(tx + dx, ty + dy, c);
                    const double sv = st.at(sx + dx, sy + dy, c);
                    f.t += tv;
                    f.s += sv;
                    f.tt += tv * tv;
                    f.ss += sv * sv;
                    f.st += tv * sv;
                }
            double g, b;
            fit_channel(f, n, params, &g, &b);
            total += w * fit_residual(f, n, g, b);
            out.gb.gain[c] = static_cast<float>(g);
            out.gb.bias[c] = static_cast<float>(b);
        } else {
            double ssd = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double d = static_cast<double>(st.at(tx + dx, ty + dy, c)) -
                                     st.at(sx + dx, sy + dy, c);
                    ssd += d * d;
                }
            total += w * ssd;
        }
    }
    out.distance = static_cast<float>(total);
    return out;
}

NNField init_nnf(const StackView& v, const HoleMask& mask, const PatchParams& params,
                 bool gainbias, Rng& rng, const NNField* prior) {
    params.validate();
    const int w = v.width(), h = v.height();
    PF_CHECK(mask.width == w && mask.height == h, "mask dims differ from image");
    PF_CHECK(w >= params.patch_size && h >= params.patch_size,
             "image smaller than one patch");
    const int r = params.radius();

    NNField f;
    f.width = w;
    f.height = h;
    const size_t n = static_cast<size_t>(w) * h;
    f.dx.assign(n, 0);
    f.dy.assign(n, 0);
    f.dist.assign(n, 0.f);
    f.target.assign(n, 0);
    f.source_ok.assign(n, 0);

    // hole-count integral image for O(1) patch validity
    std::vector<uint32_t> integ(static_cast<size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
        const size_t row = static_cast<size_t>(y + 1) * (w + 1);
        const size_t prev = static_cast<size_t>(y) * (w + 1);
        uint32_t acc = 0;
        for (int x = 0; x < w; ++x) {
            acc += mask.at(x, y) != 0;
            integ[row + x + 1] = integ[prev + x + 1] + acc;
        }
    }
    auto box_holes = [&](int x0, int y0, int x1, int y1) {  // inclusive corners
        const size_t a = static_cast<size_t>(y0) * (w + 1);
        const size_t b = static_cast<size_t>(y1 + 1) * (w + 1);
        return integ[b + x1 + 1] - integ[b + x0] - integ[a + x1 + 1] + integ[a + x0];
    };

    std::vector<int32_t> valid;
    for (int y = r; y < h - r; ++y)
        for (int x = r; x < w - r; ++x)
            if (box_holes(x - r, y - r, x + r, y + r) == 0) {
                f.source_ok[f.idx(x, y)] = 1;
                valid.push_back(static_cast<int32_t>(f.idx(x, y)));
            }
    PF_CHECK(!valid.empty(), "no valid source patch exists");

    const HoleMask dil = dilate_mask(mask, r);
    for (int y = r; y < h - r; ++y)
        for (int x = r; x < w - r; ++x)
            if (dil.at(x, y)) f.target[f.idx(x, y)] = 1;

    int pw = 0;
    if (prior) {
        pw = prior->width;
        PF_ASSERT((w == 2 * pw || w == 2 * pw - 1) &&
                      (h == 2 * prior->height || h == 2 * prior->height - 1),
                  "prior field dims are not the ceil-halved level");
    }

    for (int y = r; y < h - r; ++y)
        for (int x = r; x < w - r; ++x) {
            const size_t i = f.idx(x, y);
            if (!f.target[i]) continue;
            bool set = false;
            if (prior) {
                const size_t pi = static_cast<size_t>(y / 2) * pw + (x / 2);
                if (prior->target[pi]) {
                    const int cdx = prior->dx[pi] * 2, cdy = prior->dy[pi] * 2;
                    const int sx = x + cdx, sy = y + cdy;
                    if (sx >= r && sy >= r && sx < w - r && sy < h - r &&
                        f.source_ok[f.idx(sx, sy)]) {
                        f.dx[i] = cdx;
                        f.dy[i] = cdy;
                        set = true;
                    }
                }
            }
            if (!set) {
                const int32_t pick = valid[rng.below(valid.size())];
                f.dx[i] = static_cast<int32_t>(pick % w) - x;
                f.dy[i] = static_cast<int32_t>(pick / w) - y;
            }
        }

    refresh_distances(f, v, params, gainbias, 1);
    return f;
}

namespace {

// Shared per-pixel improvement step; scans one row span with the given
// propagation direction and band-restricted vertical neighbor.
struct IterCtx {
    NNField* f;
    const StackView* v;
    const PatchParams* p;
    bool gainbias;
    int r;
    std::vector<int> radii;
};

void improve_pixel(const IterCtx& c, int x, int y, int dir, int band_y0, int band_y1,
                   Rng& rng) {
    NNField& f = *c.f;
    const int w = f.width, h = f.height, r = c.r;
    const size_t i = f.idx(x, y);
    int bdx = f.dx[i], bdy = f.dy[i];
    float bd = f.dist[i];

    auto try_offset = [&](int cdx, int cdy) {
        if (cdx == bdx && cdy == bdy) return;
        const int sx = x + cdx, sy = y + cdy;
        if (sx < r || sy < r || sx >= w - r || sy >= h - r) return;
        if (!f.source_ok[f.idx(sx, sy)]) return;
        const float d = view_patch_distance(*c.v, x, y, sx, sy, *c.p, c.gainbias, bd);
        if (d < bd) {
            bd = d;
            bdx = cdx;
            bdy = cdy;
        }
    };

    // propagation from the already-visited horizontal and vertical neighbors
    const int px = x - dir;
    if (px >= 0 && px < w) {
        const size_t pi = f.idx(px, y);
        if (f.target[pi]) try_offset(f.dx[pi], f.dy[pi]);
    }
    const int py = y - dir;
    if (py >= band_y0 && py < band_y1) {
        const size_t pi = f.idx(x, py);
        if (f.target[pi]) try_offset(f.dx[pi], f.dy[pi]);
    }

    // exponentially decaying random search around the current best
    for (int rad : c.radii) {
        const int cdx = bdx + static_cast<int>(rng.range(-rad, rad));
        const int cdy = bdy + static_cast<int>(rng.range(-rad, rad));
        try_offset(cdx, cdy);
    }

    f.dx[i] = bdx;
    f.dy[i] = bdy;
    f.dist[i] = bd;
}

IterCtx make_ctx(NNField& f, const StackView& v, const PatchParams& p, bool gainbias) {
    IterCtx c{&f, &v, &p, gainbias, p.radius(), {}};
    for (double rr = std::max(f.width, f.height); rr >= 1.0; rr *= p.alpha)
        c.radii.push_back(static_cast<int>(rr));
    return c;
}

void iterate_band(const IterCtx& c, bool reverse, int band_y0, int band_y1, Rng& rng) {
    NNField& f = *c.f;
    const int w = f.width, r = c.r;
    const int y_lo = std::max(band_y0, r), y_hi = std::min(band_y1, f.height - r);
    if (!reverse) {
        for (int y = y_lo; y < y_hi; ++y)
            for (int x = r; x < w - r; ++x)
                if (f.target[f.idx(x, y)]) improve_pixel(c, x, y, 1, band_y0, band_y1, rng);
    } else {
        for (int y = y_hi - 1; y >= y_lo; --y)
            for (int x = w - r - 1; x >= r; --x)
                if (f.target[f.idx(x, y)]) improve_pixel(c, x, y, -1, band_y0, band_y1, rng);
    }
}

}  // namespace

void pm_iterate(NNField& f, const StackView& v, const PatchParams& params, bool gainbias,
                Rng& rng) {
    PF_ASSERT(f.width == v.width() && f.height == v.height(), "field/image dims differ");
    const IterCtx c = make_ctx(f, v, params, gainbias);
    const bool reverse = (f.iterations_done % 2) == 1;
    iterate_band(c, reverse, 0, f.height, rng);
    ++f.iterations_done;
}

void pm_iterate_tiled(NNField& f, const StackView& v, const PatchParams& params,
                      bool gainbias, uint64_t iter_seed, int band_rows, int threads) {
    PF_ASSERT(f.width == v.width() && f.height == v.height(), "field/image dims differ");
    PF_ASSERT(band_rows >= params.patch_size, "band_rows must cover a patch");
    const IterCtx c = make_ctx(f, v, params, gainbias);
    const bool reverse = (f.iterations_done % 2) == 1;
    const int bands = (f.height + band_rows - 1) / band_rows;
    parallel_for(bands, threads, [&](int b) {
        Rng rng(mix_seed(iter_seed, static_cast<uint64_t>(b)));
        iterate_band(c, reverse, b * band_rows, std::min((b + 1) * band_rows, f.height),
                     rng);
    });
    ++f.iterations_done;
}

void refresh_distances(NNField& f, const StackView& v, const PatchParams& params,
                       bool gainbias, int threads) {
    const int band_rows = 64;
    const int bands = (f.height + band_rows - 1) / band_rows;
    parallel_for(bands, threads, [&](int b) {
        const int y1 = std::min((b + 1) * band_rows, f.height);
        for (int y = b * band_rows; y < y1; ++y)
            for (int x = 0; x < f.width; ++x) {
                const size_t i = f.idx(x, y);
                if (!f.target[i]) continue;
                f.dist[i] = view_patch_distance(v, x, y, x + f.dx[i], y + f.dy[i], params,
                                                gainbias, kInf);
            }
    });
}

size_t nnf_validity_violations(const NNField& f, const StackView& v, const HoleMask& mask,
                               const PatchParams& params, bool gainbias, float dist_tol) {
    const int w = f.width, h = f.height, r = params.radius();
    size_t bad = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = f.idx(x, y);
            if (!f.target[i]) continue;
            const int sx = x + f.dx[i], sy = y + f.dy[i];
            if (sx < r || sy < r || sx >= w - r || sy >= h - r) {
                ++bad;
                continue;
            }
            bool hole = false;
            for (int dy = -r; dy <= r && !hole; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    if (mask.at(sx + dx, sy + dy)) {
                        hole = true;
                        break;
                    }
            if (hole) {
                ++bad;
                continue;
            }
            const float d = view_patch_distance(v, x, y, sx, sy, params, gainbias, kInf);
            if (std::fabs(d - f.dist[i]) > dist_tol * std::max(1.f, std::fabs(d))) ++bad;
        }
    return bad;
}

void write_nnf_dump(const std::string& path, const NNField& f) {
    write_nnf(path, f.width, f.height, f.dx, f.dy, f.dist);
}

}  // namespace pf
