#include "patchfill/curation.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "patchfill/image_io.hpp"
#include "patchfill/parallel.hpp"
#include "patchfill/patchmatch.hpp"

namespace pf {

namespace {

void place_axis(double center, int side, int axis, int* pos, int* len) {
    if (side >= axis) {  // side exceeds the axis: cover it entirely
        *pos = 0;
        *len = axis;
        return;
    }
    const int p = static_cast<int>(std::lround(center - side / 2.0));
    *pos = std::clamp(p, 0, axis - side);
    *len = side;
}

void check_verdict(const PairwiseVerdict& v, int i, int j) {
    const bool nonneg = v.o1 >= 0 && v.o2 >= 0 && v.o3 >= 0;
    if (!nonneg || std::abs(v.o1 + v.o2 + v.o3 - 1.0) > 1e-6)
        throw ScorerError("pair (" + std::to_string(i) + "," + std::to_string(j) +
                          "): verdict is not a probability triple");
}

}  // namespace

CropRect auto_crop(const HoleMask& mask, const AutoCropParams& params) {
    params.validate();
    CropRect bbox;
    PF_CHECK(mask_bbox(mask, &bbox), "auto-crop needs at least one hole pixel");
    const int w = mask.width, h = mask.height;
    const double holes = static_cast<double>(mask.hole_count());

    double side = std::max(static_cast<double>(params.base),
                           static_cast<double>(std::max(bbox.width, bbox.height)));
    while (side < w && side < h && holes >= params.tau * side * side) side *= params.gamma;
    const int s = static_cast<int>(std::ceil(side));

    const double cx = bbox.x + bbox.width / 2.0;
    const double cy = bbox.y + bbox.height / 2.0;
    CropRect out;
    place_axis(cx, s, w, &out.x, &out.width);
    place_axis(cy, s, h, &out.y, &out.height);
    return out;
}

PreferenceMatrix build_matrix(const std::vector<PlaneImage>& crops, const HoleMask& mask,
                              Scorer& scorer, int threads) {
    const int n = static_cast<int>(crops.size());
    PF_CHECK(n >= 2, "preference matrix needs at least two candidates");
    for (const PlaneImage& c : crops)
        PF_CHECK(c.width == crops[0].width && c.height == crops[0].height &&
                     c.channels == crops[0].channels,
                 "candidate crops must share dimensions");
    PF_CHECK(mask.width == crops[0].width && mask.height == crops[0].height,
             "mask crop does not match candidate crops");

    struct Pair {
        int i, j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});

    std::vector<PairwiseVerdict> verdicts(pairs.size());
    parallel_for(pairs.size(), threads, [&](size_t k) {
        const auto [i, j] = pairs[k];
        try {
            verdicts[k] = scorer.judge(crops[static_cast<size_t>(i)],
                                       crops[static_cast<size_t>(j)], mask);
        } catch (const ScorerError& e) {
            throw ScorerError("pair (" + std::to_string(i) + "," + std::to_string(j) +
                              "): " + e.what());
        }
        check_verdict(verdicts[k], i, j);
    });

    PreferenceMatrix M;
    M.n = n;
    M.m.assign(static_cast<size_t>(n) * n, 0.0);
    for (size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        // positive entry on the preferred side's row
        const double v = std::clamp(verdicts[k].o1 - verdicts[k].o3, -1.0, 1.0);
        M.at(i, j) = v;
        M.at(j, i) = -v;
    }
    return M;
}

std::vector<double> preference_vector(const PreferenceMatrix& matrix) {
    PF_CHECK(matrix.n >= 1 &&
                 matrix.m.size() == static_cast<size_t>(matrix.n) * matrix.n,
             "malformed preference matrix");
    std::vector<double> p(static_cast<size_t>(matrix.n), 0.0);
    for (int i = 0; i < matrix.n; ++i) {
        double s = 0;
        for (int j = 0; j < matrix.n; ++j) s += matrix.at(i, j);
        p[static_cast<size_t>(i)] = s / matrix.n;
    }
    return p;
}

SelectionResult select(const CandidateSet& candidates, const HoleMask& mask, Scorer& scorer,
                       const SelectionParams& params) {
    params.validate();
    const PlaneImage& first = candidates.images[0];
    PF_CHECK(!first.empty() && first.channels == 3, "candidates must be RGB images");
    for (const PlaneImage& img : candidates.images)
        PF_CHECK(img.width == first.width && img.height == first.height && img.channels == 3,
                 "candidates must share dimensions");
    PF_CHECK(mask.width == first.width && mask.height == first.height,
             "mask does not match candidate dimensions");

    CurationReport report;
    report.crop = auto_crop(mask, params.crop);
    report.scorer_identity = scorer.identity();

    const HoleMask mask_crop = resize_mask_nearest(extract_mask_crop(mask, report.crop),
                                                   params.scorer_size, params.scorer_size);
    std::vector<PlaneImage> crops;
    crops.reserve(candidates.images.size());
    for (const PlaneImage& img : candidates.images)
        crops.push_back(resize_bilinear(extract_crop(img, report.crop), params.scorer_size,
                                        params.scorer_size));

    report.matrix = build_matrix(crops, mask_crop, scorer, params.threads);
    report.preference = preference_vector(report.matrix);
    report.winner = 0;
    for (int i = 1; i < static_cast<int>(report.preference.size()); ++i)
        if (report.preference[static_cast<size_t>(i)] >
            report.preference[static_cast<size_t>(report.winner)])
            report.winner = i;

    SelectionResult res;
    res.winner = candidates.images[static_cast<size_t>(report.winner)];
    res.combo = GuideCombo::from_index(report.winner);
    res.report = std::move(report);
    return res;
}

namespace {

// mean second difference across hole->context boundary crossings; falls back
// to the raw step where the outward continuation leaves the image or re-enters
// the hole
double seam_penalty(const PlaneImage& img, const HoleMask& mask) {
    static constexpr int DX[4] = {1, -1, 0, 0};
    static constexpr int DY[4] = {0, 0, 1, -1};
    const int w = img.width, h = img.height, ch = img.channels;
    double acc = 0;
    size_t n = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            for (int d = 0; d < 4; ++d) {
                const int qx = x + DX[d], qy = y + DY[d];
                if (qx < 0 || qy < 0 || qx >= w || qy >= h || mask.at(qx, qy)) continue;
                const int q2x = qx + DX[d], q2y = qy + DY[d];
                const bool has_q2 =
                    q2x >= 0 && q2y >= 0 && q2x < w && q2y < h && !mask.at(q2x, q2y);
                double e = 0;
                for (int c = 0; c < ch; ++c) {
                    const double a = img.at(x, y, c), b = img.at(qx, qy, c);
                    e += has_q2 ? std::abs(a - 2.0 * b + img.at(q2x, q2y, c))
                                : std::abs(a - b);
                }
                acc += e / ch;
                ++n;
            }
        }
    return n ? acc / static_cast<double>(n) : 0.0;
}

// mean per-pixel NN patch distance from hole patches to the hole-free region
double incoherence_penalty(const PlaneImage& img, const HoleMask& mask) {
    PatchParams pp;
    if (img.width < pp.patch_size || img.height < pp.patch_size) return 0.0;
    StackView v;
    v.rgb = &img;
    v.n_guides = 0;
    Rng rng(0xc0ffee5eedULL);
    NNField f;
    try {
        f = init_nnf(v, mask, pp, false, rng);
    } catch (const InputError&) {
        return 1.0;  // no hole-free source patch exists
    }
    for (int it = 0; it < 3; ++it) pm_iterate(f, v, pp, false, rng);

    const int r = pp.patch_size / 2;
    double acc = 0;
    size_t n = 0;
    for (int y = r; y < img.height - r; ++y)
        for (int x = r; x < img.width - r; ++x) {
            const size_t i = f.idx(x, y);
            if (!f.target[i] || !mask.at(x, y)) continue;
            acc += f.dist[i];
            ++n;
        }
    if (!n) return 0.0;
    return acc / static_cast<double>(n) / (pp.patch_size * pp.patch_size);
}

// high-frequency deficit of the hole relative to the context
double blur_penalty(const PlaneImage& img, const HoleMask& mask) {
    const PlaneImage lum = to_luminance(img);
    const int w = lum.width, h = lum.height;
    double hole = 0, bg = 0;
    size_t nh = 0, nb = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double c = lum.at(x, y);
            const double lap = 4.0 * c - lum.at(std::max(x - 1, 0), y) -
                               lum.at(std::min(x + 1, w - 1), y) -
                               lum.at(x, std::max(y - 1, 0)) -
                               lum.at(x, std::min(y + 1, h - 1));
            const double e = lap * lap;
            if (mask.at(x, y)) {
                hole += e;
                ++nh;
            } else {
                bg += e;
                ++nb;
            }
        }
    if (!nh || !nb) return 0.0;
    const double bg_mean = bg / static_cast<double>(nb);
    if (bg_mean < 1e-12) return 0.0;
    return std::max(0.0, 1.0 - (hole / static_cast<double>(nh)) / bg_mean);
}

}  // namespace

double HeuristicScorer::penalty(const PlaneImage& img, const HoleMask& mask) {
    const uint64_t key =
        fnv1a(mask.data.data(), mask.data.size(), img.content_hash());
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const double p = params_.seam_weight * seam_penalty(img, mask) +
                     params_.incoherence_weight * incoherence_penalty(img, mask) +
                     params_.blur_weight * blur_penalty(img, mask);
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, p);
    return p;
}

PairwiseVerdict HeuristicScorer::judge(const PlaneImage& left, const PlaneImage& right,
                                       const HoleMask& mask) {
    PF_CHECK(left.width == right.width && left.height == right.height &&
                 left.channels == right.channels,
             "scorer inputs must share dimensions");
    PF_CHECK(mask.width == left.width && mask.height == left.height,
             "scorer mask does not match inputs");
    const double pl = penalty(left, mask);
    const double pr = penalty(right, mask);
    // softmax over {+d, 0, -d}; the symmetric max-shift and min/max summation
    // order make swapping the arguments swap o1/o3 bit-exactly
    const double zl = (pr - pl) / params_.temperature;
    const double zr = -zl;
    const double m = std::max(std::abs(zl), 0.0);
    const double el = std::exp(zl - m);
    const double et = std::exp(-m);
    const double er = std::exp(zr - m);
    const double s = et + (std::min(el, er) + std::max(el, er));
    return {el / s, et / s, er / s};
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

std::string trimmed_preview(const std::string& s, size_t limit = 120) {
    std::string t = s.substr(0, limit);
    for (char& c : t)
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    if (s.size() > limit) t += "...";
    return t;
}

}  // namespace

PairwiseVerdict CommandScorer::judge(const PlaneImage& left, const PlaneImage& right,
                                     const HoleMask& mask) {
    namespace fs = std::filesystem;
    PF_CHECK(left.width == right.width && left.height == right.height &&
                 left.channels == right.channels,
             "scorer inputs must share dimensions");
    PF_CHECK(mask.width == left.width && mask.height == left.height,
             "scorer mask does not match inputs");

    std::string tmpl = (fs::temp_directory_path() / "patchfill-scorer-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw ScorerError("cannot create scorer temp directory");
    const fs::path dir(buf.data());
    struct Cleanup {
        fs::path d;
        ~Cleanup() {
            std::error_code ec;
            fs::remove_all(d, ec);
        }
    } guard{dir};

    write_png((dir / "left.png").string(), left);
    write_png((dir / "right.png").string(), right);
    write_png_mask((dir / "mask.png").string(), mask);

    const std::string cmd = command_ + " " + shell_quote(dir.string());
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw ScorerError("cannot launch scorer command: " + command_);
    std::string out;
    char chunk[4096];
    size_t got;
    while ((got = fread(chunk, 1, sizeof chunk, pipe)) > 0) out.append(chunk, got);
    const int status = pclose(pipe);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw ScorerError("scorer command failed (status " + std::to_string(status) +
                          "): " + command_);

    std::istringstream ss(out);
    PairwiseVerdict v;
    if (!(ss >> v.o1 >> v.o2 >> v.o3))
        throw ScorerError("scorer output malformed, expected 3 probabilities: \"" +
                          trimmed_preview(out) + "\"");
    std::string extra;
    if (ss >> extra)
        throw ScorerError("scorer output has trailing tokens: \"" + trimmed_preview(out) +
                          "\"");
    const bool nonneg = v.o1 >= 0 && v.o2 >= 0 && v.o3 >= 0;
    if (!nonneg || std::abs(v.o1 + v.o2 + v.o3 - 1.0) > 1e-6)
        throw ScorerError("scorer output is not a probability triple: \"" +
                          trimmed_preview(out) + "\"");
    return v;
}

}  // namespace pf
