#include "patchfill/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "patchfill/curation.hpp"
#include "patchfill/image_io.hpp"
#include "patchfill/parallel.hpp"

namespace pf {

double psnr(const PlaneImage& a, const PlaneImage& b) {
    PF_CHECK(a.width == b.width && a.height == b.height, "psnr: dimension mismatch");
    PF_CHECK(a.channels == 3 && b.channels == 3, "psnr: inputs must be RGB");
    double se = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.data.size());
    if (mse <= 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

// separable Gaussian with valid-window semantics: output is
// (w - win + 1) x (h - win + 1)
std::vector<double> gauss_valid(const std::vector<double>& src, int w, int h, int* ow,
                                int* oh) {
    double g[kSsimWindow];
    double sum = 0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - (kSsimWindow - 1) / 2.0;
        g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[i];
    }
    for (double& v : g) v /= sum;

    const int vw = w - kSsimWindow + 1, vh = h - kSsimWindow + 1;
    std::vector<double> tmp(static_cast<size_t>(vw) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0;
            for (int k = 0; k < kSsimWindow; ++k)
                acc += g[k] * src[static_cast<size_t>(y) * w + x + k];
            tmp[static_cast<size_t>(y) * vw + x] = acc;
        }
    std::vector<double> out(static_cast<size_t>(vw) * vh);
    for (int y = 0; y < vh; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0;
            for (int k = 0; k < kSsimWindow; ++k)
                acc += g[k] * tmp[static_cast<size_t>(y + k) * vw + x];
            out[static_cast<size_t>(y) * vw + x] = acc;
        }
    *ow = vw;
    *oh = vh;
    return out;
}

}  // namespace

double ssim(const PlaneImage& a, const PlaneImage& b) {
    PF_CHECK(a.width == b.width && a.height == b.height, "ssim: dimension mismatch");
    PF_CHECK(a.channels == b.channels, "ssim: channel mismatch");
    PF_CHECK(a.width >= kSsimWindow && a.height >= kSsimWindow,
             "ssim: image smaller than the window");

    const PlaneImage la = a.channels == 1 ? a : to_luminance(a);
    const PlaneImage lb = b.channels == 1 ? b : to_luminance(b);
    const int w = a.width, h = a.height;
    const size_t n = static_cast<size_t>(w) * h;
    std::vector<double> xa(n), xb(n), xaa(n), xbb(n), xab(n);
    for (size_t i = 0; i < n; ++i) {
        const double va = la.data[i], vb = lb.data[i];
        xa[i] = va;
        xb[i] = vb;
        xaa[i] = va * va;
        xbb[i] = vb * vb;
        xab[i] = va * vb;
    }
    int vw = 0, vh = 0;
    const std::vector<double> ma = gauss_valid(xa, w, h, &vw, &vh);
    const std::vector<double> mb = gauss_valid(xb, w, h, &vw, &vh);
    const std::vector<double> maa = gauss_valid(xaa, w, h, &vw, &vh);
    const std::vector<double> mbb = gauss_valid(xbb, w, h, &vw, &vh);
    const std::vector<double> mab = gauss_valid(xab, w, h, &vw, &vh);

    constexpr double c1 = 0.01 * 0.01;  // (K1*L)^2
    constexpr double c2 = 0.03 * 0.03;  // (K2*L)^2
    double acc = 0;
    const size_t vn = static_cast<size_t>(vw) * vh;
    for (size_t i = 0; i < vn; ++i) {
        const double mu_a = ma[i], mu_b = mb[i];
        const double var_a = maa[i] - mu_a * mu_a;
        const double var_b = mbb[i] - mu_b * mu_b;
        const double cov = mab[i] - mu_a * mu_b;
        acc += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
    return acc / static_cast<double>(vn);
}

std::vector<CorpusEntry> load_manifest(const std::string& path) {
    namespace fs = std::filesystem;
    std::ifstream in(path);
    PF_CHECK(in.good(), "cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("manifest is not valid JSON (" + path + "): " + e.what());
    }
    PF_CHECK(j.is_array(), "manifest must be a JSON list: " + path);
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        return fs::path(p).is_absolute() ? p : (base / p).string();
    };
    std::vector<CorpusEntry> out;
    std::set<std::string> ids;
    for (const auto& item : j) {
        PF_CHECK(item.is_object() && item.contains("image") && item.contains("mask") &&
                     item.contains("id") && item["image"].is_string() &&
                     item["mask"].is_string() && item["id"].is_string(),
                 "manifest entries need string fields image, mask, id: " + path);
        CorpusEntry e;
        e.image = resolve(item["image"].get<std::string>());
        e.mask = resolve(item["mask"].get<std::string>());
        e.id = item["id"].get<std::string>();
        PF_CHECK(ids.insert(e.id).second, "duplicate manifest id: " + e.id);
        out.push_back(std::move(e));
    }
    PF_CHECK(!out.empty(), "manifest lists no entries: " + path);
    return out;
}

namespace {

std::vector<CropRect> eval_windows(const HoleMask& mask, const EvalProtocol& protocol,
                                   const std::string& id) {
    if (protocol.mode == EvalMode::Full) return {auto_crop(mask)};

    std::vector<std::pair<int, int>> holes;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) holes.emplace_back(x, y);
    PF_CHECK(!holes.empty(), "mask has no hole pixels for patch crops: " + id);

    Rng rng(mix_seed(protocol.seed, fnv1a_str(id)));
    const int pw = std::min(protocol.patch_size, mask.width);
    const int ph = std::min(protocol.patch_size, mask.height);
    std::vector<CropRect> out;
    out.reserve(static_cast<size_t>(protocol.patch_count));
    for (int k = 0; k < protocol.patch_count; ++k) {
        const auto [cx, cy] = holes[rng.below(holes.size())];
        CropRect r;
        r.width = pw;
        r.height = ph;
        r.x = std::clamp(cx - pw / 2, 0, mask.width - pw);
        r.y = std::clamp(cy - ph / 2, 0, mask.height - ph);
        out.push_back(r);
    }
    return out;
}

double capped(double psnr_db) { return std::min(psnr_db, kPsnrCap); }

}  // namespace

EvalReport run_eval(const std::vector<CorpusEntry>& corpus,
                    const std::vector<std::string>& method_dirs, const EvalProtocol& protocol,
                    const std::string& config_hash, int threads) {
    namespace fs = std::filesystem;
    protocol.validate();
    PF_CHECK(!corpus.empty(), "corpus is empty");
    PF_CHECK(!method_dirs.empty(), "no method directories given");

    // every (method, entry) output must exist before any work starts
    std::vector<std::string> missing;
    for (const std::string& dir : method_dirs)
        for (const CorpusEntry& e : corpus) {
            const fs::path p = fs::path(dir) / (e.id + ".png");
            if (!fs::exists(p)) missing.push_back(p.string());
        }
    if (!missing.empty()) {
        std::string msg = "missing method outputs (" + std::to_string(missing.size()) + "):";
        for (const std::string& p : missing) msg += "\n  " + p;
        throw InputError(msg);
    }

    const std::string mode_name = protocol.mode == EvalMode::Full ? "full" : "patch";
    std::vector<std::vector<EvalRecord>> per_entry(corpus.size());
    parallel_for(corpus.size(), threads, [&](size_t ei) {
        const CorpusEntry& e = corpus[ei];
        const PlaneImage gt = read_png_rgb(e.image);
        const HoleMask mask = read_png_mask(e.mask);
        PF_CHECK(mask.width == gt.width && mask.height == gt.height,
                 "mask does not match image: " + e.id);
        const std::vector<CropRect> windows = eval_windows(mask, protocol, e.id);

        std::vector<PlaneImage> gt_crops;
        gt_crops.reserve(windows.size());
        for (const CropRect& r : windows) gt_crops.push_back(extract_crop(gt, r));

        for (const std::string& dir : method_dirs) {
            const auto t0 = std::chrono::steady_clock::now();
            const PlaneImage out = read_png_rgb((fs::path(dir) / (e.id + ".png")).string());
            PF_CHECK(out.width == gt.width && out.height == gt.height,
                     "method output does not match image dims: " + e.id + " in " + dir);
            double psnr_sum = 0, ssim_sum = 0;
            for (size_t k = 0; k < windows.size(); ++k) {
                const PlaneImage oc = extract_crop(out, windows[k]);
                psnr_sum += capped(psnr(gt_crops[k], oc));
                ssim_sum += ssim(gt_crops[k], oc);
            }
            EvalRecord rec;
            rec.id = e.id;
            rec.method = dir;
            rec.mode = mode_name;
            rec.psnr_db = psnr_sum / static_cast<double>(windows.size());
            rec.ssim_val = ssim_sum / static_cast<double>(windows.size());
            rec.eval_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            per_entry[ei].push_back(std::move(rec));
        }
    });

    EvalReport report;
    report.protocol = protocol;
    report.config_hash = config_hash;
    for (auto& v : per_entry)
        for (auto& r : v) report.records.push_back(std::move(r));
    std::sort(report.records.begin(), report.records.end(),
              [](const EvalRecord& a, const EvalRecord& b) {
                  return a.id != b.id ? a.id < b.id : a.method < b.method;
              });

    // means accumulated in sorted record order: independent of manifest order
    for (const std::string& dir : method_dirs) {
        EvalAggregate agg;
        agg.method = dir;
        agg.mode = mode_name;
        double ps = 0, ss = 0;
        for (const EvalRecord& r : report.records) {
            if (r.method != dir) continue;
            ps += r.psnr_db;
            ss += r.ssim_val;
            ++agg.count;
        }
        PF_ASSERT(agg.count == corpus.size(), "aggregate is missing records");
        agg.mean_psnr = ps / static_cast<double>(agg.count);
        agg.mean_ssim = ss / static_cast<double>(agg.count);
        report.aggregates.push_back(std::move(agg));
    }
    std::sort(report.aggregates.begin(), report.aggregates.end(),
              [](const EvalAggregate& a, const EvalAggregate& b) { return a.method < b.method; });
    return report;
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    PF_CHECK(out.good(), "cannot write report: " + path);
    out << "id,method,mode,psnr_db,ssim,eval_seconds\n";
    char buf[128];
    for (const EvalRecord& r : report.records) {
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.3f\n", r.psnr_db, r.ssim_val,
                      r.eval_seconds);
        out << r.id << ',' << r.method << ',' << r.mode << buf;
    }
    PF_CHECK(out.good(), "write failed: " + path);
}

void write_eval_json(const std::string& path, const EvalReport& report) {
    nlohmann::json j;
    j["protocol"] = {{"mode", report.protocol.mode == EvalMode::Full ? "full" : "patch"},
                     {"patch_count", report.protocol.patch_count},
                     {"patch_size", report.protocol.patch_size},
                     {"seed", report.protocol.seed}};
    j["config_hash"] = report.config_hash;
    nlohmann::json aggs = nlohmann::json::array();
    for (const EvalAggregate& a : report.aggregates)
        aggs.push_back({{"method", a.method},
                        {"mode", a.mode},
                        {"mean_psnr", a.mean_psnr},
                        {"mean_ssim", a.mean_ssim},
                        {"count", a.count}});
    j["aggregates"] = aggs;
    std::ofstream out(path);
    PF_CHECK(out.good(), "cannot write report: " + path);
    out << j.dump(2) << '\n';
    PF_CHECK(out.good(), "write failed: " + path);
}

}  // namespace pf
