#pragma once

#include <string>
#include <vector>

#include "patchfill/image.hpp"

namespace pf {

// Sentinel used in records and aggregates when two images are identical.
constexpr double kPsnrCap = 99.0;

// 10*log10(1/MSE) over all RGB samples in the normalized domain; +inf for
// identical images.
double psnr(const PlaneImage& a, const PlaneImage& b);

// Mean local SSIM over Rec.601 luminance: 11x11 Gaussian window (sigma 1.5),
// K1=0.01, K2=0.03, dynamic range 1, averaged over fully valid windows.
double ssim(const PlaneImage& a, const PlaneImage& b);

enum class EvalMode { Full, Patch };

struct EvalProtocol {
    EvalMode mode = EvalMode::Full;
    int patch_count = 10;
    int patch_size = 256;
    uint64_t seed = 0;

    void validate() const {
        PF_CHECK(patch_count >= 1, "patch count must be positive");
        PF_CHECK(patch_size >= 16, "patch size too small");
    }
};

struct CorpusEntry {
    std::string image;  // ground-truth path (resolved)
    std::string mask;   // hole-mask path (resolved)
    std::string id;     // names the method output file <dir>/<id>.png
};

// JSON list of {image, mask, id}; relative paths are resolved against the
// manifest's directory.
std::vector<CorpusEntry> load_manifest(const std::string& path);

struct EvalRecord {
    std::string id;
    std::string method;
    std::string mode;  // "full" | "patch"
    double psnr_db = 0;  // capped at kPsnrCap
    double ssim_val = 0;
    double eval_seconds = 0;
};

struct EvalAggregate {
    std::string method;
    std::string mode;
    double mean_psnr = 0;
    double mean_ssim = 0;
    size_t count = 0;
};

struct EvalReport {
    EvalProtocol protocol;
    std::string config_hash;
    std::vector<EvalRecord> records;        // sorted by (id, method)
    std::vector<EvalAggregate> aggregates;  // sorted by method
};

// Evaluates every method output against the corpus ground truth on identical
// crop windows (full: the auto-crop square around the hole; patch: seeded
// 256px crops centered on hole pixels). Missing outputs are listed
// exhaustively before aborting.
EvalReport run_eval(const std::vector<CorpusEntry>& corpus,
                    const std::vector<std::string>& method_dirs, const EvalProtocol& protocol,
                    const std::string& config_hash = "", int threads = 1);

void write_eval_csv(const std::string& path, const EvalReport& report);
void write_eval_json(const std::string& path, const EvalReport& report);

}  // namespace pf
