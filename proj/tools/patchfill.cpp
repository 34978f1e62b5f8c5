// patchfill command line front end.
//
// Subcommands:
//   pipeline  full inpainting run (candidates + selection + final image)
//   rtv       structure-map extraction for a single image
//   holegen   benchmark hole mask generation
//   curate    rank an arbitrary set of candidate images
//   bench     scored evaluation of method output directories
//
// Exit codes: 0 success, 2 bad input/usage, 3 external scorer failure,
// 4 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "patchfill/bench.hpp"
#include "patchfill/common.hpp"
#include "patchfill/config.hpp"
#include "patchfill/curation.hpp"
#include "patchfill/guides.hpp"
#include "patchfill/holes.hpp"
#include "patchfill/image.hpp"
#include "patchfill/image_io.hpp"
#include "patchfill/parallel.hpp"
#include "patchfill/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pf;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void progress(const std::string& line) {
    std::fprintf(stderr, "[patchfill] %s\n", line.c_str());
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
    return std::string(buf);
}

uint64_t mask_hash(const HoleMask& m) {
    uint64_t h = fnv1a(&m.width, sizeof m.width);
    h = fnv1a(&m.height, sizeof m.height, h);
    return fnv1a(m.data.data(), m.data.size(), h);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    PF_CHECK(f.good(), "cannot write " + path);
    f << text;
    f.close();
    PF_CHECK(f.good(), "failed writing " + path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Config assembly order: defaults -> file -> environment -> explicit flags.
PipelineConfig build_config(const std::string& config_path,
                            const std::vector<std::pair<std::string, std::string>>& flag_overrides) {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    apply_env_overrides(cfg);
    for (const auto& kv : flag_overrides) set_config_key(cfg, kv.first, kv.second);
    cfg.validate();
    return cfg;
}

std::unique_ptr<Scorer> make_scorer(const PipelineConfig& cfg) {
    if (cfg.scorer == "heuristic")
        return std::make_unique<HeuristicScorer>(cfg.heuristic_params());
    PF_ASSERT(cfg.scorer.rfind("cmd:", 0) == 0, "scorer id passed validation but is unknown");
    return std::make_unique<CommandScorer>(cfg.scorer.substr(4));
}

int resolve_threads(const PipelineConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : hardware_threads();
}

PlaneImage load_depth_map(const std::string& path) {
    if (ends_with(path, ".pfm")) {
        PlaneImage p = read_pfm(path);
        PF_CHECK(p.channels == 1, "depth map must be single channel: " + path);
        return p;
    }
    return png_to_scaled_gray(read_png(path));
}

json crop_to_json(const CropRect& crop) {
    return json{{"x", crop.x}, {"y", crop.y}, {"width", crop.width}, {"height", crop.height}};
}

json matrix_to_json(const PreferenceMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.n; ++i) {
        json row = json::array();
        for (int j = 0; j < m.n; ++j) row.push_back(m.at(i, j));
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineArgs {
    std::string image, mask, coarse, depth, segmentation;
    std::string structure = "auto";
    std::string config_path;
    std::string out_dir = ".";
    std::string mode, scorer;
    uint64_t seed = 0;
    int threads = 0;
    bool save_candidates = false;
    bool dry_run = false;
    CLI::Option* mode_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
    CLI::Option* scorer_opt = nullptr;
};

int run_pipeline_cmd(const PipelineArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (a.mode_opt->count() > 0) overrides.emplace_back("mode", a.mode);
    if (a.seed_opt->count() > 0) overrides.emplace_back("seed", std::to_string(a.seed));
    if (a.threads_opt->count() > 0) overrides.emplace_back("threads", std::to_string(a.threads));
    if (a.scorer_opt->count() > 0) overrides.emplace_back("scorer", a.scorer);
    PipelineConfig cfg = build_config(a.config_path, overrides);

    progress("loading inputs");
    PipelineInputs in;
    in.image = read_png_rgb(a.image);
    in.mask = read_png_mask(a.mask);
    in.coarse.image = read_png_rgb(a.coarse);
    in.coarse.provenance = a.coarse;
    PlaneImage depth_plane = load_depth_map(a.depth);
    PlaneImage seg_plane = png_to_labels(read_png(a.segmentation));

    PF_CHECK(in.mask.width == in.image.width && in.mask.height == in.image.height,
             "mask dimensions do not match the image");
    PF_CHECK(depth_plane.width == in.image.width && depth_plane.height == in.image.height,
             "depth map dimensions do not match the image");
    PF_CHECK(seg_plane.width == in.image.width && seg_plane.height == in.image.height,
             "segmentation dimensions do not match the image");
    PF_CHECK(in.mask.hole_count() > 0, "mask marks no hole pixels");
    validate_coarse_fill(in.coarse, in.image.width, in.image.height);

    PlaneImage structure_source;
    if (a.structure != "auto") {
        structure_source = read_png_rgb(a.structure);
        PF_CHECK(structure_source.width == in.image.width &&
                     structure_source.height == in.image.height,
                 "structure map dimensions do not match the image");
    }

    if (a.dry_run) {
        std::fputs(cfg.resolved_text().c_str(), stdout);
        progress("dry run: inputs validated, nothing computed");
        return 0;
    }

    progress("preparing guides");
    Clock::time_point guide_t0 = Clock::now();
    in.guides.channels[0] = a.structure == "auto"
                                ? structure_from_image(in.image, cfg.rtv_params())
                                : structure_from_channel(structure_source);
    in.guides.channels[1] = ingest_depth(depth_plane);
    in.guides.channels[2] = ingest_segmentation(seg_plane);
    double guide_seconds = secs_since(guide_t0);

    std::unique_ptr<Scorer> scorer = make_scorer(cfg);
    progress("running " + cfg.mode + " pipeline (seed " + std::to_string(cfg.seed) + ")");
    PipelineResult res = run_pipeline(in, cfg, *scorer);

    fs::create_directories(a.out_dir);
    fs::path out_dir(a.out_dir);
    write_png((out_dir / "winner.png").string(), res.final_image);

    std::vector<std::string> candidate_files;
    if (a.save_candidates) {
        for (int i = 0; i < 8; ++i) {
            GuideCombo combo = GuideCombo::from_index(i);
            std::string name = "candidate_" + std::to_string(i) + "_" + combo.letters() + ".png";
            write_png((out_dir / name).string(), res.candidates.images[static_cast<size_t>(i)]);
            candidate_files.push_back(name);
        }
    }

    // The manifest holds everything deterministic for a given
    // (inputs, algorithmic config, seed) triple; wall-clock data goes to the
    // timings sidecar so manifests can be compared byte for byte.
    json manifest;
    manifest["combo"] = json{{"index", res.combo.index()}, {"letters", res.combo.letters()}};
    json cfg_json = json::object();
    for (const auto& kv : cfg.algorithmic_items()) cfg_json[kv.first] = kv.second;
    manifest["config"] = cfg_json;
    manifest["config_hash"] = cfg.config_hash();
    manifest["candidate_long_edge"] = res.candidate_long_edge;
    manifest["inputs"] = json{
        {"image", json{{"path", a.image}, {"hash", hex64(in.image.content_hash())}}},
        {"mask", json{{"path", a.mask}, {"hash", hex64(mask_hash(in.mask))}}},
        {"coarse", json{{"path", a.coarse}, {"hash", hex64(in.coarse.image.content_hash())}}},
        {"depth", json{{"path", a.depth}, {"hash", hex64(depth_plane.content_hash())}}},
        {"segmentation",
         json{{"path", a.segmentation}, {"hash", hex64(seg_plane.content_hash())}}},
        {"structure", json{{"path", a.structure},
                           {"hash", hex64(in.guides.channels[0].data.content_hash())}}}};
    manifest["curation"] = json{{"crop", crop_to_json(res.curation.crop)},
                                {"scorer", res.curation.scorer_identity},
                                {"matrix", matrix_to_json(res.curation.matrix)},
                                {"preference", res.curation.preference},
                                {"winner", res.curation.winner}};
    manifest["outputs"] = json{{"winner", "winner.png"}, {"candidates", candidate_files}};
    write_text((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");

    json timings;
    json stages = json::array();
    stages.push_back(json{{"stage", "guides"}, {"seconds", guide_seconds}});
    double total = guide_seconds;
    for (const StageTiming& st : res.timings) {
        stages.push_back(json{{"stage", st.stage}, {"seconds", st.seconds}});
        total += st.seconds;
    }
    timings["stages"] = stages;
    timings["total_seconds"] = total;
    write_text((out_dir / "timings.json").string(), timings.dump(2) + "\n");

    progress("winner: combo " + std::to_string(res.combo.index()) + " (" + res.combo.letters() +
             "), wrote " + (out_dir / "winner.png").string());
    return 0;
}

// ---------------------------------------------------------------------------
// rtv

struct RtvArgs {
    std::string input;
    std::string out = "structure.png";
    std::string config_path;
    double lambda = 0.0, sigma = 0.0;
    int iterations = 0;
    CLI::Option* lambda_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* iter_opt = nullptr;
};

int run_rtv_cmd(const RtvArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (a.lambda_opt->count() > 0) overrides.emplace_back("rtv_lambda", std::to_string(a.lambda));
    if (a.sigma_opt->count() > 0) overrides.emplace_back("rtv_sigma", std::to_string(a.sigma));
    if (a.iter_opt->count() > 0)
        overrides.emplace_back("rtv_iterations", std::to_string(a.iterations));
    PipelineConfig cfg = build_config(a.config_path, overrides);
    RtvParams p = cfg.rtv_params();

    PlaneImage img = read_png_rgb(a.input);
    progress("smoothing " + std::to_string(img.width) + "x" + std::to_string(img.height));
    PlaneImage sm = rtv_smooth(img, p.lambda, p.sigma, p.iterations);
    write_png(a.out, sm);
    progress("wrote " + a.out);
    return 0;
}

// ---------------------------------------------------------------------------
// holegen

struct HolegenArgs {
    std::string kind = "freeform";
    int count = 1;
    uint64_t seed = 0;
    std::string mask_lib;
    int width = 0, height = 0;
    std::string like;
    std::string out_dir = ".";
    std::string config_path;
    double area_fraction = 0.0;
    CLI::Option* frac_opt = nullptr;
};

int run_holegen_cmd(const HolegenArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (a.frac_opt->count() > 0)
        overrides.emplace_back("hole_area_fraction", std::to_string(a.area_fraction));
    PipelineConfig cfg = build_config(a.config_path, overrides);

    int w = a.width, h = a.height;
    if (!a.like.empty()) {
        PngData png = read_png(a.like);
        w = png.width;
        h = png.height;
    }
    PF_CHECK(w > 0 && h > 0, "mask size unknown: pass --width/--height or --like");
    PF_CHECK(a.count > 0, "--count must be positive");
    const bool needs_lib = a.kind == "object" || a.kind == "mixed";
    PF_CHECK(!needs_lib || !a.mask_lib.empty(), "--mask-lib is required for kind '" + a.kind + "'");

    fs::create_directories(a.out_dir);
    for (int k = 0; k < a.count; ++k) {
        uint64_t mask_seed = mix_seed(a.seed, static_cast<uint64_t>(k));
        HoleSpec spec = scaled_hole_spec(w, h, cfg.hole_area_fraction, mask_seed);
        spec.stroke = cfg.stroke_params();
        HoleMask mask;
        std::string kind_label = a.kind;
        if (a.kind == "freeform") {
            mask = freeform_mask(w, h, spec);
        } else if (a.kind == "object") {
            mask = object_mask(w, h, spec, a.mask_lib);
        } else {
            SampledHole sampled = sample_benchmark_hole(w, h, spec, a.mask_lib, mask_seed);
            mask = std::move(sampled.mask);
            kind_label = sampled.kind == HoleKind::FreeForm ? "freeform" : "object";
        }
        char name[32];
        std::snprintf(name, sizeof name, "hole_%03d.png", k);
        write_png_mask((fs::path(a.out_dir) / name).string(), mask);
        progress(std::string(name) + ": " + kind_label + ", " +
                 std::to_string(mask.hole_count()) + " px of " +
                 std::to_string(static_cast<long long>(w) * h));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// curate

struct CurateArgs {
    std::vector<std::string> candidates;
    std::string mask;
    std::string out = "curation_report.json";
    std::string config_path;
    std::string scorer;
    int threads = 0;
    CLI::Option* scorer_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

int run_curate_cmd(const CurateArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (a.scorer_opt->count() > 0) overrides.emplace_back("scorer", a.scorer);
    if (a.threads_opt->count() > 0) overrides.emplace_back("threads", std::to_string(a.threads));
    PipelineConfig cfg = build_config(a.config_path, overrides);

    const int n = static_cast<int>(a.candidates.size());
    PF_CHECK(n >= 2 && n <= 16, "curate needs between 2 and 16 candidates, got " +
                                    std::to_string(n));

    std::vector<PlaneImage> images;
    images.reserve(a.candidates.size());
    for (const std::string& path : a.candidates) images.push_back(read_png_rgb(path));
    HoleMask mask = read_png_mask(a.mask);
    for (const PlaneImage& img : images)
        PF_CHECK(img.width == mask.width && img.height == mask.height,
                 "candidate dimensions do not match the mask");
    PF_CHECK(mask.hole_count() > 0, "mask marks no hole pixels");

    SelectionParams sp = cfg.selection_params();
    sp.threads = resolve_threads(cfg);
    CropRect crop = auto_crop(mask, sp.crop);
    std::vector<PlaneImage> crops;
    crops.reserve(images.size());
    for (const PlaneImage& img : images)
        crops.push_back(resize_bilinear(extract_crop(img, crop), sp.scorer_size, sp.scorer_size));
    HoleMask crop_mask =
        resize_mask_nearest(extract_mask_crop(mask, crop), sp.scorer_size, sp.scorer_size);

    std::unique_ptr<Scorer> scorer = make_scorer(cfg);
    progress("scoring " + std::to_string(n) + " candidates (" + scorer->identity() + ")");
    PreferenceMatrix matrix = build_matrix(crops, crop_mask, *scorer, sp.threads);
    std::vector<double> pref = preference_vector(matrix);
    int winner = 0;
    for (int i = 1; i < n; ++i)
        if (pref[static_cast<size_t>(i)] > pref[static_cast<size_t>(winner)]) winner = i;

    json report;
    report["candidates"] = a.candidates;
    report["crop"] = crop_to_json(crop);
    report["scorer"] = scorer->identity();
    report["matrix"] = matrix_to_json(matrix);
    report["preference"] = pref;
    report["winner"] = winner;
    write_text(a.out, report.dump(2) + "\n");

    std::printf("winner=%d %s\n", winner, a.candidates[static_cast<size_t>(winner)].c_str());
    progress("wrote " + a.out);
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string manifest;
    std::vector<std::string> methods;
    std::string mode = "full";
    uint64_t seed = 0;
    int patch_count = 10;
    int patch_size = 256;
    std::string out_csv = "bench.csv";
    std::string out_json = "bench.json";
    std::string config_path;
    int threads = 0;
    CLI::Option* threads_opt = nullptr;
};

int run_bench_cmd(const BenchArgs& a) {
    std::vector<std::pair<std::string, std::string>> overrides;
    if (a.threads_opt->count() > 0) overrides.emplace_back("threads", std::to_string(a.threads));
    PipelineConfig cfg = build_config(a.config_path, overrides);

    std::vector<CorpusEntry> corpus = load_manifest(a.manifest);
    EvalProtocol protocol;
    protocol.mode = a.mode == "patch" ? EvalMode::Patch : EvalMode::Full;
    protocol.seed = a.seed;
    protocol.patch_count = a.patch_count;
    protocol.patch_size = a.patch_size;
    protocol.validate();

    progress("evaluating " + std::to_string(corpus.size()) + " images x " +
             std::to_string(a.methods.size()) + " methods (" + a.mode + " mode)");
    EvalReport report =
        run_eval(corpus, a.methods, protocol, cfg.config_hash(), resolve_threads(cfg));
    write_eval_csv(a.out_csv, report);
    write_eval_json(a.out_json, report);

    for (const EvalAggregate& agg : report.aggregates)
        progress(agg.method + ": mean psnr " + std::to_string(agg.mean_psnr) + " dB, mean ssim " +
                 std::to_string(agg.mean_ssim) + " over " + std::to_string(agg.count) + " crops");
    progress("wrote " + a.out_csv + " and " + a.out_json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"patchfill: guided patch-based image inpainting at native resolution"};
    app.require_subcommand(1);

    PipelineArgs pa;
    CLI::App* pipeline = app.add_subcommand("pipeline", "run the full inpainting pipeline");
    pipeline->add_option("--image", pa.image, "native-resolution RGB image (PNG)")->required();
    pipeline->add_option("--mask", pa.mask, "hole mask PNG (nonzero = hole)")->required();
    pipeline
        ->add_option("--coarse", pa.coarse,
                     "externally produced coarse fill (PNG, 512 px long edge)")
        ->required();
    pipeline->add_option("--depth", pa.depth, "depth map (.pfm float or grayscale PNG)")
        ->required();
    pipeline->add_option("--segmentation", pa.segmentation, "label map PNG")->required();
    pipeline->add_option("--structure", pa.structure,
                         "structure map PNG, or 'auto' to derive from the image");
    pipeline->add_option("--config", pa.config_path, "key=value config file");
    pipeline->add_option("--out-dir", pa.out_dir, "output directory");
    pa.mode_opt = pipeline->add_option("--mode", pa.mode, "naive or optimized")
                      ->check(CLI::IsMember({"naive", "optimized"}));
    pa.seed_opt = pipeline->add_option("--seed", pa.seed, "random seed");
    pa.threads_opt = pipeline->add_option("--threads", pa.threads, "worker threads (0 = auto)");
    pa.scorer_opt = pipeline->add_option("--scorer", pa.scorer, "heuristic or cmd:<command>");
    pipeline->add_flag("--save-candidates", pa.save_candidates, "also write all eight candidates");
    pipeline->add_flag("--dry-run", pa.dry_run, "validate inputs, print resolved config, exit");

    RtvArgs ra;
    CLI::App* rtv = app.add_subcommand("rtv", "extract a structure map from an image");
    rtv->add_option("input", ra.input, "input PNG")->required();
    rtv->add_option("--out", ra.out, "output PNG");
    rtv->add_option("--config", ra.config_path, "key=value config file");
    ra.lambda_opt = rtv->add_option("--lambda", ra.lambda, "smoothing strength");
    ra.sigma_opt = rtv->add_option("--sigma", ra.sigma, "texture scale");
    ra.iter_opt = rtv->add_option("--iterations", ra.iterations, "solver iterations");

    HolegenArgs ha;
    CLI::App* holegen = app.add_subcommand("holegen", "generate benchmark hole masks");
    holegen->add_option("--kind", ha.kind, "freeform, object, or mixed")
        ->check(CLI::IsMember({"freeform", "object", "mixed"}));
    holegen->add_option("--count", ha.count, "number of masks");
    holegen->add_option("--seed", ha.seed, "base seed");
    holegen->add_option("--mask-lib", ha.mask_lib, "directory of object-mask PNGs");
    holegen->add_option("--width", ha.width, "mask width");
    holegen->add_option("--height", ha.height, "mask height");
    holegen->add_option("--like", ha.like, "take dimensions from this PNG");
    holegen->add_option("--out-dir", ha.out_dir, "output directory");
    holegen->add_option("--config", ha.config_path, "key=value config file");
    ha.frac_opt = holegen->add_option("--area-fraction", ha.area_fraction,
                                      "target hole area as a fraction of the image");

    CurateArgs ca;
    CLI::App* curate = app.add_subcommand("curate", "rank candidate images by pairwise preference");
    curate->add_option("candidates", ca.candidates, "candidate PNGs (2-16)")
        ->required()
        ->expected(2, 16);
    curate->add_option("--mask", ca.mask, "hole mask PNG")->required();
    curate->add_option("--out", ca.out, "report JSON path");
    curate->add_option("--config", ca.config_path, "key=value config file");
    ca.scorer_opt = curate->add_option("--scorer", ca.scorer, "heuristic or cmd:<command>");
    ca.threads_opt = curate->add_option("--threads", ca.threads, "worker threads (0 = auto)");

    BenchArgs ba;
    CLI::App* bench = app.add_subcommand("bench", "evaluate method outputs against ground truth");
    bench->add_option("--manifest", ba.manifest, "corpus manifest JSON")->required();
    bench->add_option("--methods", ba.methods, "method output directories")
        ->required()
        ->expected(1, -1);
    bench->add_option("--mode", ba.mode, "full or patch")->check(CLI::IsMember({"full", "patch"}));
    bench->add_option("--seed", ba.seed, "patch sampling seed");
    bench->add_option("--patch-count", ba.patch_count, "crops per image in patch mode");
    bench->add_option("--patch-size", ba.patch_size, "crop size in patch mode");
    bench->add_option("--out-csv", ba.out_csv, "per-record CSV path");
    bench->add_option("--out-json", ba.out_json, "summary JSON path");
    bench->add_option("--config", ba.config_path, "key=value config file");
    ba.threads_opt = bench->add_option("--threads", ba.threads, "worker threads (0 = auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*pipeline) return run_pipeline_cmd(pa);
        if (*rtv) return run_rtv_cmd(ra);
        if (*holegen) return run_holegen_cmd(ha);
        if (*curate) return run_curate_cmd(ca);
        if (*bench) return run_bench_cmd(ba);
        std::fprintf(stderr, "patchfill: no subcommand\n");
        return 2;
    } catch (const InputError& e) {
        std::fprintf(stderr, "patchfill: input error: %s\n", e.what());
        return 2;
    } catch (const ScorerError& e) {
        std::fprintf(stderr, "patchfill: scorer error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "patchfill: internal error: %s\n", e.what());
        return 4;
    }
}
