#pragma once

#include <string>
#include <utility>
#include <vector>

#include "patchfill/curation.hpp"
#include "patchfill/guides.hpp"
#include "patchfill/holes.hpp"
#include "patchfill/synthesis.hpp"

namespace pf {

// Every tunable in one flat key=value namespace. Execution-only keys (threads,
// memory budget) never influence outputs and are excluded from the config
// hash; everything else is algorithmic state pinned by the hash.
struct PipelineConfig {
    // patch matching
    int patch_size = 7;
    int pm_iterations = 5;
    double pm_alpha = 0.5;
    bool gainbias = true;
    double gain_min = 0.9;
    double gain_max = 1.1;
    double bias_min = -0.05;
    double bias_max = 0.05;

    // synthesis schedule
    int em_coarsest = 12;
    int em_finest = 4;
    int level_entry_iterations = 2;
    int refine_iterations = 1;
    std::string vote_mode = "uniform";  // uniform | distance
    int min_level_edge = 64;
    int band_rows = 64;  // banded-mode partition height (affects tiled output)

    // guide weighting
    double wc_with_structure = 0.3;
    double wc_without_structure = 0.6;
    double mismatch_cost = 1.0;

    // structure guide smoothing
    double rtv_lambda = 0.01;
    double rtv_sigma = 3.0;
    int rtv_iterations = 4;

    // curation
    double crop_gamma = 1.05;
    double crop_tau = 0.25;
    int crop_base = 512;
    std::string scorer = "heuristic";  // heuristic | cmd:<command>
    double scorer_seam = 1.0;
    double scorer_incoherence = 1.0;
    double scorer_blur = 0.5;
    double scorer_temperature = 0.1;

    // hole generation
    double hole_area_fraction = 0.115;
    int stroke_min_waypoints = 4;
    int stroke_max_waypoints = 12;
    double stroke_min_radius = 8.0;
    double stroke_max_radius = 48.0;

    // pipeline
    std::string mode = "optimized";  // naive | optimized
    uint64_t seed = 0;

    // execution-only
    int threads = 0;  // 0 = all logical cores
    int memory_budget_mb = 2500;

    void validate() const;

    // assembled parameter structs
    PatchParams patch_params() const;
    SynthesisParams synthesis_params() const;
    WeightParams weight_params() const;
    RtvParams rtv_params() const;
    SelectionParams selection_params() const;
    HeuristicScorer::Params heuristic_params() const;
    StrokeParams stroke_params() const;

    // sorted key=value lines covering every key (the logged resolved form)
    std::string resolved_text() const;
    // algorithmic keys with their string values, sorted by key
    std::vector<std::pair<std::string, std::string>> algorithmic_items() const;
    // 16-hex digest over the algorithmic keys only
    std::string config_hash() const;
};

// Parses a key=value file ('#' comments, blank lines ignored) on top of
// `base`. Unknown keys and malformed values are rejected.
PipelineConfig load_config_file(const std::string& path, PipelineConfig base);

// Applies PATCHFILL_<UPPER_KEY> environment overrides.
void apply_env_overrides(PipelineConfig& cfg);

// Sets one key from its string form; throws InputError for unknown keys.
void set_config_key(PipelineConfig& cfg, const std::string& key, const std::string& value);

}  // namespace pf
