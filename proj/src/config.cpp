#include "patchfill/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace pf {

namespace {

struct Field {
    const char* key;
    bool algorithmic;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
};

long long parse_int(const std::string& key, const std::string& v) {
    size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    PF_CHECK(used == v.size() && !v.empty(), "config key '" + key + "': bad integer '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    PF_CHECK(used == v.size() && !v.empty(), "config key '" + key + "': bad number '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InputError("config key '" + key + "': bad boolean '" + v + "'");
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    size_t used = 0;
    uint64_t out = 0;
    try {
        // stoull would silently wrap negative inputs
        if (!v.empty() && v[0] != '-') out = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    PF_CHECK(used == v.size() && !v.empty(),
             "config key '" + key + "': bad unsigned integer '" + v + "'");
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

#define INT_FIELD(name, algo)                                                       \
    Field{#name, algo, [](const PipelineConfig& c) { return std::to_string(c.name); }, \
          [](PipelineConfig& c, const std::string& v) {                             \
              c.name = static_cast<int>(parse_int(#name, v));                       \
          }}
#define DBL_FIELD(name, algo)                                                   \
    Field{#name, algo, [](const PipelineConfig& c) { return fmt_double(c.name); }, \
          [](PipelineConfig& c, const std::string& v) { c.name = parse_double(#name, v); }}
#define BOOL_FIELD(name, algo)                                                           \
    Field{#name, algo,                                                                   \
          [](const PipelineConfig& c) { return std::string(c.name ? "true" : "false"); }, \
          [](PipelineConfig& c, const std::string& v) { c.name = parse_bool(#name, v); }}
#define STR_FIELD(name, algo)                                         \
    Field{#name, algo, [](const PipelineConfig& c) { return c.name; }, \
          [](PipelineConfig& c, const std::string& v) { c.name = v; }}
#define U64_FIELD(name, algo)                                                       \
    Field{#name, algo, [](const PipelineConfig& c) { return std::to_string(c.name); }, \
          [](PipelineConfig& c, const std::string& v) { c.name = parse_u64(#name, v); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        INT_FIELD(patch_size, true),
        INT_FIELD(pm_iterations, true),
        DBL_FIELD(pm_alpha, true),
        BOOL_FIELD(gainbias, true),
        DBL_FIELD(gain_min, true),
        DBL_FIELD(gain_max, true),
        DBL_FIELD(bias_min, true),
        DBL_FIELD(bias_max, true),
        INT_FIELD(em_coarsest, true),
        INT_FIELD(em_finest, true),
        INT_FIELD(level_entry_iterations, true),
        INT_FIELD(refine_iterations, true),
        STR_FIELD(vote_mode, true),
        INT_FIELD(min_level_edge, true),
        INT_FIELD(band_rows, true),
        DBL_FIELD(wc_with_structure, true),
        DBL_FIELD(wc_without_structure, true),
        DBL_FIELD(mismatch_cost, true),
        DBL_FIELD(rtv_lambda, true),
        DBL_FIELD(rtv_sigma, true),
        INT_FIELD(rtv_iterations, true),
        DBL_FIELD(crop_gamma, true),
        DBL_FIELD(crop_tau, true),
        INT_FIELD(crop_base, true),
        STR_FIELD(scorer, true),
        DBL_FIELD(scorer_seam, true),
        DBL_FIELD(scorer_incoherence, true),
        DBL_FIELD(scorer_blur, true),
        DBL_FIELD(scorer_temperature, true),
        DBL_FIELD(hole_area_fraction, true),
        INT_FIELD(stroke_min_waypoints, true),
        INT_FIELD(stroke_max_waypoints, true),
        DBL_FIELD(stroke_min_radius, true),
        DBL_FIELD(stroke_max_radius, true),
        STR_FIELD(mode, true),
        U64_FIELD(seed, true),
        INT_FIELD(threads, false),
        INT_FIELD(memory_budget_mb, false),
    };
    return table;
}

#undef INT_FIELD
#undef DBL_FIELD
#undef BOOL_FIELD
#undef STR_FIELD
#undef U64_FIELD

}  // namespace

void PipelineConfig::validate() const {
    patch_params().validate();
    synthesis_params().validate();
    selection_params().validate();
    PF_CHECK(vote_mode == "uniform" || vote_mode == "distance",
             "vote_mode must be uniform or distance");
    PF_CHECK(mode == "naive" || mode == "optimized", "mode must be naive or optimized");
    PF_CHECK(scorer == "heuristic" || scorer.rfind("cmd:", 0) == 0,
             "scorer must be 'heuristic' or 'cmd:<command>'");
    PF_CHECK(rtv_lambda > 0 && rtv_sigma > 0 && rtv_iterations >= 1, "bad rtv parameters");
    PF_CHECK(scorer_temperature > 0, "scorer temperature must be positive");
    PF_CHECK(hole_area_fraction > 0 && hole_area_fraction < 1,
             "hole_area_fraction must be in (0,1)");
    PF_CHECK(threads >= 0, "threads must be >= 0");
    PF_CHECK(memory_budget_mb >= 1, "memory budget must be positive");
    PF_CHECK(wc_with_structure > 0 && wc_with_structure < 1 && wc_without_structure > 0 &&
                 wc_without_structure < 1,
             "w_c values must be in (0,1)");
    stroke_params().validate();
}

PatchParams PipelineConfig::patch_params() const {
    PatchParams p;
    p.patch_size = patch_size;
    p.pm_iterations = pm_iterations;
    p.alpha = pm_alpha;
    p.rng_seed = seed;
    p.gain_min = gain_min;
    p.gain_max = gain_max;
    p.bias_min = bias_min;
    p.bias_max = bias_max;
    return p;
}

SynthesisParams PipelineConfig::synthesis_params() const {
    SynthesisParams s;
    s.patch = patch_params();
    s.em_coarsest = em_coarsest;
    s.em_finest = em_finest;
    s.level_entry_iterations = level_entry_iterations;
    s.refine_iterations = refine_iterations;
    s.vote_mode = vote_mode == "distance" ? VoteMode::DistanceWeighted : VoteMode::Uniform;
    s.gainbias = gainbias;
    s.min_level_edge = min_level_edge;
    s.band_rows = band_rows;
    return s;
}

WeightParams PipelineConfig::weight_params() const {
    WeightParams w;
    w.wc_with_structure = wc_with_structure;
    w.wc_without_structure = wc_without_structure;
    w.mismatch_cost = mismatch_cost;
    return w;
}

RtvParams PipelineConfig::rtv_params() const {
    RtvParams r;
    r.lambda = rtv_lambda;
    r.sigma = rtv_sigma;
    r.iterations = rtv_iterations;
    return r;
}

SelectionParams PipelineConfig::selection_params() const {
    SelectionParams s;
    s.crop.gamma = crop_gamma;
    s.crop.tau = crop_tau;
    s.crop.base = crop_base;
    return s;
}

HeuristicScorer::Params PipelineConfig::heuristic_params() const {
    HeuristicScorer::Params p;
    p.seam_weight = scorer_seam;
    p.incoherence_weight = scorer_incoherence;
    p.blur_weight = scorer_blur;
    p.temperature = scorer_temperature;
    return p;
}

StrokeParams PipelineConfig::stroke_params() const {
    StrokeParams p;
    p.min_waypoints = stroke_min_waypoints;
    p.max_waypoints = stroke_max_waypoints;
    p.min_radius = stroke_min_radius;
    p.max_radius = stroke_max_radius;
    return p;
}

std::string PipelineConfig::resolved_text() const {
    std::vector<std::string> lines;
    lines.reserve(fields().size());
    for (const Field& f : fields()) lines.push_back(std::string(f.key) + "=" + f.get(*this));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::algorithmic_items() const {
    std::vector<std::pair<std::string, std::string>> items;
    for (const Field& f : fields())
        if (f.algorithmic) items.emplace_back(f.key, f.get(*this));
    std::sort(items.begin(), items.end());
    return items;
}

std::string PipelineConfig::config_hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [key, value] : algorithmic_items()) {
        h = fnv1a_str(key + "=" + value, h);
        h = fnv1a("\n", 1, h);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void set_config_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    for (const Field& f : fields())
        if (key == f.key) {
            f.set(cfg, value);
            return;
        }
    throw InputError("unknown config key: " + key);
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    PF_CHECK(in.good(), "cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        PF_CHECK(eq != std::string::npos,
                 path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        PF_CHECK(!key.empty(), path + ":" + std::to_string(lineno) + ": empty key");
        try {
            set_config_key(base, key, value);
        } catch (const InputError& e) {
            throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

void apply_env_overrides(PipelineConfig& cfg) {
    for (const Field& f : fields()) {
        std::string name = "PATCHFILL_";
        for (const char* p = f.key; *p; ++p)
            name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
        if (const char* v = std::getenv(name.c_str())) f.set(cfg, v);
    }
}

}  // namespace pf
