#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "patchfill/config.hpp"

using namespace pf;
using namespace testutil;

namespace {

std::string write_config(TempDir& dir, const std::string& name, const std::string& text) {
    const std::string path = dir.file(name);
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("defaults validate and assemble") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.patch_params().patch_size == 7);
    CHECK(cfg.patch_params().gain_max == 1.1);
    CHECK(cfg.synthesis_params().em_coarsest == 12);
    CHECK(cfg.synthesis_params().vote_mode == VoteMode::Uniform);
    CHECK(cfg.weight_params().wc_with_structure == 0.3);
    CHECK(cfg.rtv_params().iterations == 4);
    CHECK(cfg.selection_params().crop.base == 512);
    CHECK(cfg.heuristic_params().blur_weight == 0.5);
    CHECK(cfg.stroke_params().max_waypoints == 12);
}

TEST_CASE("resolved_text covers every key exactly once, sorted") {
    PipelineConfig cfg;
    std::istringstream in(cfg.resolved_text());
    std::string line, prev;
    int lines = 0;
    bool saw_threads = false, saw_seed = false;
    while (std::getline(in, line)) {
        REQUIRE(line.find('=') != std::string::npos);
        const std::string key = line.substr(0, line.find('='));
        CHECK(prev < key);  // strictly increasing => sorted and unique
        prev = key;
        ++lines;
        if (key == "threads") saw_threads = true;
        if (key == "seed") saw_seed = true;
    }
    CHECK(lines == 38);
    CHECK(saw_threads);
    CHECK(saw_seed);
}

TEST_CASE("config hash") {
    PipelineConfig base;
    SUBCASE("stable across calls and fresh instances") {
        PipelineConfig other;
        CHECK(base.config_hash() == other.config_hash());
        CHECK(base.config_hash().size() == 16);
    }
    SUBCASE("sensitive to every algorithmic key") {
        for (const auto& [key, value] : base.algorithmic_items()) {
            PipelineConfig tweaked = base;
            std::string changed;
            if (value == "true")
                changed = "false";
            else if (value == "false")
                changed = "true";
            else if (key == "vote_mode")
                changed = "distance";
            else if (key == "scorer")
                changed = "cmd:/bin/true";
            else if (key == "mode")
                changed = "naive";
            else if (value.find('.') == std::string::npos) {
                // integer: nudge by one (all integer keys accept +1 from default)
                changed = std::to_string(std::stoll(value) + 1);
            } else {
                double v = std::stod(value);
                changed = std::to_string(v == 0 ? 0.01 : v * 1.000244140625);
            }
            set_config_key(tweaked, key, changed);
            INFO("key: ", key, " -> ", changed);
            CHECK(tweaked.config_hash() != base.config_hash());
        }
    }
    SUBCASE("execution-only keys do not move the hash") {
        PipelineConfig t = base;
        set_config_key(t, "threads", "8");
        set_config_key(t, "memory_budget_mb", "999");
        CHECK(t.config_hash() == base.config_hash());
        // band_rows changes tiled outputs, so it is algorithmic
        set_config_key(t, "band_rows", "32");
        CHECK(t.config_hash() != base.config_hash());
    }
    SUBCASE("algorithmic_items excludes the execution keys") {
        for (const auto& [key, value] : base.algorithmic_items()) {
            CHECK(key != "threads");
            CHECK(key != "memory_budget_mb");
        }
    }
}

TEST_CASE("set_config_key") {
    PipelineConfig cfg;
    set_config_key(cfg, "patch_size", "9");
    CHECK(cfg.patch_size == 9);
    set_config_key(cfg, "pm_alpha", "0.25");
    CHECK(cfg.pm_alpha == 0.25);
    set_config_key(cfg, "scorer", "cmd:python3 judge.py");
    CHECK(cfg.scorer == "cmd:python3 judge.py");
    set_config_key(cfg, "seed", "12345");
    CHECK(cfg.seed == 12345);

    SUBCASE("boolean forms") {
        for (const char* t : {"true", "1"}) {
            set_config_key(cfg, "gainbias", "false");
            set_config_key(cfg, "gainbias", t);
            CHECK(cfg.gainbias);
        }
        for (const char* f : {"false", "0"}) {
            set_config_key(cfg, "gainbias", "true");
            set_config_key(cfg, "gainbias", f);
            CHECK_FALSE(cfg.gainbias);
        }
        CHECK_THROWS_AS(set_config_key(cfg, "gainbias", "maybe"), InputError);
        CHECK_THROWS_AS(set_config_key(cfg, "gainbias", "on"), InputError);
    }
    SUBCASE("unknown keys and malformed values are rejected") {
        CHECK_THROWS_AS(set_config_key(cfg, "no_such_key", "1"), InputError);
        CHECK_THROWS_AS(set_config_key(cfg, "patch_size", "seven"), InputError);
        CHECK_THROWS_AS(set_config_key(cfg, "pm_alpha", "0.5x"), InputError);
        CHECK_THROWS_AS(set_config_key(cfg, "seed", "-3"), InputError);
    }
    SUBCASE("validation catches bad combinations") {
        PipelineConfig bad;
        set_config_key(bad, "patch_size", "8");  // even
        CHECK_THROWS_AS(bad.validate(), InputError);
        PipelineConfig bad2;
        set_config_key(bad2, "vote_mode", "median");
        CHECK_THROWS_AS(bad2.validate(), InputError);
        PipelineConfig bad3;
        set_config_key(bad3, "mode", "fast");
        CHECK_THROWS_AS(bad3.validate(), InputError);
        PipelineConfig bad4;
        set_config_key(bad4, "scorer", "external");
        CHECK_THROWS_AS(bad4.validate(), InputError);
    }
}

TEST_CASE("config files") {
    TempDir dir;
    SUBCASE("parses keys, comments, and blank lines") {
        std::string path = write_config(dir, "good.cfg",
                                        "# comment\n"
                                        "patch_size = 9\n"
                                        "\n"
                                        "  pm_iterations=3   \n"
                                        "scorer = cmd:run me \n"
                                        "gainbias = false\n");
        PipelineConfig cfg = load_config_file(path, PipelineConfig{});
        CHECK(cfg.patch_size == 9);
        CHECK(cfg.pm_iterations == 3);
        CHECK(cfg.scorer == "cmd:run me");
        CHECK_FALSE(cfg.gainbias);
        // untouched keys keep their defaults
        CHECK(cfg.em_coarsest == 12);
    }
    SUBCASE("errors carry the file location") {
        std::string path = write_config(dir, "bad.cfg",
                                        "patch_size = 7\n"
                                        "wat\n");
        bool threw = false;
        try {
            load_config_file(path, PipelineConfig{});
        } catch (const InputError& e) {
            threw = true;
            CHECK(std::string(e.what()).find(path + ":2") != std::string::npos);
        }
        CHECK(threw);
    }
    SUBCASE("unknown keys are rejected with the location") {
        std::string path = write_config(dir, "unknown.cfg", "patch_sized = 7\n");
        bool threw = false;
        try {
            load_config_file(path, PipelineConfig{});
        } catch (const InputError& e) {
            threw = true;
            const std::string msg = e.what();
            CHECK(msg.find("patch_sized") != std::string::npos);
            CHECK(msg.find(path + ":1") != std::string::npos);
        }
        CHECK(threw);
    }
    SUBCASE("malformed values are rejected with the location") {
        std::string path = write_config(dir, "badval.cfg", "pm_alpha = fast\n");
        bool threw = false;
        try {
            load_config_file(path, PipelineConfig{});
        } catch (const InputError& e) {
            threw = true;
            const std::string msg = e.what();
            CHECK(msg.find(path + ":1") != std::string::npos);
            CHECK(msg.find("pm_alpha") != std::string::npos);
        }
        CHECK(threw);
    }
    SUBCASE("missing file is rejected") {
        CHECK_THROWS_AS(load_config_file(dir.file("absent.cfg"), PipelineConfig{}),
                        InputError);
    }
}

TEST_CASE("environment overrides") {
    PipelineConfig cfg;
    setenv("PATCHFILL_PATCH_SIZE", "11", 1);
    setenv("PATCHFILL_SCORER", "cmd:/usr/bin/env true", 1);
    apply_env_overrides(cfg);
    unsetenv("PATCHFILL_PATCH_SIZE");
    unsetenv("PATCHFILL_SCORER");
    CHECK(cfg.patch_size == 11);
    CHECK(cfg.scorer == "cmd:/usr/bin/env true");

    SUBCASE("malformed environment values are rejected") {
        setenv("PATCHFILL_PATCH_SIZE", "huge", 1);
        PipelineConfig fresh;
        CHECK_THROWS_AS(apply_env_overrides(fresh), InputError);
        unsetenv("PATCHFILL_PATCH_SIZE");
    }
    SUBCASE("environment beats the file") {
        TempDir dir;
        std::string path = write_config(dir, "file.cfg", "patch_size = 9\n");
        PipelineConfig layered = load_config_file(path, PipelineConfig{});
        CHECK(layered.patch_size == 9);
        setenv("PATCHFILL_PATCH_SIZE", "13", 1);
        apply_env_overrides(layered);
        unsetenv("PATCHFILL_PATCH_SIZE");
        CHECK(layered.patch_size == 13);
    }
}
