#pragma once

#include <string>

#include "patchfill/image.hpp"

namespace pf {

enum class HoleKind { FreeForm, ObjectShape };

// Free-form stroke generator knobs, expressed at a 512-px bounding box and
// scaled proportionally for other box sizes.
struct StrokeParams {
    int min_waypoints = 4;
    int max_waypoints = 12;
    double min_radius = 8.0;
    double max_radius = 48.0;
    double min_step_frac = 0.0625;  // waypoint step as a fraction of the box side
    double max_step_frac = 0.25;

    void validate() const {
        PF_CHECK(min_waypoints >= 2 && max_waypoints >= min_waypoints,
                 "invalid stroke waypoint range");
        PF_CHECK(min_radius >= 1.0 && max_radius >= min_radius, "invalid stroke radius range");
        PF_CHECK(min_step_frac > 0 && max_step_frac >= min_step_frac,
                 "invalid stroke step range");
    }
};

struct HoleSpec {
    HoleKind kind = HoleKind::FreeForm;
    int bbox_side = 512;      // bounding box side at the target resolution
    double target_area = 0;   // desired hole pixels (free-form only)
    uint64_t seed = 0;
    StrokeParams stroke;
};

// Union of random-walk brush strokes inside a uniformly placed bounding box.
// The result stays within +-40% of target_area.
HoleMask freeform_mask(int width, int height, const HoleSpec& spec);

// A uniformly chosen mask file from `library_dir` (sorted order), scaled so its
// long side fills the bounding box, placed uniformly inside it.
HoleMask object_mask(int width, int height, const HoleSpec& spec,
                     const std::string& library_dir);

struct SampledHole {
    HoleMask mask;
    HoleKind kind = HoleKind::FreeForm;
};

// Benchmark sampler: picks free-form or object-shaped with equal probability,
// then generates the mask with a seed derived from `seed`.
SampledHole sample_benchmark_hole(int width, int height, const HoleSpec& base,
                                  const std::string& library_dir, uint64_t seed);

// Defaults for a given resolution: the 512-px box scales with the long edge
// (anchored at a 1024-px generation resolution) and the area target is a
// fraction of the image.
HoleSpec scaled_hole_spec(int width, int height, double area_fraction = 0.115,
                          uint64_t seed = 0);

}  // namespace pf
