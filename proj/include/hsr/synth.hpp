#pragma once

#include "hsr/spectral.hpp"
#include "hsr/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace hsr {

struct SceneConfig {
    int height = 128;
    int width = 128;
    int num_classes = 6;
    int spectra_per_class = 1;
    double noise_sigma = 0.02;
    int region_scale = 32;
    std::vector<std::pair<int, int>> metamer_pairs;
    double metamer_magnitude = 0.5;
    int bands = 129;
    float wavelength_start_nm = 450.0f;
    float wavelength_step_nm = 4.0f;
    uint64_t seed = 0;

    void validate() const;
};

struct DegradeConfig {
    int shrink_radius = 3;
    int boundary_jitter = 1;
    double drop_fraction = 0.1;
    int small_region_area = 64; // components under this area are drop candidates
    uint64_t seed = 0;

    void validate() const;
};

struct SceneData {
    HsiCube cube;
    LabelMap fine;
    // archetypes[c-1][v] is the noise-free spectrum of class c, variant v.
    std::vector<std::vector<std::vector<float>>> archetypes;
};

// Seeded Voronoi partition of the frame into class regions; each pixel gets
// its region's archetype variant plus clipped Gaussian noise. Classes listed
// in metamer_pairs share RGB projections under default_rgb_response variant
// by variant while their spectra stay apart; extra variants of other classes
// are RGB-visible blends so intra-class color variation exists.
SceneData generate_scene_detailed(const SceneConfig& config);
std::pair<HsiCube, LabelMap> generate_scene(const SceneConfig& config);

// s1 = base, s2 = base + t*v with v a unit null-space vector of the response
// and t = min(magnitude, largest step keeping s2 in [0,1]). Double precision
// end to end: response*s1 == response*s2 within 1e-9 before any f32
// quantization.
std::pair<std::vector<double>, std::vector<double>>
make_metamer_pair(const SpectralResponse& response, const std::vector<double>& base,
                  double magnitude);

// Coarse-label simulator: boundary jitter (displacement field), interior
// shrink (per-class erosion), then seeded dropping of small regions.
LabelMap degrade_labels(const LabelMap& fine, const DegradeConfig& config);

} // namespace hsr
