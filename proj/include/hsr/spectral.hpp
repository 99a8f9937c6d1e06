#pragma once

#include "hsr/types.hpp"

#include <vector>

namespace hsr {

// 3 x D weighting of bands into R, G, B. Rows are convex weights: nonnegative
// and summing to 1 within 1e-9, so projections of [0,1] cubes stay in [0,1].
struct SpectralResponse {
    int bands = 0;
    std::vector<double> weights; // row-major, weights[c * bands + b]

    double at(int channel, int band) const {
        return weights[static_cast<size_t>(channel) * bands + band];
    }
    void validate() const;
};

// Gaussian band sensitivities centered at 640 (R), 550 (G), 460 (B) nm with
// sigma 40 nm, row-normalized over the cube's sampled wavelengths.
SpectralResponse default_rgb_response(int bands, float wavelength_start_nm,
                                      float wavelength_step_nm);

RgbImage project_to_rgb(const HsiCube& cube, const SpectralResponse& response);

// Repackages an RGB image as a 3-band cube so the classification path can run
// unchanged on projected data.
HsiCube rgb_to_cube(const RgbImage& image);

} // namespace hsr
