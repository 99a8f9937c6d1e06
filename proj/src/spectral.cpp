#include "hsr/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace hsr {

void SpectralResponse::validate() const {
    if (bands < 1) throw Error("response must cover at least one band");
    if (weights.size() != static_cast<size_t>(3) * bands)
        throw Error("response must be a 3x" + std::to_string(bands) + " matrix");
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int b = 0; b < bands; ++b) {
            const double w = at(c, b);
            if (!std::isfinite(w) || w < 0.0)
                throw Error("response weights must be finite and nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error("response row " + std::to_string(c) + " sums to " +
                        std::to_string(sum) + ", expected 1");
    }
}

SpectralResponse default_rgb_response(int bands, float wavelength_start_nm,
                                      float wavelength_step_nm) {
    if (bands < 1) throw Error("response must cover at least one band");
    const double centers[3] = {640.0, 550.0, 460.0};
    const double sigma = 40.0;

    SpectralResponse resp;
    resp.bands = bands;
    resp.weights.resize(static_cast<size_t>(3) * bands);
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int b = 0; b < bands; ++b) {
            const double wl = wavelength_start_nm + static_cast<double>(b) * wavelength_step_nm;
            const double z = (wl - centers[c]) / sigma;
            const double w = std::exp(-0.5 * z * z);
            resp.weights[static_cast<size_t>(c) * bands + b] = w;
            sum += w;
        }
        for (int b = 0; b < bands; ++b)
            resp.weights[static_cast<size_t>(c) * bands + b] /= sum;
    }
    // Renormalize once more so row sums hit 1 within validate()'s 1e-9.
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int b = 0; b < bands; ++b) sum += resp.at(c, b);
        for (int b = 0; b < bands; ++b)
            resp.weights[static_cast<size_t>(c) * bands + b] /= sum;
    }
    resp.validate();
    return resp;
}

RgbImage project_to_rgb(const HsiCube& cube, const SpectralResponse& response) {
    response.validate();
    if (response.bands != cube.bands)
        throw Error("response covers " + std::to_string(response.bands) +
                    " bands but cube has " + std::to_string(cube.bands));

    RgbImage out(cube.height, cube.width);
    for (int r = 0; r < cube.height; ++r)
        for (int c = 0; c < cube.width; ++c) {
            const float* s = cube.spectrum(r, c);
            for (int ch = 0; ch < 3; ++ch) {
                double acc = 0.0;
                for (int b = 0; b < cube.bands; ++b)
                    acc += response.at(ch, b) * static_cast<double>(s[b]);
                out.data[(static_cast<size_t>(r) * cube.width + c) * 3 + ch] =
                    static_cast<float>(std::clamp(acc, 0.0, 1.0));
            }
        }
    return out;
}

HsiCube rgb_to_cube(const RgbImage& image) {
    HsiCube cube(image.height, image.width, 3);
    cube.wavelength_start_nm = 640.0f; // nominal channel centers, R G B order
    cube.wavelength_step_nm = 1.0f;
    for (size_t i = 0; i < image.data.size(); ++i)
        cube.data[i] = image.data[i];
    cube.validate();
    return cube;
}

} // namespace hsr
