#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsr {

// All library failures surface as hsr::Error with a one-line message.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Hyperspectral radiance cube.
// In-memory layout is pixel-interleaved: data[(row * width + col) * bands + b],
// so the spectrum of one pixel is contiguous. The on-disk container is
// band-sequential tile-major (see cube_io.hpp).
struct HsiCube {
    int height = 0;
    int width = 0;
    int bands = 0;
    float wavelength_start_nm = 450.0f;
    float wavelength_step_nm = 4.0f;
    int tile_size = 64;
    std::vector<float> data;

    HsiCube() = default;
    HsiCube(int h, int w, int d)
        : height(h), width(w), bands(d),
          data(static_cast<size_t>(h) * w * d, 0.0f) {}

    size_t pixel_count() const { return static_cast<size_t>(height) * width; }
    size_t value_count() const { return pixel_count() * bands; }

    float& at(int row, int col, int band) {
        return data[(static_cast<size_t>(row) * width + col) * bands + band];
    }
    float at(int row, int col, int band) const {
        return data[(static_cast<size_t>(row) * width + col) * bands + band];
    }
    // Contiguous spectrum of one pixel (bands floats).
    const float* spectrum(int row, int col) const {
        return &data[(static_cast<size_t>(row) * width + col) * bands];
    }
    float* spectrum(int row, int col) {
        return &data[(static_cast<size_t>(row) * width + col) * bands];
    }

    // Throws hsr::Error if any invariant is violated.
    void validate() const;
};

// Three-channel image, values in [0,1], layout data[(row*width+col)*3 + c].
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<float> data;

    RgbImage() = default;
    RgbImage(int h, int w)
        : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0f) {}

    float& at(int row, int col, int c) {
        return data[(static_cast<size_t>(row) * width + col) * 3 + c];
    }
    float at(int row, int col, int c) const {
        return data[(static_cast<size_t>(row) * width + col) * 3 + c];
    }

    void validate() const;
};

// Per-pixel class indices. 0 is background/unlabeled, classes are 1..num_classes.
struct LabelMap {
    int height = 0;
    int width = 0;
    int num_classes = 0;
    std::vector<uint8_t> data;

    LabelMap() = default;
    LabelMap(int h, int w, int k)
        : height(h), width(w), num_classes(k),
          data(static_cast<size_t>(h) * w, 0) {}

    uint8_t& at(int row, int col) {
        return data[static_cast<size_t>(row) * width + col];
    }
    uint8_t at(int row, int col) const {
        return data[static_cast<size_t>(row) * width + col];
    }

    size_t count_nonbackground() const;
    void validate() const;
};

// Square spectral window around a center pixel.
// Layout: data[(py * size + px) * bands + b].
struct Patch {
    int size = 0;
    int bands = 0;
    int center_row = 0;
    int center_col = 0;
    std::vector<float> data;

    float at(int py, int px, int band) const {
        return data[(static_cast<size_t>(py) * size + px) * bands + band];
    }
};

// Raw per-pixel class scores, layout data[(row*width+col)*classes + j].
// Class j here is 0-based and corresponds to label j+1 (background has no logit).
struct LogitMap {
    int height = 0;
    int width = 0;
    int classes = 0;
    std::vector<float> data;

    LogitMap() = default;
    LogitMap(int h, int w, int k)
        : height(h), width(w), classes(k),
          data(static_cast<size_t>(h) * w * k, 0.0f) {}

    const float* logits(int row, int col) const {
        return &data[(static_cast<size_t>(row) * width + col) * classes];
    }
    float* logits(int row, int col) {
        return &data[(static_cast<size_t>(row) * width + col) * classes];
    }

    void validate() const;
};

// Binary per-pixel mask: 1 = trust the coarse label, 0 = take the prior.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int h, int w)
        : height(h), width(w), data(static_cast<size_t>(h) * w, 0) {}

    uint8_t& at(int row, int col) {
        return data[static_cast<size_t>(row) * width + col];
    }
    uint8_t at(int row, int col) const {
        return data[static_cast<size_t>(row) * width + col];
    }
};

// Display palette: index -> name and RGB color. Index 0 is background.
struct PaletteEntry {
    int index = 0;
    std::string name;
    std::array<uint8_t, 3> color{0, 0, 0};
};

struct Palette {
    int num_classes = 0;
    std::vector<PaletteEntry> entries; // entries[i] has index i, i in 0..num_classes

    const std::array<uint8_t, 3>& color_of(int index) const;
    const std::string& name_of(int index) const;
};

// Evenly spaced distinguishable colors for k classes plus black background.
Palette make_default_palette(int num_classes);

} // namespace hsr
