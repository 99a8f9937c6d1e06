#include "hsr/types.hpp"

#include <cmath>
#include <cstdio>

namespace hsr {

namespace {

std::string dim_string(int h, int w, int d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%dx%dx%d", h, w, d);
    return buf;
}

// Hue in [0,360), s,v in [0,1] -> 8-bit RGB.
std::array<uint8_t, 3> hsv_to_rgb8(double h, double s, double v) {
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)      { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else             { r = c; b = x; }
    const double m = v - c;
    auto q = [&](double t) { return static_cast<uint8_t>((t + m) * 255.0 + 0.5); };
    return {q(r), q(g), q(b)};
}

} // namespace

void HsiCube::validate() const {
    if (height < 1 || width < 1 || bands < 1)
        throw Error("cube dimensions must be positive, got " +
                    dim_string(height, width, bands));
    if (data.size() != value_count())
        throw Error("cube data length " + std::to_string(data.size()) +
                    " does not match dimensions " + dim_string(height, width, bands));
    if (!(wavelength_step_nm > 0.0f))
        throw Error("cube wavelength step must be positive");
    if (tile_size < 1) throw Error("cube tile size must be positive");
    for (size_t i = 0; i < data.size(); ++i) {
        const float v = data[i];
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            throw Error("cube value out of [0,1] or non-finite at flat index " +
                        std::to_string(i));
    }
}

void RgbImage::validate() const {
    if (height < 1 || width < 1) throw Error("image dimensions must be positive");
    if (data.size() != static_cast<size_t>(height) * width * 3)
        throw Error("image data length does not match dimensions");
    for (float v : data)
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            throw Error("image value out of [0,1] or non-finite");
}

size_t LabelMap::count_nonbackground() const {
    size_t n = 0;
    for (uint8_t v : data)
        if (v != 0) ++n;
    return n;
}

void LabelMap::validate() const {
    if (height < 1 || width < 1) throw Error("label dimensions must be positive");
    if (num_classes < 0 || num_classes > 255)
        throw Error("label class count out of range");
    if (data.size() != static_cast<size_t>(height) * width)
        throw Error("label data length does not match dimensions");
    for (uint8_t v : data)
        if (v > num_classes)
            throw Error("label value " + std::to_string(v) +
                        " exceeds declared class count " + std::to_string(num_classes));
}

void LogitMap::validate() const {
    if (height < 1 || width < 1 || classes < 1)
        throw Error("logit map dimensions must be positive");
    if (data.size() != static_cast<size_t>(height) * width * classes)
        throw Error("logit map data length does not match dimensions");
    for (float v : data)
        if (!std::isfinite(v)) throw Error("logit map contains a non-finite value");
}

const std::array<uint8_t, 3>& Palette::color_of(int index) const {
    if (index < 0 || index >= static_cast<int>(entries.size()))
        throw Error("palette has no entry for class " + std::to_string(index));
    return entries[index].color;
}

const std::string& Palette::name_of(int index) const {
    if (index < 0 || index >= static_cast<int>(entries.size()))
        throw Error("palette has no entry for class " + std::to_string(index));
    return entries[index].name;
}

Palette make_default_palette(int num_classes) {
    if (num_classes < 0 || num_classes > 255)
        throw Error("palette supports at most 255 classes");
    Palette p;
    p.num_classes = num_classes;
    p.entries.reserve(static_cast<size_t>(num_classes) + 1);
    p.entries.push_back({0, "background", {0, 0, 0}});
    for (int i = 1; i <= num_classes; ++i) {
        // Golden-angle hue walk keeps neighbouring indices visually distinct.
        const double hue = std::fmod(137.50776405003785 * (i - 1), 360.0);
        const double value = (i % 2 == 0) ? 0.95 : 0.75;
        p.entries.push_back({i, "class" + std::to_string(i), hsv_to_rgb8(hue, 0.85, value)});
    }
    return p;
}

} // namespace hsr
