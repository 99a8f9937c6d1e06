#pragma once

#include "hsr/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hsr {

struct Gray8 {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data; // row-major

    Gray8() = default;
    Gray8(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0) {}
};

struct Rgb8 {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data; // row-major, 3 bytes per pixel

    Rgb8() = default;
    Rgb8(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0) {}

    uint8_t* pixel(int r, int c) {
        return data.data() + (static_cast<size_t>(r) * width + c) * 3;
    }
    const uint8_t* pixel(int r, int c) const {
        return data.data() + (static_cast<size_t>(r) * width + c) * 3;
    }
};

// Encoders write the PNG stream into memory first, then publish it with a
// rename; compression settings are pinned so identical pixels give identical
// bytes.
void write_gray8_png(const Gray8& img, const std::string& path);
void write_rgb8_png(const Rgb8& img, const std::string& path);

std::vector<uint8_t> encode_gray8_png(const Gray8& img);
std::vector<uint8_t> encode_rgb8_png(const Rgb8& img);

// Readers reject every color type except 8-bit grayscale / 8-bit RGB
// respectively; labels must not survive a silent palette or alpha conversion.
Gray8 read_gray8_png(const std::string& path);
Rgb8 read_rgb8_png(const std::string& path);

} // namespace hsr
