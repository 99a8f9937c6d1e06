#pragma once

#include "hsr/types.hpp"

#include <fstream>
#include <string>

namespace hsr {

// On-disk cube container ("HSC1").
//
// Header, 32 bytes, little-endian:
//   bytes 0..3   magic "HSC1"
//   bytes 4..7   u32 version (1)
//   bytes 8..11  u32 height
//   bytes 12..15 u32 width
//   bytes 16..19 u32 bands
//   bytes 20..23 f32 wavelength_start_nm
//   bytes 24..27 f32 wavelength_step_nm
//   bytes 28..31 u32 tile_size
//
// Payload: band-sequential, tile-major 32-bit floats. For each band, tiles are
// visited in row-major tile order; each tile stores its (clipped) rows
// row-major. Total payload is exactly height*width*bands floats.
inline constexpr size_t kCubeHeaderSize = 32;
inline constexpr uint32_t kCubeVersion = 1;

void save_cube(const HsiCube& cube, const std::string& path);
HsiCube load_cube(const std::string& path);

// Seekable reader that pulls only the tiles intersecting a requested region.
class CubeFile {
public:
    explicit CubeFile(const std::string& path);

    int height() const { return height_; }
    int width() const { return width_; }
    int bands() const { return bands_; }
    int tile_size() const { return tile_size_; }
    float wavelength_start_nm() const { return wavelength_start_; }
    float wavelength_step_nm() const { return wavelength_step_; }

    // Reads a spatial window (all bands) without loading the rest of the file.
    HsiCube read_region(int row0, int col0, int rows, int cols);

    HsiCube read_all();

private:
    size_t tile_offset(int band, int tile_row, int tile_col) const;
    void read_floats(size_t value_offset, float* dst, size_t count);

    std::ifstream file_;
    std::string path_;
    int height_ = 0, width_ = 0, bands_ = 0, tile_size_ = 0;
    float wavelength_start_ = 0.0f, wavelength_step_ = 0.0f;
    std::vector<size_t> row_prefix_;  // values before tile stripe r (one band)
    std::vector<size_t> col_prefix_;  // columns before tile column c
};

} // namespace hsr
