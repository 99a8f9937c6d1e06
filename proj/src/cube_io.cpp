#include "hsr/cube_io.hpp"

#include "hsr/io_util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>

namespace hsr {

namespace {

const char kMagic[4] = {'H', 'S', 'C', '1'};

int tile_count(int extent, int tile) { return (extent + tile - 1) / tile; }

std::string tile_coord_string(int band, int tile_row, int tile_col) {
    return "band " + std::to_string(band) + ", tile (" + std::to_string(tile_row) +
           ", " + std::to_string(tile_col) + ")";
}

} // namespace

void save_cube(const HsiCube& cube, const std::string& path) {
    cube.validate();
    const int tile = cube.tile_size;
    std::vector<uint8_t> out;
    out.reserve(kCubeHeaderSize + cube.value_count() * 4);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kCubeVersion);
    put_u32(out, static_cast<uint32_t>(cube.height));
    put_u32(out, static_cast<uint32_t>(cube.width));
    put_u32(out, static_cast<uint32_t>(cube.bands));
    put_f32(out, cube.wavelength_start_nm);
    put_f32(out, cube.wavelength_step_nm);
    put_u32(out, static_cast<uint32_t>(tile));

    for (int b = 0; b < cube.bands; ++b)
        for (int tr = 0; tr < tile_count(cube.height, tile); ++tr)
            for (int tc = 0; tc < tile_count(cube.width, tile); ++tc) {
                const int r1 = std::min(cube.height, (tr + 1) * tile);
                const int c1 = std::min(cube.width, (tc + 1) * tile);
                for (int r = tr * tile; r < r1; ++r)
                    for (int c = tc * tile; c < c1; ++c)
                        put_f32(out, cube.at(r, c, b));
            }

    atomic_write_file(path, out.data(), out.size());
}

CubeFile::CubeFile(const std::string& path) : path_(path) {
    file_.open(path, std::ios::binary);
    if (!file_) throw Error("cannot open cube file: " + path);

    uint8_t header[kCubeHeaderSize];
    file_.read(reinterpret_cast<char*>(header), kCubeHeaderSize);
    if (!file_) throw Error("cube file too short for header: " + path);
    if (std::memcmp(header, kMagic, 4) != 0)
        throw Error("bad cube magic in " + path);
    const uint32_t version = get_u32(header + 4);
    if (version != kCubeVersion)
        throw Error("unsupported cube version " + std::to_string(version) + " in " + path);
    height_ = static_cast<int>(get_u32(header + 8));
    width_ = static_cast<int>(get_u32(header + 12));
    bands_ = static_cast<int>(get_u32(header + 16));
    wavelength_start_ = get_f32(header + 20);
    wavelength_step_ = get_f32(header + 24);
    tile_size_ = static_cast<int>(get_u32(header + 28));
    if (height_ < 1 || width_ < 1 || bands_ < 1 || tile_size_ < 1)
        throw Error("cube header declares invalid dimensions in " + path);
    if (!(wavelength_step_ > 0.0f))
        throw Error("cube header declares non-positive wavelength step in " + path);

    const auto file_size = std::filesystem::file_size(path);
    const size_t expected = kCubeHeaderSize +
        4 * static_cast<size_t>(height_) * width_ * bands_;
    if (file_size != expected)
        throw Error("cube payload size mismatch in " + path + ": expected " +
                    std::to_string(expected) + " bytes, file has " +
                    std::to_string(file_size));

    // Prefix sums over clipped tile extents, for seekable tile offsets.
    const int trs = tile_count(height_, tile_size_);
    const int tcs = tile_count(width_, tile_size_);
    row_prefix_.assign(static_cast<size_t>(trs) + 1, 0);
    for (int tr = 0; tr < trs; ++tr) {
        const int h = std::min(height_, (tr + 1) * tile_size_) - tr * tile_size_;
        row_prefix_[tr + 1] = row_prefix_[tr] + static_cast<size_t>(h) * width_;
    }
    col_prefix_.assign(static_cast<size_t>(tcs) + 1, 0);
    for (int tc = 0; tc < tcs; ++tc) {
        const int w = std::min(width_, (tc + 1) * tile_size_) - tc * tile_size_;
        col_prefix_[tc + 1] = col_prefix_[tc] + static_cast<size_t>(w);
    }
}

size_t CubeFile::tile_offset(int band, int tile_row, int tile_col) const {
    const int h = std::min(height_, (tile_row + 1) * tile_size_) - tile_row * tile_size_;
    return static_cast<size_t>(band) * height_ * width_ +
           row_prefix_[tile_row] +
           static_cast<size_t>(h) * col_prefix_[tile_col];
}

void CubeFile::read_floats(size_t value_offset, float* dst, size_t count) {
    file_.seekg(static_cast<std::streamoff>(kCubeHeaderSize + 4 * value_offset));
    file_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(4 * count));
    if (!file_) throw Error("cube read failed in " + path_);
    if constexpr (std::endian::native == std::endian::big) {
        for (size_t i = 0; i < count; ++i) {
            uint32_t bits;
            std::memcpy(&bits, dst + i, 4);
            bits = __builtin_bswap32(bits);
            std::memcpy(dst + i, &bits, 4);
        }
    }
}

HsiCube CubeFile::read_region(int row0, int col0, int rows, int cols) {
    if (row0 < 0 || col0 < 0 || rows < 1 || cols < 1 ||
        row0 + rows > height_ || col0 + cols > width_)
        throw Error("cube region out of bounds");

    HsiCube out(rows, cols, bands_);
    out.wavelength_start_nm = wavelength_start_;
    out.wavelength_step_nm = wavelength_step_;
    out.tile_size = tile_size_;

    std::vector<float> rowbuf(static_cast<size_t>(tile_size_));
    for (int b = 0; b < bands_; ++b)
        for (int tr = row0 / tile_size_; tr * tile_size_ < row0 + rows; ++tr) {
            const int tr0 = tr * tile_size_;
            const int tr1 = std::min(height_, tr0 + tile_size_);
            for (int tc = col0 / tile_size_; tc * tile_size_ < col0 + cols; ++tc) {
                const int tc0 = tc * tile_size_;
                const int tc1 = std::min(width_, tc0 + tile_size_);
                const int tw = tc1 - tc0;
                const size_t base = tile_offset(b, tr, tc);
                const int r_lo = std::max(row0, tr0);
                const int r_hi = std::min(row0 + rows, tr1);
                const int c_lo = std::max(col0, tc0);
                const int c_hi = std::min(col0 + cols, tc1);
                for (int r = r_lo; r < r_hi; ++r) {
                    const size_t off = base +
                        static_cast<size_t>(r - tr0) * tw + (c_lo - tc0);
                    read_floats(off, rowbuf.data(), static_cast<size_t>(c_hi - c_lo));
                    for (int c = c_lo; c < c_hi; ++c) {
                        const float v = rowbuf[c - c_lo];
                        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
                            throw Error("non-finite or out-of-range cube value at " +
                                        tile_coord_string(b, tr, tc) + " in " + path_);
                        out.at(r - row0, c - col0, b) = v;
                    }
                }
            }
        }
    return out;
}

HsiCube CubeFile::read_all() {
    HsiCube out(height_, width_, bands_);
    out.wavelength_start_nm = wavelength_start_;
    out.wavelength_step_nm = wavelength_step_;
    out.tile_size = tile_size_;

    std::vector<float> tilebuf(static_cast<size_t>(tile_size_) * tile_size_);
    size_t offset = 0;
    for (int b = 0; b < bands_; ++b)
        for (int tr = 0; tr * tile_size_ < height_; ++tr) {
            const int tr0 = tr * tile_size_;
            const int th = std::min(height_, tr0 + tile_size_) - tr0;
            for (int tc = 0; tc * tile_size_ < width_; ++tc) {
                const int tc0 = tc * tile_size_;
                const int tw = std::min(width_, tc0 + tile_size_) - tc0;
                const size_t n = static_cast<size_t>(th) * tw;
                read_floats(offset, tilebuf.data(), n);
                offset += n;
                for (int r = 0; r < th; ++r)
                    for (int c = 0; c < tw; ++c) {
                        const float v = tilebuf[static_cast<size_t>(r) * tw + c];
                        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
                            throw Error("non-finite or out-of-range cube value at " +
                                        tile_coord_string(b, tr, tc) + " in " + path_);
                        out.at(tr0 + r, tc0 + c, b) = v;
                    }
            }
        }
    return out;
}

HsiCube load_cube(const std::string& path) {
    CubeFile file(path);
    return file.read_all();
}

} // namespace hsr
