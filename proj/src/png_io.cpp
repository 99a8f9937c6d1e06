#include "hsr/png_io.hpp"

#include "hsr/io_util.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>

namespace hsr {

namespace {

void append_bytes(png_structp png, png_bytep bytes, png_size_t count) {
    auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), bytes, bytes + count);
}

void flush_noop(png_structp) {}

std::vector<uint8_t> encode_png(int height, int width, int color_type,
                                const uint8_t* pixels, size_t row_bytes) {
    if (height < 1 || width < 1) throw Error("png image must be non-empty");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }

    std::vector<uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("png encode failed");
    }

    png_set_write_fn(png, &out, append_bytes, flush_noop);
    // Pinned settings keep the byte stream a pure function of the pixels.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < height; ++r)
        png_write_row(png, const_cast<png_bytep>(pixels + static_cast<size_t>(r) * row_bytes));
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;

    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

void decode_png(const std::string& path, int want_color_type, int channels,
                int& height, int& width, std::vector<uint8_t>& data) {
    PngReader rd;
    rd.fp = std::fopen(path.c_str(), "rb");
    if (!rd.fp) throw Error("cannot open png file: " + path);

    uint8_t sig[8];
    if (std::fread(sig, 1, 8, rd.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw Error("not a png file: " + path);

    rd.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!rd.png) throw Error("png_create_read_struct failed");
    rd.info = png_create_info_struct(rd.png);
    if (!rd.info) throw Error("png_create_info_struct failed");

    if (setjmp(png_jmpbuf(rd.png)))
        throw Error("png decode failed: " + path);

    png_init_io(rd.png, rd.fp);
    png_set_sig_bytes(rd.png, 8);
    png_read_info(rd.png, rd.info);

    const int bit_depth = png_get_bit_depth(rd.png, rd.info);
    const int color_type = png_get_color_type(rd.png, rd.info);
    if (bit_depth != 8 || color_type != want_color_type)
        throw Error("unexpected png format in " + path +
                    " (need 8-bit " +
                    (want_color_type == PNG_COLOR_TYPE_GRAY ? std::string("grayscale")
                                                            : std::string("rgb")) +
                    ")");

    height = static_cast<int>(png_get_image_height(rd.png, rd.info));
    width = static_cast<int>(png_get_image_width(rd.png, rd.info));
    if (height < 1 || width < 1) throw Error("png image is empty: " + path);

    data.assign(static_cast<size_t>(height) * width * channels, 0);
    const size_t row_bytes = static_cast<size_t>(width) * channels;
    if (png_get_rowbytes(rd.png, rd.info) != row_bytes)
        throw Error("png row size mismatch in " + path);
    for (int r = 0; r < height; ++r)
        png_read_row(rd.png, data.data() + static_cast<size_t>(r) * row_bytes, nullptr);
    png_read_end(rd.png, nullptr);
}

} // namespace

std::vector<uint8_t> encode_gray8_png(const Gray8& img) {
    return encode_png(img.height, img.width, PNG_COLOR_TYPE_GRAY, img.data.data(),
                      static_cast<size_t>(img.width));
}

std::vector<uint8_t> encode_rgb8_png(const Rgb8& img) {
    return encode_png(img.height, img.width, PNG_COLOR_TYPE_RGB, img.data.data(),
                      static_cast<size_t>(img.width) * 3);
}

void write_gray8_png(const Gray8& img, const std::string& path) {
    const auto bytes = encode_gray8_png(img);
    atomic_write_file(path, bytes.data(), bytes.size());
}

void write_rgb8_png(const Rgb8& img, const std::string& path) {
    const auto bytes = encode_rgb8_png(img);
    atomic_write_file(path, bytes.data(), bytes.size());
}

Gray8 read_gray8_png(const std::string& path) {
    Gray8 img;
    decode_png(path, PNG_COLOR_TYPE_GRAY, 1, img.height, img.width, img.data);
    return img;
}

Rgb8 read_rgb8_png(const std::string& path) {
    Rgb8 img;
    decode_png(path, PNG_COLOR_TYPE_RGB, 3, img.height, img.width, img.data);
    return img;
}

} // namespace hsr
