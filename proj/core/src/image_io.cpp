#include "lunaforge/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>

#include "lunaforge/error.hpp"

namespace lunaforge {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        fail(ErrorKind::io, "cannot open '" + path.string() + "' (" +
                                (mode[0] == 'r' ? "read" : "write") + ")");
    }
    return f;
}

// Rows are passed top-to-bottom; each row is bit_depth/8 * width bytes.
void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               const std::vector<std::uint8_t>& bytes) {
    FilePtr file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorKind::io, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorKind::io, "libpng error while writing '" + path.string() + "'");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth / 8);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(bytes.data() + stride * y));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) fail(ErrorKind::io, "write error on '" + path.string() + "'");
}

std::vector<std::uint8_t> read_png(const std::filesystem::path& path, int expected_depth,
                                   int& width, int& height) {
    FilePtr file = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        fail(ErrorKind::malformed_header, "'" + path.string() + "' is not a PNG file");
    }
    std::vector<std::uint8_t> bytes;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::io, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::io, "libpng error while reading '" + path.string() + "'");
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    if (color != PNG_COLOR_TYPE_GRAY || depth != expected_depth) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::dimension_mismatch, "'" + path.string() + "' is not a " +
                                                std::to_string(expected_depth) +
                                                "-bit single-channel PNG");
    }
    const std::size_t stride = static_cast<std::size_t>(width) * (depth / 8);
    bytes.resize(stride * static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) png_read_row(png, bytes.data() + stride * y, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return bytes;
}

}  // namespace

void write_png_gray8(const std::filesystem::path& path, const GrayImage<std::uint8_t>& image) {
    write_png(path, image.width, image.height, 8, image.pixels);
}

void write_png_gray16(const std::filesystem::path& path, const GrayImage<std::uint16_t>& image) {
    // PNG stores 16-bit samples big-endian.
    std::vector<std::uint8_t> bytes(image.pixels.size() * 2);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        bytes[2 * i] = static_cast<std::uint8_t>(image.pixels[i] >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(image.pixels[i] & 0xFF);
    }
    write_png(path, image.width, image.height, 16, bytes);
}

GrayImage<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
    GrayImage<std::uint8_t> image;
    image.pixels = read_png(path, 8, image.width, image.height);
    return image;
}

GrayImage<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
    GrayImage<std::uint16_t> image;
    const auto bytes = read_png(path, 16, image.width, image.height);
    image.pixels.resize(bytes.size() / 2);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        image.pixels[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    }
    return image;
}

}  // namespace lunaforge
