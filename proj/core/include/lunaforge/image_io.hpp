#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace lunaforge {

/// Single-channel image, row-major with row 0 at the top of the file.
template <typename T>
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<T> pixels;

    T at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

void write_png_gray8(const std::filesystem::path& path, const GrayImage<std::uint8_t>& image);
void write_png_gray16(const std::filesystem::path& path, const GrayImage<std::uint16_t>& image);
GrayImage<std::uint8_t> read_png_gray8(const std::filesystem::path& path);
GrayImage<std::uint16_t> read_png_gray16(const std::filesystem::path& path);

}  // namespace lunaforge
