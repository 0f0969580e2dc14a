#pragma once
// Digital elevation model: the grid every pipeline stage reads and writes.
//
// Conventions (shared by all modules):
//   - row-major, index = y * width + x, y grows "north"
//   - cell (x, y) has its center at world position (x * resolution, y * resolution)
//   - extent in meters is width * resolution by height * resolution

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace lunaforge {

inline constexpr std::size_t kDefaultPixelBudget = std::size_t{1} << 28;

struct GridCoord {
    double x = 0.0;
    double y = 0.0;
};

class Dem {
public:
    Dem() = default;
    /// Constant-valued grid without holes.
    Dem(int width, int height, double resolution, float fill = 0.0f);
    /// Takes ownership of the elevations; the mask, when non-empty, must
    /// have the same length (nonzero = hole).
    Dem(int width, int height, double resolution, std::vector<float> elevations,
        std::vector<std::uint8_t> nodata_mask = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double resolution() const noexcept { return resolution_; }
    std::size_t size() const noexcept { return elevations_.size(); }
    double extent_x() const noexcept { return width_ * resolution_; }
    double extent_y() const noexcept { return height_ * resolution_; }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }
    float at(int x, int y) const noexcept { return elevations_[index(x, y)]; }
    float& at(int x, int y) noexcept { return elevations_[index(x, y)]; }

    std::span<const float> elevations() const noexcept { return elevations_; }
    std::span<float> elevations() noexcept { return elevations_; }

    bool has_holes() const noexcept;
    bool is_hole(int x, int y) const noexcept {
        return !mask_.empty() && mask_[index(x, y)] != 0;
    }
    /// Empty when the grid carries no no-data information.
    std::span<const std::uint8_t> nodata_mask() const noexcept { return mask_; }
    void set_hole(int x, int y, bool hole);
    void clear_mask() noexcept { mask_.clear(); }

    friend bool operator==(const Dem&, const Dem&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.0;
    std::vector<float> elevations_;
    std::vector<std::uint8_t> mask_;
};

enum class HeightmapFormat { raw_f32, png16 };

/// Linear elevation range used by the 16-bit format. Unset means the data
/// range is used.
struct Png16Range {
    double min_m = 0.0;
    double max_m = 0.0;
};

/// Sidecar header location for a heightmap payload: "<path>.hdr".
std::filesystem::path header_path(const std::filesystem::path& payload);

Dem load_dem(const std::filesystem::path& path, HeightmapFormat format);
void save_dem(const Dem& dem, const std::filesystem::path& path, HeightmapFormat format,
              std::optional<Png16Range> range = std::nullopt);

/// Most-negative finite float; written in place of holes by the raw format.
inline constexpr float kNodataSentinel = -3.40282346638528859811704183484516925440e+38f;

double bilinear_sample(const Dem& dem, GridCoord at);

Dem fill_holes(const Dem& dem);

/// Bicubic (Catmull-Rom) resampling onto a node-aligned grid. The output has
/// round((n - 1) * src_res / target_res) + 1 cells per axis, so the first and
/// last cell centers coincide with the input's.
Dem resample(const Dem& dem, double target_resolution,
             std::size_t pixel_budget = kDefaultPixelBudget);

/// Output cell count along one axis for resample().
std::int64_t resampled_length(int length, double source_res, double target_res);

}  // namespace lunaforge
