#pragma once
// Top-down annotation: instance-id rasters, bounding boxes and hillshade
// previews. Rasters share the DEM grid; pixel (x, y) is DEM cell (x, y).

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lunaforge/dem.hpp"
#include "lunaforge/forge.hpp"
#include "lunaforge/image_io.hpp"

namespace lunaforge {

struct InstanceRaster {
    int width = 0;
    int height = 0;
    double resolution = 0.0;
    std::vector<std::uint32_t> ids;  // row-major, 0 = background
    std::uint32_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
    friend bool operator==(const InstanceRaster&, const InstanceRaster&) = default;
};

struct PixelBox {
    int x = 0, y = 0, w = 0, h = 0;  // w = h = 0 when the instance is fully covered
    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

struct Annotation {
    std::uint32_t id = 0;  // manifest index + 1
    std::string asset_id;
    PixelBox bbox;
    std::size_t pixel_count = 0;
    /// Closed polygon (first vertex not repeated) approximating the footprint
    /// disk, in pixel coordinates.
    std::vector<Point2> footprint;
};

struct AnnotationSet {
    std::vector<Annotation> annotations;
};

struct Rasterization {
    InstanceRaster raster;
    AnnotationSet annotations;
};

inline constexpr int kFootprintPolygonSides = 32;

/// Paints each instance as a disk of radius footprint * scale; a cell belongs
/// to the disk when its center lies within it. Later instances overwrite
/// earlier ones. Throws Error(invalid_argument) for an asset without a
/// footprint.
Rasterization rasterize_instances(const Dem& dem, const PlacementManifest& manifest,
                                  const std::map<std::string, double>& footprints);

/// Footprint radii by asset id taken from the config's scatter rules.
std::map<std::string, double> footprints_from_config(const ForgeConfig& config);

/// Lambertian relief shading. Azimuth 0 points north (+y) and grows toward
/// east (+x); elevation must lie in (0, pi/2]. Image row 0 is the northmost
/// DEM row. Hole cells render as 0.
GrayImage<std::uint8_t> hillshade(const Dem& dem, double sun_azimuth, double sun_elevation);

/// Raw little-endian uint32 ids plus a "<path>.hdr" sidecar.
void save_instance_raster(const InstanceRaster& raster, const std::filesystem::path& path);
InstanceRaster load_instance_raster(const std::filesystem::path& path);

}  // namespace lunaforge
